#include "csp/core.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace csp {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool keyword_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::string ActionKind::label() const {
  switch (type) {
    case ActionType::Answer: return "ANSWER";
    case ActionType::Hedge: return "HEDGE";
    case ActionType::Ask: return "ASK";
    case ActionType::Tool: return tool;
  }
  return "HEDGE";
}

ActionKind ActionKind::from_label(std::string_view label) {
  const std::string up = upper(label);
  if (up == "ANSWER") return answer();
  if (up == "HEDGE") return hedge();
  if (up == "ASK") return ask();
  return tool_action(up);
}

ParsedAction parse_action_line(std::string_view line) {
  const auto fallback = [&] {
    return ParsedAction{ActionKind::hedge(), std::string(line), true};
  };

  std::string_view rest = trim(line);
  if (rest.size() < 7 || upper(rest.substr(0, 6)) != "ACTION") return fallback();
  rest.remove_prefix(6);
  rest = trim(rest);
  if (rest.empty() || rest.front() != ':') return fallback();
  rest.remove_prefix(1);
  rest = trim(rest);
  if (rest.size() < 2 || rest.substr(0, 2) != "**") return fallback();
  rest.remove_prefix(2);

  size_t klen = 0;
  while (klen < rest.size() && keyword_char(rest[klen])) ++klen;
  if (klen == 0) return fallback();
  const std::string keyword = upper(rest.substr(0, klen));
  rest.remove_prefix(klen);
  if (rest.size() < 2 || rest.substr(0, 2) != "**") return fallback();
  rest.remove_prefix(2);
  rest = trim(rest);
  if (rest.empty() || rest.front() != ':') return fallback();
  rest.remove_prefix(1);
  const std::string_view argument = trim(rest);
  if (argument.empty()) return fallback();

  return ParsedAction{ActionKind::from_label(keyword), std::string(argument), false};
}

std::string render_action_line(const ActionKind& kind, std::string_view argument) {
  std::string out = "ACTION: **";
  out += kind.label();
  out += "**: ";
  out += argument;
  return out;
}

const ToolSpec* AgentSpec::find_tool(std::string_view keyword) const {
  for (const auto& t : tools)
    if (t.keyword == keyword) return &t;
  return nullptr;
}

const AgentSpec* Society::find_agent(std::string_view id) const {
  for (const auto& a : agents)
    if (a.agent_id == id) return &a;
  return nullptr;
}

std::vector<std::string> Society::out_neighbors(std::string_view id) const {
  std::set<std::string> targets;
  for (const auto& [from, to] : edges)
    if (from == id) targets.insert(to);
  return {targets.begin(), targets.end()};
}

std::vector<std::string> validate_society(const Society& society) {
  std::vector<std::string> violations;
  std::set<std::string> ids;
  for (const auto& a : society.agents) {
    if (a.agent_id.empty()) violations.push_back("empty agent id");
    if (!ids.insert(a.agent_id).second)
      violations.push_back("duplicate agent id: " + a.agent_id);
    std::set<std::string> keywords;
    for (const auto& t : a.tools) {
      const std::string up = upper(t.keyword);
      if (up == "ANSWER" || up == "HEDGE" || up == "ASK")
        violations.push_back("reserved tool keyword on " + a.agent_id + ": " + t.keyword);
      if (!keywords.insert(up).second)
        violations.push_back("duplicate tool keyword on " + a.agent_id + ": " + t.keyword);
      if (t.k_results < 1)
        violations.push_back("k_results < 1 on " + a.agent_id + ": " + t.keyword);
      if (t.corpus_id.empty())
        violations.push_back("empty corpus id on " + a.agent_id + ": " + t.keyword);
    }
  }
  for (const auto& [from, to] : society.edges) {
    if (from == to) violations.push_back("self-edge: (" + from + ", " + to + ")");
    if (!ids.count(from)) violations.push_back("dangling edge from unknown agent: " + from);
    if (!ids.count(to)) violations.push_back("dangling edge to unknown agent: " + to);
  }
  return violations;
}

std::string evidence_tag_label(EvidenceTag tag) {
  switch (tag) {
    case EvidenceTag::Retrieval: return "RETRIEVAL";
    case EvidenceTag::FriendAnswer: return "FRIEND_ANSWER";
    case EvidenceTag::FriendHedge: return "FRIEND_HEDGE";
  }
  return "RETRIEVAL";
}

bool AgentContext::has(const ActionKind& kind) const {
  return std::find(available_actions.begin(), available_actions.end(), kind) !=
         available_actions.end();
}

int AgentContext::friend_answers() const {
  int n = 0;
  for (const auto& e : evidence) n += e.tag == EvidenceTag::FriendAnswer;
  return n;
}

int AgentContext::friend_hedges() const {
  int n = 0;
  for (const auto& e : evidence) n += e.tag == EvidenceTag::FriendHedge;
  return n;
}

bool AgentContext::has_retrieval() const {
  for (const auto& e : evidence)
    if (e.tag == EvidenceTag::Retrieval) return true;
  return false;
}

bool AgentContext::retrieval_hit() const {
  for (const auto& e : evidence)
    if (e.tag == EvidenceTag::Retrieval && e.is_gold) return true;
  return false;
}

std::string arg_source_label(ArgSource source) {
  switch (source) {
    case ArgSource::Verbatim: return "VERBATIM";
    case ArgSource::Parametric: return "PARAMETRIC";
    case ArgSource::Retrieval: return "RETRIEVAL";
    case ArgSource::FriendAnswer: return "FRIEND_ANSWER";
    case ArgSource::FriendHedge: return "FRIEND_HEDGE";
  }
  return "VERBATIM";
}

}  // namespace csp
