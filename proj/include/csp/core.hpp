#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csp {

struct Question;  // world.hpp

// ---------------------------------------------------------------------------
// actions

enum class ActionType { Answer, Hedge, Ask, Tool };

// One action an agent can emit in a turn. Tool actions carry their keyword;
// the only tool shipped here is SEARCH, but keywords stay per-agent strings so
// new tools do not touch this header.
struct ActionKind {
  ActionType type = ActionType::Hedge;
  std::string tool;  // keyword, set iff type == Tool

  static ActionKind answer() { return {ActionType::Answer, {}}; }
  static ActionKind hedge() { return {ActionType::Hedge, {}}; }
  static ActionKind ask() { return {ActionType::Ask, {}}; }
  static ActionKind tool_action(std::string keyword) {
    return {ActionType::Tool, std::move(keyword)};
  }

  bool is_tool() const { return type == ActionType::Tool; }
  bool relinquishes() const {
    return type == ActionType::Answer || type == ActionType::Hedge;
  }

  std::string label() const;  // ANSWER / HEDGE / ASK / <tool keyword>
  static ActionKind from_label(std::string_view label);

  friend bool operator==(const ActionKind&, const ActionKind&) = default;
  // deterministic tie-break order: ANSWER < HEDGE < ASK < tools (by keyword)
  friend bool operator<(const ActionKind& a, const ActionKind& b) {
    if (a.type != b.type) return a.type < b.type;
    return a.tool < b.tool;
  }
};

inline const std::string kSearchKeyword = "SEARCH";
inline ActionKind search_action() { return ActionKind::tool_action(kSearchKeyword); }

// ---------------------------------------------------------------------------
// single-line action protocol

struct ParsedAction {
  ActionKind kind;
  std::string argument;
  bool violation = false;  // the fallback rule fired
};

// Parses "ACTION: **<KIND>**: <argument>" with a case-insensitive keyword.
// Malformed input maps to (HEDGE, full raw text) with the violation flag set:
// HEDGE is the minimal-commitment action and dropping the turn would wedge
// the ask stack.
ParsedAction parse_action_line(std::string_view line);
std::string render_action_line(const ActionKind& kind, std::string_view argument);

// ---------------------------------------------------------------------------
// agents and societies

struct ToolSpec {
  std::string keyword;  // unique within an agent
  std::string corpus_id;
  int k_results = 5;
};

struct AgentSpec {
  std::string agent_id;
  std::vector<ToolSpec> tools;
  bool can_ask = false;

  const ToolSpec* find_tool(std::string_view keyword) const;
};

struct Society {
  std::vector<AgentSpec> agents;
  std::vector<std::pair<std::string, std::string>> edges;  // directed (from, to)

  const AgentSpec* find_agent(std::string_view id) const;
  // targets of out-edges, ascending agent id, deduplicated
  std::vector<std::string> out_neighbors(std::string_view id) const;
};

// Every violated invariant, human readable; empty means ok.
std::vector<std::string> validate_society(const Society&);

// ---------------------------------------------------------------------------
// evidence and per-turn context

enum class EvidenceTag { Retrieval, FriendAnswer, FriendHedge };

std::string evidence_tag_label(EvidenceTag tag);

struct EvidenceItem {
  EvidenceTag tag = EvidenceTag::Retrieval;
  std::string text;
  std::string source_id;  // present only when deanonymization is on
  bool is_gold = false;   // world-truth marker on retrieval snippets
};

// What an agent sees when asked to act.
struct AgentContext {
  const Question* question = nullptr;
  std::string query;
  std::vector<EvidenceItem> evidence;  // arrival order
  std::vector<ActionKind> available_actions;

  bool has(const ActionKind& kind) const;
  int friend_answers() const;
  int friend_hedges() const;
  bool has_retrieval() const;
  bool retrieval_hit() const;  // any gold snippet among the retrievals
};

// ---------------------------------------------------------------------------
// rollouts

// Where an emitted argument came from. Verbatim covers ASK/SEARCH arguments
// (query copied unchanged) and externally supplied text.
enum class ArgSource { Verbatim, Parametric, Retrieval, FriendAnswer, FriendHedge };

std::string arg_source_label(ArgSource source);

struct Turn {
  std::string agent_id;
  AgentContext context;
  ActionKind action;
  std::string argument;
  ArgSource source = ArgSource::Verbatim;
  std::string source_id;  // id of the friend reply used, when deanonymized
  bool violation = false;
};

struct Rollout {
  std::string query_id;
  std::vector<Turn> turns;
  bool terminal = false;
  std::string final_answer;
  double score = 0.0;   // token F1 of the final answer against gold
  int effort = 0;       // number of search turns
  double reward = 0.0;  // score - delta * effort
};

}  // namespace csp
