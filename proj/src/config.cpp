#include "csp/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace csp {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

IniFile IniFile::parse(const std::string& text, std::vector<std::string>& errors) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      ini.sections[section];
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    ini.sections[section][key] = value;
  }
  return ini;
}

const std::string* IniFile::get(const std::string& section, const std::string& key) const {
  auto sec = sections.find(section);
  if (sec == sections.end()) return nullptr;
  auto it = sec->second.find(key);
  return it == sec->second.end() ? nullptr : &it->second;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.world = default_world_config();

  AgentSpec asker{"asker", {}, true};
  AgentSpec wiki{"wiki", {ToolSpec{"SEARCH", "wiki", 5}}, false};
  AgentSpec pubmed{"pubmed", {ToolSpec{"SEARCH", "pubmed", 5}}, false};
  cfg.society.agents = {asker, wiki, pubmed};
  cfg.society.edges = {{"asker", "wiki"}, {"asker", "pubmed"}};

  cfg.orch.initial_agent = "asker";
  cfg.eval.fractions = default_fractions();
  return cfg;
}

namespace {

struct Parser {
  const IniFile& ini;
  std::vector<std::string>& errors;
  std::map<std::string, std::vector<std::string>> known;  // section -> consumed keys

  void note(const std::string& section, const std::string& key) {
    known[section].push_back(key);
  }

  bool parse_double(const std::string& section, const std::string& key, double& out) {
    const std::string* v = ini.get(section, key);
    if (v == nullptr) return false;
    note(section, key);
    try {
      size_t used = 0;
      out = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("");
    } catch (...) {
      errors.push_back("[" + section + "] " + key + ": not a number: " + *v);
    }
    return true;
  }

  bool parse_int(const std::string& section, const std::string& key, int& out) {
    const std::string* v = ini.get(section, key);
    if (v == nullptr) return false;
    note(section, key);
    try {
      size_t used = 0;
      out = std::stoi(*v, &used);
      if (used != v->size()) throw std::invalid_argument("");
    } catch (...) {
      errors.push_back("[" + section + "] " + key + ": not an integer: " + *v);
    }
    return true;
  }

  bool parse_u64(const std::string& section, const std::string& key, uint64_t& out) {
    const std::string* v = ini.get(section, key);
    if (v == nullptr) return false;
    note(section, key);
    try {
      size_t used = 0;
      out = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument("");
    } catch (...) {
      errors.push_back("[" + section + "] " + key + ": not an unsigned integer: " + *v);
    }
    return true;
  }

  bool parse_bool(const std::string& section, const std::string& key, bool& out) {
    const std::string* v = ini.get(section, key);
    if (v == nullptr) return false;
    note(section, key);
    if (*v == "true" || *v == "1")
      out = true;
    else if (*v == "false" || *v == "0")
      out = false;
    else
      errors.push_back("[" + section + "] " + key + ": expected true/false: " + *v);
    return true;
  }

  bool parse_range(const std::string& section, const std::string& key, double& lo,
                   double& hi) {
    const std::string* v = ini.get(section, key);
    if (v == nullptr) return false;
    note(section, key);
    const auto parts = split_ws(*v);
    if (parts.size() != 2) {
      errors.push_back("[" + section + "] " + key + ": expected two numbers: " + *v);
      return true;
    }
    try {
      lo = std::stod(parts[0]);
      hi = std::stod(parts[1]);
    } catch (...) {
      errors.push_back("[" + section + "] " + key + ": not numbers: " + *v);
    }
    return true;
  }

  void check_unknown() {
    for (const auto& [section, keys] : ini.sections) {
      const auto it = known.find(section);
      for (const auto& [key, value] : keys) {
        const bool seen =
            it != known.end() &&
            std::find(it->second.begin(), it->second.end(), key) != it->second.end();
        if (!seen) errors.push_back("[" + section + "] unknown key: " + key);
      }
    }
  }
};

void parse_world(Parser& p, WorldConfig& world) {
  const std::string* topics = p.ini.get("world", "topics");
  if (topics != nullptr) {
    p.note("world", "topics");
    world.topics.clear();
    for (const auto& name : split_ws(*topics)) world.topics[name] = TopicConfig{};
  }
  p.parse_double("world", "a_hit", world.a_hit);
  p.parse_double("world", "a_miss", world.a_miss);
  p.parse_double("world", "eval_fraction", world.eval_fraction);
  for (auto& [name, topic] : world.topics) {
    if (topic.n_questions == 0) topic.n_questions = 240;  // fresh topic from `topics =`
    if (topic.beta_hi == 1.0 && topic.beta_lo == 0.0) {
      topic.beta_lo = 0.1;
      topic.beta_hi = 0.95;
    }
    p.parse_int("world", "topic." + name + ".questions", topic.n_questions);
    p.parse_range("world", "topic." + name + ".beta", topic.beta_lo, topic.beta_hi);
    // hit ranges: topic.<name>.hit.<corpus> = lo hi
    const auto sec = p.ini.sections.find("world");
    if (sec != p.ini.sections.end()) {
      const std::string prefix = "topic." + name + ".hit.";
      for (const auto& [key, value] : sec->second) {
        if (key.rfind(prefix, 0) != 0) continue;
        const std::string corpus = key.substr(prefix.size());
        auto& range = topic.hit_range[corpus];
        p.parse_range("world", key, range.first, range.second);
      }
    }
  }
}

void parse_society(Parser& p, RunConfig& cfg) {
  const std::string* agents = p.ini.get("society", "agents");
  if (agents != nullptr) {
    p.note("society", "agents");
    cfg.society.agents.clear();
    cfg.society.edges.clear();
    for (const auto& id : split_ws(*agents)) cfg.society.agents.push_back({id, {}, false});
  }
  for (auto& agent : cfg.society.agents) {
    p.parse_bool("society", agent.agent_id + ".can_ask", agent.can_ask);
    const std::string* tool = p.ini.get("society", agent.agent_id + ".tool");
    if (tool != nullptr) {
      p.note("society", agent.agent_id + ".tool");
      const auto parts = split_ws(*tool);
      if (parts.size() < 2 || parts.size() > 3) {
        p.errors.push_back("[society] " + agent.agent_id +
                           ".tool: expected `keyword corpus [k]`: " + *tool);
      } else {
        ToolSpec spec{parts[0], parts[1], 5};
        if (parts.size() == 3) {
          try {
            spec.k_results = std::stoi(parts[2]);
          } catch (...) {
            p.errors.push_back("[society] " + agent.agent_id + ".tool: bad k: " + *tool);
          }
        }
        agent.tools = {spec};
      }
    }
  }
  const std::string* edges = p.ini.get("society", "edges");
  if (edges != nullptr) {
    p.note("society", "edges");
    cfg.society.edges.clear();
    for (const auto& e : split_ws(*edges)) {
      const size_t gt = e.find('>');
      if (gt == std::string::npos || gt == 0 || gt + 1 == e.size()) {
        p.errors.push_back("[society] edges: expected from>to: " + e);
        continue;
      }
      cfg.society.edges.emplace_back(e.substr(0, gt), e.substr(gt + 1));
    }
  }
  const std::string* initial = p.ini.get("society", "initial");
  if (initial != nullptr) {
    p.note("society", "initial");
    cfg.orch.initial_agent = *initial;
  }
  p.parse_bool("society", "deanon", cfg.orch.deanon);
  p.parse_int("society", "max_turns", cfg.orch.max_turns);
  p.parse_int("society", "max_searches", cfg.orch.max_searches);
  p.parse_int("society", "max_ask_depth", cfg.orch.max_ask_depth);
}

void parse_fractions(Parser& p, EvalSpec& eval) {
  const std::string* v = p.ini.get("eval", "fractions");
  if (v == nullptr) return;
  p.note("eval", "fractions");
  eval.fractions.clear();
  if (v->find(':') != std::string::npos) {
    double lo = 0, hi = 1, step = 0.05;
    if (std::sscanf(v->c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0) {
      p.errors.push_back("[eval] fractions: expected lo:hi:step: " + *v);
      return;
    }
    for (int i = 0;; ++i) {
      double f = lo + i * step;
      if (f > hi + 1e-9) break;
      if (f > hi) f = hi;  // absorb accumulated float error at the top end
      eval.fractions.push_back(f);
    }
    return;
  }
  for (const auto& tok : split_ws(*v)) {
    try {
      eval.fractions.push_back(std::stod(tok));
    } catch (...) {
      p.errors.push_back("[eval] fractions: not a number: " + tok);
    }
  }
}

void validate_run_config(const RunConfig& cfg, std::vector<std::string>& errors) {
  for (const auto& v : validate_world_config(cfg.world)) errors.push_back("[world] " + v);
  for (const auto& v : validate_society(cfg.society)) errors.push_back("[society] " + v);
  if (cfg.society.find_agent(cfg.orch.initial_agent) == nullptr)
    errors.push_back("[society] initial agent not in society: " + cfg.orch.initial_agent);
  if (cfg.orch.max_turns < 1) errors.push_back("[society] max_turns < 1");
  if (cfg.orch.max_searches < 0) errors.push_back("[society] max_searches < 0");
  if (cfg.orch.max_ask_depth < 0) errors.push_back("[society] max_ask_depth < 0");
  if (!(cfg.policy.temperature > 0)) errors.push_back("[policy] temperature must be > 0");
  if (cfg.policy.beta_buckets < 1) errors.push_back("[policy] beta_buckets < 1");
  if (cfg.rest.n_r < 1) errors.push_back("[rest] n_r < 1");
  if (cfg.rest.epochs < 1) errors.push_back("[rest] epochs < 1");
  if (cfg.rest.n_s < 0) errors.push_back("[rest] n_s < 0");
  if (!(cfg.rest.dev_fraction >= 0 && cfg.rest.dev_fraction < 1))
    errors.push_back("[rest] dev_fraction outside [0, 1)");
  if (!(cfg.rest.learning_rate > 0)) errors.push_back("[rest] learning_rate must be > 0");
  if (cfg.rest.eval_samples < 1) errors.push_back("[rest] eval_samples < 1");
  if (!(cfg.rest.eval_temperature > 0))
    errors.push_back("[rest] eval_temperature must be > 0");
  if (cfg.reward.delta < 0) errors.push_back("[reward] delta < 0");
  if (cfg.eval.n_draws < 1) errors.push_back("[eval] n_draws < 1");
  if (cfg.simulate_samples < 1) errors.push_back("[run] samples < 1");
  for (size_t i = 0; i < cfg.eval.fractions.size(); ++i) {
    const double f = cfg.eval.fractions[i];
    if (f < 0 || f > 1) errors.push_back("[eval] fraction outside [0, 1]");
    if (i > 0 && f <= cfg.eval.fractions[i - 1]) {
      errors.push_back("[eval] fractions must increase strictly");
      break;
    }
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, std::vector<std::string>& errors) {
  RunConfig cfg = default_run_config();
  Parser p{IniFile::parse(text, errors), errors, {}};

  parse_world(p, cfg.world);
  parse_society(p, cfg);

  p.parse_double("policy", "temperature", cfg.policy.temperature);
  p.parse_int("policy", "beta_buckets", cfg.policy.beta_buckets);
  p.parse_double("policy", "ask_bias", cfg.policy.ask_bias);
  p.parse_double("policy", "search_bias", cfg.policy.search_bias);
  p.parse_double("policy", "relinquish_bias", cfg.policy.relinquish_bias);
  p.parse_double("policy", "friend_answer_bias", cfg.policy.friend_answer_bias);
  p.parse_double("policy", "retrieval_bias", cfg.policy.retrieval_bias);

  p.parse_double("rest", "tau", cfg.rest.tau);
  p.parse_int("rest", "n_r", cfg.rest.n_r);
  p.parse_int("rest", "n_s", cfg.rest.n_s);
  p.parse_int("rest", "epochs", cfg.rest.epochs);
  p.parse_double("rest", "dev_fraction", cfg.rest.dev_fraction);
  p.parse_double("rest", "learning_rate", cfg.rest.learning_rate);
  p.parse_int("rest", "queries_per_epoch", cfg.rest.queries_per_epoch);
  p.parse_int("rest", "eval_samples", cfg.rest.eval_samples);
  p.parse_double("rest", "eval_temperature", cfg.rest.eval_temperature);

  p.parse_double("reward", "delta", cfg.reward.delta);

  parse_fractions(p, cfg.eval);
  p.parse_int("eval", "n_draws", cfg.eval.n_draws);

  p.parse_u64("run", "seed", cfg.seed);
  p.parse_int("run", "threads", cfg.threads);
  p.parse_int("run", "samples", cfg.simulate_samples);

  p.check_unknown();

  // derived wiring: one master seed, deanon features follow the orchestrator
  cfg.policy.deanon_features = cfg.orch.deanon;
  cfg.rest.threads = cfg.threads;
  cfg.rest.seed = derive_seed(cfg.seed, "rest");
  cfg.world.seed = derive_seed(cfg.seed, "world");

  validate_run_config(cfg, errors);
  return cfg;
}

RunConfig load_run_config(const std::string& path, std::vector<std::string>& errors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    errors.push_back("cannot open config file: " + path);
    return default_run_config();
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), errors);
}

std::string canonical_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[world]\n";
  std::string topics;
  for (const auto& [name, topic] : cfg.world.topics) topics += name + " ";
  out << "topics = " << trim(topics) << "\n";
  out << "a_hit = " << fmt(cfg.world.a_hit) << "\n";
  out << "a_miss = " << fmt(cfg.world.a_miss) << "\n";
  out << "eval_fraction = " << fmt(cfg.world.eval_fraction) << "\n";
  for (const auto& [name, topic] : cfg.world.topics) {
    out << "topic." << name << ".questions = " << topic.n_questions << "\n";
    out << "topic." << name << ".beta = " << fmt(topic.beta_lo) << " " << fmt(topic.beta_hi)
        << "\n";
    for (const auto& [corpus, range] : topic.hit_range)
      out << "topic." << name << ".hit." << corpus << " = " << fmt(range.first) << " "
          << fmt(range.second) << "\n";
  }

  out << "\n[society]\n";
  std::string agents;
  for (const auto& a : cfg.society.agents) agents += a.agent_id + " ";
  out << "agents = " << trim(agents) << "\n";
  for (const auto& a : cfg.society.agents) {
    out << a.agent_id << ".can_ask = " << (a.can_ask ? "true" : "false") << "\n";
    for (const auto& t : a.tools)
      out << a.agent_id << ".tool = " << t.keyword << " " << t.corpus_id << " "
          << t.k_results << "\n";
  }
  std::string edges;
  for (const auto& [from, to] : cfg.society.edges) edges += from + ">" + to + " ";
  out << "edges = " << trim(edges) << "\n";
  out << "initial = " << cfg.orch.initial_agent << "\n";
  out << "deanon = " << (cfg.orch.deanon ? "true" : "false") << "\n";
  out << "max_turns = " << cfg.orch.max_turns << "\n";
  out << "max_searches = " << cfg.orch.max_searches << "\n";
  out << "max_ask_depth = " << cfg.orch.max_ask_depth << "\n";

  out << "\n[policy]\n";
  out << "temperature = " << fmt(cfg.policy.temperature) << "\n";
  out << "beta_buckets = " << cfg.policy.beta_buckets << "\n";
  out << "ask_bias = " << fmt(cfg.policy.ask_bias) << "\n";
  out << "search_bias = " << fmt(cfg.policy.search_bias) << "\n";
  out << "relinquish_bias = " << fmt(cfg.policy.relinquish_bias) << "\n";
  out << "friend_answer_bias = " << fmt(cfg.policy.friend_answer_bias) << "\n";
  out << "retrieval_bias = " << fmt(cfg.policy.retrieval_bias) << "\n";

  out << "\n[rest]\n";
  out << "tau = " << fmt(cfg.rest.tau) << "\n";
  out << "n_r = " << cfg.rest.n_r << "\n";
  out << "n_s = " << cfg.rest.n_s << "\n";
  out << "epochs = " << cfg.rest.epochs << "\n";
  out << "dev_fraction = " << fmt(cfg.rest.dev_fraction) << "\n";
  out << "learning_rate = " << fmt(cfg.rest.learning_rate) << "\n";
  out << "queries_per_epoch = " << cfg.rest.queries_per_epoch << "\n";
  out << "eval_samples = " << cfg.rest.eval_samples << "\n";
  out << "eval_temperature = " << fmt(cfg.rest.eval_temperature) << "\n";

  out << "\n[reward]\n";
  out << "delta = " << fmt(cfg.reward.delta) << "\n";

  out << "\n[eval]\n";
  std::string fractions;
  for (double f : cfg.eval.fractions) fractions += fmt(f) + " ";
  out << "fractions = " << trim(fractions) << "\n";
  out << "n_draws = " << cfg.eval.n_draws << "\n";

  out << "\n[run]\n";
  out << "seed = " << cfg.seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "samples = " << cfg.simulate_samples << "\n";
  return out.str();
}

std::string config_hash(const RunConfig& cfg) {
  const uint64_t h = hash_str(canonical_config_text(cfg));
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace csp
