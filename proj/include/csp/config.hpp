#pragma once

#include <map>
#include <string>
#include <vector>

#include "csp/eval.hpp"
#include "csp/rest.hpp"

namespace csp {

// Minimal section/key=value config text. Full-line comments start with '#'
// or ';'. Values keep inner whitespace; lists are whitespace separated.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static IniFile parse(const std::string& text, std::vector<std::string>& errors);
  const std::string* get(const std::string& section, const std::string& key) const;
};

struct EvalSpec {
  std::vector<double> fractions;  // default 0:1:0.05
  int n_draws = 32;               // forced-mode answer draws per question
};

// Everything one run needs; every field has a stated default.
struct RunConfig {
  WorldConfig world;
  Society society;
  PolicyConfig policy;
  RestConfig rest;
  RewardConfig reward;
  EvalSpec eval;
  OrchestratorConfig orch;
  uint64_t seed = 17;
  int threads = 0;          // 0 = hardware concurrency
  int simulate_samples = 4; // society rollouts per query for `simulate`
};

RunConfig default_run_config();

// Parses and validates; returns the config with errors collected (every
// violated invariant, not just the first). Errors empty means usable.
RunConfig parse_run_config(const std::string& text, std::vector<std::string>& errors);
RunConfig load_run_config(const std::string& path, std::vector<std::string>& errors);

// Deterministic re-rendering of the effective config; also what gets hashed.
std::string canonical_config_text(const RunConfig&);
std::string config_hash(const RunConfig&);  // 16 hex chars

}  // namespace csp
