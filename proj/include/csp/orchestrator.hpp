#pragma once

#include <map>
#include <string>
#include <vector>

#include "csp/core.hpp"
#include "csp/rng.hpp"
#include "csp/world.hpp"

namespace csp {

struct OrchestratorConfig {
  std::string initial_agent;
  int max_turns = 8;
  int max_searches = 4;  // per rollout
  int max_ask_depth = 1;
  bool deanon = false;
};

// One sampled (or externally supplied) agent output.
struct ActionChoice {
  ActionKind kind;
  std::string argument;
  ArgSource source = ArgSource::Verbatim;
  std::string source_id;  // friend reply id used, when deanonymized
  bool violation = false;
};

// Anything that can act for an agent: the shared softmax policy, scripted
// test policies, external backends. Implementations are read-shared across
// concurrent rollout workers, so choose() is const.
class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;
  virtual ActionChoice choose(const World& world, const AgentSpec& agent,
                              const AgentContext& context, Rng& rng) const = 0;
};

// One pending ASK broadcast: who asked, with which query, and which
// out-neighbors still have to run their isolated sub-dialogues.
struct AskFrame {
  std::string asker;
  std::string query;
  std::vector<std::string> remaining;  // ascending agent id, front is next
};

struct OrchestratorState {
  const Question* question = nullptr;
  std::string current_agent;
  std::vector<AskFrame> ask_stack;
  std::map<std::string, std::vector<EvidenceItem>> evidence;  // accumulated per agent
  std::map<std::string, std::string> incoming_query;
  Rollout history;
  int turn_count = 0;
  int search_count = 0;
  bool terminal = false;
};

OrchestratorState initial_state(const Question&, const OrchestratorConfig&);

// Turns needed to drain the stack if every pending agent relinquishes
// immediately; the budget logic keeps this within max_turns.
int min_turns_to_terminal(const OrchestratorState&);

// Actions the current agent may take, canonical order ANSWER, HEDGE, ASK,
// tools. ASK drops out for can_ask = false, missing out-neighbors, full ask
// depth, or when the remaining turn budget could not drain the stack; tools
// drop out when the rollout search budget is spent or turns run short.
std::vector<ActionKind> available_actions(const OrchestratorState&, const Society&,
                                          const OrchestratorConfig&);

AgentContext build_context(const OrchestratorState&, const std::string& for_agent,
                           const Society&, const OrchestratorConfig&);

// Applies one agent output. Outputs whose action is not available fall back
// to HEDGE over the rendered action line, flagged as a violation.
OrchestratorState step(OrchestratorState state, const ActionChoice& output,
                       const Society&, const World&, const OrchestratorConfig&, Rng& rng);

// Deterministic in (seed, policy, world). The returned rollout is terminal
// with score, effort, and reward filled in.
Rollout run_rollout(const Society&, const AgentPolicy&, const World&, const Question&,
                    const OrchestratorConfig&, const RewardConfig&, uint64_t seed);

// Convenience for the single-agent deployment setting: the agent alone in a
// society with no edges (ASK never available).
Society single_agent_society(const AgentSpec&);

}  // namespace csp
