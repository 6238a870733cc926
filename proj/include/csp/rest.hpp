#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csp/policy.hpp"

namespace csp {

// A rollout's projection onto action kinds, orchestrator order. Rollouts with
// equal projections are "compatible" and share one group.
using ActionSequence = std::vector<ActionKind>;

ActionSequence action_sequence(const Rollout&);

struct GroupStats {
  ActionSequence sequence;
  std::vector<size_t> members;  // indices into the partitioned rollout list
  double mean_reward = 0.0;
  size_t best_member = 0;  // max reward, ties to the lowest index
};

// Every rollout lands in exactly one group keyed by its action sequence.
std::vector<GroupStats> partition_by_action_sequence(std::span<const Rollout>);

// The max-mean group's best member, or nothing when that mean is <= tau.
// Equal means break toward the shorter sequence, then lexicographically with
// ANSWER < HEDGE < ASK < tools.
std::optional<size_t> select_training_rollout(std::span<const GroupStats>, double tau);

// One turn-level example per turn: the turn's feature key, its action, and
// the argument source it actually used.
std::vector<TrainExample> rollout_to_examples(const Rollout&, const Society&,
                                              const PolicyConfig&);

struct RestConfig {
  double tau = 0.1;
  int n_r = 32;  // rollouts per query
  int n_s = 200;
  int epochs = 3;
  double dev_fraction = 0.2;
  double learning_rate = 0.5;
  int queries_per_epoch = 0;  // 0 = every train question, reshuffled each epoch
  int eval_samples = 8;       // per (agent, eval question) for the epoch report
  // deployment rollouts decode near-greedily; training rollouts stay at the
  // policy's own sampling temperature
  double eval_temperature = 1e-3;
  int threads = 0;            // 0 = hardware concurrency
  uint64_t seed = 0;
};

struct EpochReport {
  int epoch = 0;           // 0 is the untrained policy
  size_t dataset_size = 0; // turn-level examples trained into this epoch
  bool skipped = false;    // empty dataset: previous policy kept
  // single-agent deployment metrics on the eval split, averaged over tool agents
  double task_f1 = 0.0;
  double search_rate = 0.0;
  double hedge_rate = 0.0;
  double mean_reward = 0.0;
};

struct RestResult {
  SoftmaxPolicy policy;
  std::vector<EpochReport> epochs;  // size epochs + 1, entry 0 pre-training
};

// Algorithm: per epoch, sample n_r rollouts per training query with the
// current policy, keep each query's best action-sequence representative when
// its group mean clears tau, train on the pooled turn examples with dev
// selection, then publish the new policy.
RestResult rest_train(const World&, const Society&, const SoftmaxPolicy& initial,
                      const RestConfig&, const OrchestratorConfig&, const RewardConfig&);

// Silver labels for the no-communication baseline: the best ANSWER-terminated
// rollout when its F1 > 0.5; otherwise the best HEDGE-terminated rollout when
// its F1 < 0.5, with the final answer's argument source excluded; else none.
std::vector<TrainExample> action_supervision_labels(std::span<const Rollout>,
                                                    const Society&, const PolicyConfig&);

// Same loop as rest_train, but rollouts run one agent at a time with ASK
// disabled and queries are labeled by action_supervision_labels.
RestResult action_supervision_train(const World&, const Society&,
                                    const SoftmaxPolicy& initial, const RestConfig&,
                                    const OrchestratorConfig&, const RewardConfig&);

// Shared by rest_train and the eval harness: single-agent deployment metrics
// over a question set for every tool-carrying agent in the society.
EpochReport single_agent_report(const World&, const Society&, const SoftmaxPolicy&,
                                std::span<const Question* const>, const RestConfig&,
                                const OrchestratorConfig&, const RewardConfig&);

}  // namespace csp
