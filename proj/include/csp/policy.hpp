#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csp/orchestrator.hpp"

namespace csp {

// The untrained tilts reproduce the prompted-model starting point: first
// turns nearly always ASK / SEARCH, evidence-bearing turns relinquish with an
// answer instead of re-searching, friends' confident answers are passed along
// about 80% of the time, and post-search answers come from the evidence.
struct PolicyConfig {
  double temperature = 1.0;
  int beta_buckets = 10;  // quantized difficulty resolution of the feature key
  double ask_bias = 4.0;
  double search_bias = 4.0;
  double relinquish_bias = 2.0;  // ANSWER/HEDGE tilt once evidence is present
  double friend_answer_bias = 2.0;
  double retrieval_bias = 2.0;
  bool deanon_features = false;
};

// Copy with a different sampling temperature; near zero approximates greedy
// decoding while exact weight ties stay uniform.
class SoftmaxPolicy;
SoftmaxPolicy with_temperature(const SoftmaxPolicy&, double temperature);

// Structural abstraction of a prompt: role, topic, quantized difficulty, an
// evidence summary, and (when deanonymized) the friend reply identities.
// Answer text content is deliberately invisible so the policy stays tabular.
struct FeatureKey {
  std::string role;  // "asker" or "helper:<corpus>"
  std::string topic;
  int beta_bucket = 0;
  std::string evidence_code;  // none | retr:gold | retr:nogold | friends:a#:h#:agree#
  std::string deanon_ids;     // "ans=..;hedge=.." when deanonymized

  std::string encode() const;
  // Source-head key: the friends evidence code collapses (no counts, no ids),
  // so a pull learned under one reply pattern carries over to the others --
  // the tabular stand-in for an LM sharing source preferences across prompts.
  std::string encode_source() const;
};

FeatureKey featurize(const AgentSpec&, const AgentContext&, const PolicyConfig&);

// Sources an ANSWER/HEDGE argument can be drawn from in this context. Without
// deanonymization friend replies are pulled by confidence tag alone; with it
// each reply is its own id-qualified source (FRIEND_ANSWER:<id>), so a policy
// can learn identity-based pulls that ignore the confidence markers.
std::vector<std::string> available_source_labels(const AgentContext&, bool deanon);

struct TrainExample {
  std::string key;
  std::string source_key;                      // reduced key for the source head
  std::vector<std::string> available_actions;  // action labels seen in the context
  std::string action;                          // target action label
  std::vector<std::string> available_sources;  // empty when no source head applies
  std::string source;                          // target source label; empty = untrained
};

using WeightTable = std::map<std::string, std::map<std::string, double>>;

// The single shared set of trainable parameters: a feature-keyed softmax over
// actions plus an argument-source head. All agents run the same instance and
// differ only through their feature keys.
class SoftmaxPolicy final : public AgentPolicy {
 public:
  SoftmaxPolicy() = default;
  explicit SoftmaxPolicy(PolicyConfig cfg) : cfg_(std::move(cfg)) {}

  const PolicyConfig& config() const { return cfg_; }
  PolicyConfig& config() { return cfg_; }

  // weights fall back to the role-based initial bias until trained
  double action_weight(const std::string& key, const std::string& label) const;
  double source_weight(const std::string& key, const std::string& label) const;
  void set_action_weight(const std::string& key, const std::string& label, double w);
  void set_source_weight(const std::string& key, const std::string& label, double w);

  std::vector<double> action_probs(const std::string& key,
                                   std::span<const std::string> labels) const;
  std::vector<double> source_probs(const std::string& key,
                                   std::span<const std::string> labels) const;

  // restricted and renormalized to the context's available actions
  std::vector<std::pair<ActionKind, double>> action_probs(const AgentSpec&,
                                                          const AgentContext&) const;

  ActionChoice choose(const World&, const AgentSpec&, const AgentContext&,
                      Rng&) const override;

  const WeightTable& action_table() const { return action_weights_; }
  const WeightTable& source_table() const { return source_weights_; }

 private:
  PolicyConfig cfg_;
  WeightTable action_weights_;
  WeightTable source_weights_;

  double initial_action_weight(const std::string& key, const std::string& label) const;
  double initial_source_weight(const std::string& label) const;
  std::vector<double> softmax(std::span<const double> weights) const;
};

double log_likelihood(const SoftmaxPolicy&, std::span<const TrainExample>);

struct Gradients {
  WeightTable action;
  WeightTable source;
};

// mean NLL over examples and its gradient; both heads share the scale
std::pair<double, Gradients> nll_and_grad(const SoftmaxPolicy&,
                                          std::span<const TrainExample>);

struct TrainConfig {
  int n_s = 200;               // gradient steps
  double learning_rate = 0.5;
  double dev_fraction = 0.2;
  uint64_t seed = 0;
};

struct TrainResult {
  SoftmaxPolicy policy;                    // snapshot with the best dev log-likelihood
  std::vector<double> dev_log_likelihood;  // per step; entry 0 is pre-training
  int best_step = 0;
  bool dev_empty = false;  // dev split was empty, final snapshot returned
};

// Full-batch cross-entropy descent on both heads. Throws on an empty example
// list. Deterministic in seed.
TrainResult train(const SoftmaxPolicy&, const std::vector<TrainExample>&,
                  const TrainConfig&);

}  // namespace csp
