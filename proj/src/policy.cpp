#include "csp/policy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace csp {

namespace {

bool is_core_label(const std::string& label) {
  return label == "ANSWER" || label == "HEDGE" || label == "ASK";
}

std::string role_of(const AgentSpec& agent) {
  return agent.tools.empty() ? "asker" : "helper:" + agent.tools.front().corpus_id;
}

}  // namespace

std::string FeatureKey::encode() const {
  std::string out = "role=" + role + "|topic=" + topic +
                    "|beta=" + std::to_string(beta_bucket) + "|ev=" + evidence_code;
  if (!deanon_ids.empty()) out += "|ids=" + deanon_ids;
  return out;
}

std::string FeatureKey::encode_source() const {
  std::string ev = evidence_code;
  if (ev.rfind("friends", 0) == 0) ev = "friends";
  return "role=" + role + "|topic=" + topic + "|beta=" + std::to_string(beta_bucket) +
         "|ev=" + ev;
}

FeatureKey featurize(const AgentSpec& agent, const AgentContext& ctx,
                     const PolicyConfig& cfg) {
  assert(ctx.question != nullptr);
  FeatureKey key;
  key.role = role_of(agent);
  key.topic = ctx.question->topic;
  const int buckets = std::max(1, cfg.beta_buckets);
  key.beta_bucket = std::clamp(static_cast<int>(ctx.question->beta * buckets), 0, buckets - 1);

  const int fa = ctx.friend_answers();
  const int fh = ctx.friend_hedges();
  if (fa + fh > 0) {
    std::set<std::string> texts;
    bool agree = false;
    for (const auto& e : ctx.evidence) {
      if (e.tag == EvidenceTag::Retrieval) continue;
      if (!texts.insert(e.text).second) agree = true;
    }
    key.evidence_code = "friends:a" + std::to_string(fa) + ":h" + std::to_string(fh) +
                        ":agree" + (agree ? "1" : "0");
    if (cfg.deanon_features) {
      std::set<std::string> ans_ids, hedge_ids;
      for (const auto& e : ctx.evidence) {
        if (e.tag == EvidenceTag::FriendAnswer) ans_ids.insert(e.source_id);
        if (e.tag == EvidenceTag::FriendHedge) hedge_ids.insert(e.source_id);
      }
      std::string ids = "ans=";
      for (const auto& id : ans_ids) ids += id + ",";
      ids += ";hedge=";
      for (const auto& id : hedge_ids) ids += id + ",";
      key.deanon_ids = ids;
    }
  } else if (ctx.has_retrieval()) {
    key.evidence_code = ctx.retrieval_hit() ? "retr:gold" : "retr:nogold";
  } else {
    key.evidence_code = "none";
  }
  return key;
}

std::vector<std::string> available_source_labels(const AgentContext& ctx, bool deanon) {
  std::vector<std::string> labels{"PARAMETRIC"};
  if (ctx.has_retrieval()) labels.push_back("RETRIEVAL");
  if (!deanon) {
    if (ctx.friend_answers() > 0) labels.push_back("FRIEND_ANSWER");
    if (ctx.friend_hedges() > 0) labels.push_back("FRIEND_HEDGE");
  } else {
    std::set<std::string> answer_ids, hedge_ids;
    for (const auto& e : ctx.evidence) {
      if (e.tag == EvidenceTag::FriendAnswer) answer_ids.insert(e.source_id);
      if (e.tag == EvidenceTag::FriendHedge) hedge_ids.insert(e.source_id);
    }
    for (const auto& id : answer_ids) labels.push_back("FRIEND_ANSWER:" + id);
    for (const auto& id : hedge_ids) labels.push_back("FRIEND_HEDGE:" + id);
  }
  return labels;
}

double SoftmaxPolicy::initial_action_weight(const std::string& key,
                                            const std::string& label) const {
  if (key.find("|ev=none") == std::string::npos) {
    // evidence in hand: tilt toward relinquishing with an answer or hedge
    return label == "ANSWER" || label == "HEDGE" ? cfg_.relinquish_bias : 0.0;
  }
  if (label == "ASK" && key.rfind("role=asker|", 0) == 0) return cfg_.ask_bias;
  if (!is_core_label(label) && key.rfind("role=helper:", 0) == 0) return cfg_.search_bias;
  return 0.0;
}

SoftmaxPolicy with_temperature(const SoftmaxPolicy& policy, double temperature) {
  SoftmaxPolicy copy = policy;
  copy.config().temperature = temperature;
  return copy;
}

double SoftmaxPolicy::action_weight(const std::string& key, const std::string& label) const {
  auto row = action_weights_.find(key);
  if (row != action_weights_.end()) {
    auto it = row->second.find(label);
    if (it != row->second.end()) return it->second;
  }
  return initial_action_weight(key, label);
}

double SoftmaxPolicy::initial_source_weight(const std::string& label) const {
  if (label.rfind("FRIEND_ANSWER", 0) == 0) return cfg_.friend_answer_bias;
  if (label == "RETRIEVAL") return cfg_.retrieval_bias;
  return 0.0;
}

double SoftmaxPolicy::source_weight(const std::string& key, const std::string& label) const {
  auto row = source_weights_.find(key);
  if (row != source_weights_.end()) {
    auto it = row->second.find(label);
    if (it != row->second.end()) return it->second;
  }
  return initial_source_weight(label);
}

void SoftmaxPolicy::set_action_weight(const std::string& key, const std::string& label,
                                      double w) {
  action_weights_[key][label] = w;
}

void SoftmaxPolicy::set_source_weight(const std::string& key, const std::string& label,
                                      double w) {
  source_weights_[key][label] = w;
}

std::vector<double> SoftmaxPolicy::softmax(std::span<const double> weights) const {
  const double t = cfg_.temperature;
  std::vector<double> probs(weights.size());
  double peak = -1e300;
  for (double w : weights) peak = std::max(peak, w / t);
  double total = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    probs[i] = std::exp(weights[i] / t - peak);
    total += probs[i];
  }
  for (auto& p : probs) p /= total;
  return probs;
}

std::vector<double> SoftmaxPolicy::action_probs(const std::string& key,
                                                std::span<const std::string> labels) const {
  std::vector<double> weights(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) weights[i] = action_weight(key, labels[i]);
  return softmax(weights);
}

std::vector<double> SoftmaxPolicy::source_probs(const std::string& key,
                                                std::span<const std::string> labels) const {
  std::vector<double> weights(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) weights[i] = source_weight(key, labels[i]);
  return softmax(weights);
}

std::vector<std::pair<ActionKind, double>> SoftmaxPolicy::action_probs(
    const AgentSpec& agent, const AgentContext& ctx) const {
  const std::string key = featurize(agent, ctx, cfg_).encode();
  std::vector<std::string> labels;
  for (const auto& kind : ctx.available_actions) labels.push_back(kind.label());
  const auto probs = action_probs(key, labels);
  std::vector<std::pair<ActionKind, double>> out;
  for (size_t i = 0; i < probs.size(); ++i) out.emplace_back(ctx.available_actions[i], probs[i]);
  return out;
}

ActionChoice SoftmaxPolicy::choose(const World& world, const AgentSpec& agent,
                                   const AgentContext& ctx, Rng& rng) const {
  assert(!ctx.available_actions.empty());
  const FeatureKey feature = featurize(agent, ctx, cfg_);
  const std::string key = feature.encode();
  std::vector<std::string> labels;
  for (const auto& kind : ctx.available_actions) labels.push_back(kind.label());
  const auto probs = action_probs(key, labels);
  const ActionKind kind = ctx.available_actions[weighted_index(rng, probs)];

  ActionChoice choice;
  choice.kind = kind;
  if (kind.type == ActionType::Ask || kind.is_tool()) {
    choice.argument = ctx.query;  // the query is passed along verbatim
    choice.source = ArgSource::Verbatim;
    return choice;
  }

  const auto sources = available_source_labels(ctx, cfg_.deanon_features);
  const auto sprobs = source_probs(feature.encode_source(), sources);
  const std::string& source = sources[weighted_index(rng, sprobs)];

  if (source == "PARAMETRIC") {
    choice.source = ArgSource::Parametric;
    choice.argument = answer_draw(world, *ctx.question, AnswerMode::Parametric, rng);
  } else if (source == "RETRIEVAL") {
    choice.source = ArgSource::Retrieval;
    choice.argument = answer_draw(
        world, *ctx.question,
        ctx.retrieval_hit() ? AnswerMode::EvidenceHit : AnswerMode::EvidenceMiss, rng);
  } else {
    // "FRIEND_ANSWER", "FRIEND_HEDGE", or the id-qualified "<tag>:<id>" form
    std::string tag = source, id;
    if (const size_t colon = source.find(':'); colon != std::string::npos) {
      tag = source.substr(0, colon);
      id = source.substr(colon + 1);
    }
    std::vector<const EvidenceItem*> pool;
    for (const auto& e : ctx.evidence) {
      if (e.tag == EvidenceTag::Retrieval) continue;
      if (tag == "FRIEND_ANSWER" && e.tag != EvidenceTag::FriendAnswer) continue;
      if (tag == "FRIEND_HEDGE" && e.tag != EvidenceTag::FriendHedge) continue;
      if (!id.empty() && e.source_id != id) continue;
      pool.push_back(&e);
    }
    assert(!pool.empty());
    const EvidenceItem* picked = pool[uniform_index(rng, pool.size())];
    choice.argument = picked->text;
    choice.source = picked->tag == EvidenceTag::FriendAnswer ? ArgSource::FriendAnswer
                                                             : ArgSource::FriendHedge;
    choice.source_id = picked->source_id;
  }
  return choice;
}

namespace {

double log_prob_of(const SoftmaxPolicy& policy, const std::string& key,
                   std::span<const std::string> labels, const std::string& target,
                   bool source_head) {
  const auto probs =
      source_head ? policy.source_probs(key, labels) : policy.action_probs(key, labels);
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == target) return std::log(std::max(probs[i], 1e-300));
  return std::log(1e-300);  // target missing from the context: hard violation
}

}  // namespace

double log_likelihood(const SoftmaxPolicy& policy, std::span<const TrainExample> examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) {
    total += log_prob_of(policy, ex.key, ex.available_actions, ex.action, false);
    if (!ex.source.empty())
      total += log_prob_of(policy, ex.source_key, ex.available_sources, ex.source, true);
  }
  return total / static_cast<double>(examples.size());
}

std::pair<double, Gradients> nll_and_grad(const SoftmaxPolicy& policy,
                                          std::span<const TrainExample> examples) {
  Gradients grads;
  if (examples.empty()) return {0.0, grads};
  const double scale = 1.0 / static_cast<double>(examples.size());
  const double t = policy.config().temperature;
  double nll = 0.0;

  const auto accumulate = [&](WeightTable& table, const std::string& key,
                              std::span<const std::string> labels,
                              const std::string& target, bool source_head) {
    const auto probs = source_head ? policy.source_probs(key, labels)
                                   : policy.action_probs(key, labels);
    for (size_t i = 0; i < labels.size(); ++i) {
      const double indicator = labels[i] == target ? 1.0 : 0.0;
      table[key][labels[i]] += scale * (probs[i] - indicator) / t;
      if (indicator > 0.0) nll -= scale * std::log(std::max(probs[i], 1e-300));
    }
  };

  for (const auto& ex : examples) {
    accumulate(grads.action, ex.key, ex.available_actions, ex.action, false);
    if (!ex.source.empty())
      accumulate(grads.source, ex.source_key, ex.available_sources, ex.source, true);
  }
  return {nll, grads};
}

TrainResult train(const SoftmaxPolicy& initial, const std::vector<TrainExample>& examples,
                  const TrainConfig& cfg) {
  if (examples.empty()) throw std::invalid_argument("train requires examples");

  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(cfg.seed, "dev-split");
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[uniform_index(rng, i)]);

  const size_t n_dev = static_cast<size_t>(cfg.dev_fraction * examples.size());
  std::vector<TrainExample> dev, train_split;
  for (size_t i = 0; i < order.size(); ++i)
    (i < n_dev ? dev : train_split).push_back(examples[order[i]]);

  TrainResult result;
  result.dev_empty = dev.empty();
  SoftmaxPolicy current = initial;
  double best_ll = dev.empty() ? 0.0 : log_likelihood(current, dev);
  result.dev_log_likelihood.push_back(best_ll);
  result.policy = current;
  result.best_step = 0;

  // keys are independent softmax fits, so steps are normalized per key:
  // a rare key trains as fast as a frequent one
  std::map<std::string, double> action_share, source_share;
  for (const auto& ex : train_split) {
    action_share[ex.key] += 1.0;
    if (!ex.source.empty()) source_share[ex.source_key] += 1.0;
  }
  const double n_train = static_cast<double>(train_split.size());

  for (int s = 1; s <= cfg.n_s; ++s) {
    auto [nll, grads] = nll_and_grad(current, train_split);
    (void)nll;
    for (const auto& [key, row] : grads.action)
      for (const auto& [label, g] : row)
        current.set_action_weight(
            key, label,
            current.action_weight(key, label) -
                cfg.learning_rate * g * n_train / action_share[key]);
    for (const auto& [key, row] : grads.source)
      for (const auto& [label, g] : row)
        current.set_source_weight(
            key, label,
            current.source_weight(key, label) -
                cfg.learning_rate * g * n_train / source_share[key]);
    if (dev.empty()) continue;
    const double ll = log_likelihood(current, dev);
    result.dev_log_likelihood.push_back(ll);
    if (ll > best_ll) {
      best_ll = ll;
      result.policy = current;
      result.best_step = s;
    }
  }
  if (dev.empty()) {
    result.policy = current;  // no dev signal: fall back to the final snapshot
    result.best_step = cfg.n_s;
  }
  return result;
}

}  // namespace csp
