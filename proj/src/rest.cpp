#include "csp/rest.hpp"

#include <algorithm>
#include <cassert>
#include <mutex>
#include <numeric>

#include "csp/parallel.hpp"

namespace csp {

ActionSequence action_sequence(const Rollout& rollout) {
  ActionSequence seq;
  seq.reserve(rollout.turns.size());
  for (const auto& turn : rollout.turns) seq.push_back(turn.action);
  return seq;
}

std::vector<GroupStats> partition_by_action_sequence(std::span<const Rollout> rollouts) {
  std::map<ActionSequence, GroupStats> groups;
  for (size_t i = 0; i < rollouts.size(); ++i) {
    const ActionSequence seq = action_sequence(rollouts[i]);
    auto [it, inserted] = groups.try_emplace(seq);
    GroupStats& g = it->second;
    if (inserted) {
      g.sequence = seq;
      g.best_member = i;
    } else if (rollouts[i].reward > rollouts[g.best_member].reward) {
      g.best_member = i;  // strict: ties keep the lowest index
    }
    g.members.push_back(i);
    g.mean_reward += rollouts[i].reward;
  }
  std::vector<GroupStats> out;
  out.reserve(groups.size());
  for (auto& [seq, g] : groups) {
    g.mean_reward /= static_cast<double>(g.members.size());
    out.push_back(std::move(g));
  }
  return out;
}

std::optional<size_t> select_training_rollout(std::span<const GroupStats> groups,
                                              double tau) {
  if (groups.empty()) return std::nullopt;
  const GroupStats* best = &groups.front();
  for (const auto& g : groups) {
    if (g.mean_reward > best->mean_reward) {
      best = &g;
    } else if (g.mean_reward == best->mean_reward) {
      if (g.sequence.size() < best->sequence.size() ||
          (g.sequence.size() == best->sequence.size() && g.sequence < best->sequence))
        best = &g;
    }
  }
  if (!(best->mean_reward > tau)) return std::nullopt;
  return best->best_member;
}

std::vector<TrainExample> rollout_to_examples(const Rollout& rollout,
                                              const Society& society,
                                              const PolicyConfig& cfg) {
  std::vector<TrainExample> examples;
  examples.reserve(rollout.turns.size());
  for (const auto& turn : rollout.turns) {
    const AgentSpec* agent = society.find_agent(turn.agent_id);
    assert(agent != nullptr);
    TrainExample ex;
    const FeatureKey feature = featurize(*agent, turn.context, cfg);
    ex.key = feature.encode();
    ex.source_key = feature.encode_source();
    for (const auto& kind : turn.context.available_actions)
      ex.available_actions.push_back(kind.label());
    ex.action = turn.action.label();
    if (turn.action.relinquishes() && turn.source != ArgSource::Verbatim) {
      ex.available_sources = available_source_labels(turn.context, cfg.deanon_features);
      if (cfg.deanon_features &&
          (turn.source == ArgSource::FriendAnswer || turn.source == ArgSource::FriendHedge))
        ex.source = arg_source_label(turn.source) + ":" + turn.source_id;
      else
        ex.source = arg_source_label(turn.source);
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

namespace {

std::vector<const AgentSpec*> tool_agents(const Society& society) {
  std::vector<const AgentSpec*> out;
  for (const auto& a : society.agents)
    if (!a.tools.empty()) out.push_back(&a);
  return out;
}

std::vector<const Question*> epoch_queries(const World& world, const RestConfig& cfg,
                                           int epoch) {
  std::vector<const Question*> train = world.split_questions(Split::Train);
  Rng rng = make_rng(cfg.seed, "epoch-queries", static_cast<uint64_t>(epoch));
  for (size_t i = train.size(); i > 1; --i)
    std::swap(train[i - 1], train[uniform_index(rng, i)]);
  if (cfg.queries_per_epoch > 0 &&
      static_cast<size_t>(cfg.queries_per_epoch) < train.size())
    train.resize(static_cast<size_t>(cfg.queries_per_epoch));
  return train;
}

// one epoch of rollout generation + selection; returns the pooled examples
std::vector<TrainExample> collect_examples(
    const World& world, const Society& society, const SoftmaxPolicy& policy,
    const RestConfig& cfg, const OrchestratorConfig& orch, const RewardConfig& reward_cfg,
    int epoch, bool no_communication) {
  const auto queries = epoch_queries(world, cfg, epoch);
  const auto agents = tool_agents(society);

  struct QueryBatch {
    std::vector<Rollout> rollouts;  // n_r rollouts (per agent when no_communication)
  };
  std::vector<QueryBatch> batches(queries.size());

  parallel_for(queries.size(), cfg.threads, [&](size_t qi) {
    const Question& q = *queries[qi];
    auto& batch = batches[qi];
    if (!no_communication) {
      batch.rollouts.reserve(cfg.n_r);
      for (int j = 0; j < cfg.n_r; ++j)
        batch.rollouts.push_back(run_rollout(
            society, policy, world, q, orch, reward_cfg,
            derive_seed(cfg.seed, "rollout", static_cast<uint64_t>(epoch),
                        hash_str(q.id), static_cast<uint64_t>(j))));
    } else {
      for (const AgentSpec* agent : agents) {
        const Society solo = single_agent_society(*agent);
        OrchestratorConfig solo_cfg = orch;
        solo_cfg.initial_agent = agent->agent_id;
        for (int j = 0; j < cfg.n_r; ++j)
          batch.rollouts.push_back(run_rollout(
              solo, policy, world, q, solo_cfg, reward_cfg,
              derive_seed(cfg.seed, "solo-rollout", static_cast<uint64_t>(epoch),
                          hash_str(q.id + "/" + agent->agent_id),
                          static_cast<uint64_t>(j))));
      }
    }
  });

  std::vector<TrainExample> dataset;
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& rollouts = batches[qi].rollouts;
    if (!no_communication) {
      const auto groups = partition_by_action_sequence(rollouts);
      const auto picked = select_training_rollout(groups, cfg.tau);
      if (picked) {
        auto examples = rollout_to_examples(rollouts[*picked], society, policy.config());
        dataset.insert(dataset.end(), examples.begin(), examples.end());
      }
    } else {
      // per agent: n_r consecutive rollouts each
      for (size_t a = 0; a < agents.size(); ++a) {
        const std::span<const Rollout> slice(rollouts.data() + a * cfg.n_r,
                                             static_cast<size_t>(cfg.n_r));
        auto examples = action_supervision_labels(slice, society, policy.config());
        dataset.insert(dataset.end(), examples.begin(), examples.end());
      }
    }
  }
  return dataset;
}

RestResult train_loop(const World& world, const Society& society,
                      const SoftmaxPolicy& initial, const RestConfig& cfg,
                      const OrchestratorConfig& orch, const RewardConfig& reward_cfg,
                      bool no_communication) {
  const auto eval_qs = world.split_questions(Split::Eval);
  RestResult result;
  result.policy = initial;

  EpochReport report0 =
      single_agent_report(world, society, result.policy, eval_qs, cfg, orch, reward_cfg);
  report0.epoch = 0;
  result.epochs.push_back(report0);

  for (int t = 1; t <= cfg.epochs; ++t) {
    auto dataset = collect_examples(world, society, result.policy, cfg, orch, reward_cfg,
                                    t, no_communication);
    EpochReport report;
    report.epoch = t;
    report.dataset_size = dataset.size();
    if (dataset.empty()) {
      report.skipped = true;  // keep the previous policy
    } else {
      TrainConfig train_cfg;
      train_cfg.n_s = cfg.n_s;
      train_cfg.learning_rate = cfg.learning_rate;
      train_cfg.dev_fraction = cfg.dev_fraction;
      train_cfg.seed = derive_seed(cfg.seed, "train", static_cast<uint64_t>(t));
      result.policy = train(result.policy, dataset, train_cfg).policy;
    }
    const EpochReport metrics = single_agent_report(world, society, result.policy,
                                                    eval_qs, cfg, orch, reward_cfg);
    report.task_f1 = metrics.task_f1;
    report.search_rate = metrics.search_rate;
    report.hedge_rate = metrics.hedge_rate;
    report.mean_reward = metrics.mean_reward;
    result.epochs.push_back(report);
  }
  return result;
}

}  // namespace

EpochReport single_agent_report(const World& world, const Society& society,
                                const SoftmaxPolicy& policy,
                                std::span<const Question* const> questions,
                                const RestConfig& cfg, const OrchestratorConfig& orch,
                                const RewardConfig& reward_cfg) {
  const auto agents = tool_agents(society);
  EpochReport report;
  if (agents.empty() || questions.empty()) return report;

  struct Slot {
    double f1 = 0, reward = 0, searches = 0, hedges = 0;
    int n = 0;
  };
  std::vector<Slot> slots(agents.size() * questions.size());
  const SoftmaxPolicy deployed = with_temperature(policy, cfg.eval_temperature);

  parallel_for(slots.size(), cfg.threads, [&](size_t idx) {
    const AgentSpec& agent = *agents[idx / questions.size()];
    const Question& q = *questions[idx % questions.size()];
    const Society solo = single_agent_society(agent);
    OrchestratorConfig solo_cfg = orch;
    solo_cfg.initial_agent = agent.agent_id;
    Slot& slot = slots[idx];
    for (int s = 0; s < cfg.eval_samples; ++s) {
      const Rollout r = run_rollout(
          solo, deployed, world, q, solo_cfg, reward_cfg,
          derive_seed(cfg.seed, "single-agent-eval",
                      hash_str(agent.agent_id + "/" + q.id), static_cast<uint64_t>(s)));
      slot.f1 += r.score;
      slot.reward += r.reward;
      slot.searches += r.effort >= 1 ? 1.0 : 0.0;
      slot.hedges += !r.turns.empty() &&
                             r.turns.back().action.type == ActionType::Hedge
                         ? 1.0
                         : 0.0;
      ++slot.n;
    }
  });

  double f1 = 0, reward_sum = 0, searches = 0, hedges = 0;
  int n = 0;
  for (const auto& slot : slots) {
    f1 += slot.f1;
    reward_sum += slot.reward;
    searches += slot.searches;
    hedges += slot.hedges;
    n += slot.n;
  }
  if (n > 0) {
    report.task_f1 = f1 / n;
    report.mean_reward = reward_sum / n;
    report.search_rate = searches / n;
    report.hedge_rate = hedges / n;
  }
  return report;
}

RestResult rest_train(const World& world, const Society& society,
                      const SoftmaxPolicy& initial, const RestConfig& cfg,
                      const OrchestratorConfig& orch, const RewardConfig& reward_cfg) {
  return train_loop(world, society, initial, cfg, orch, reward_cfg, false);
}

RestResult action_supervision_train(const World& world, const Society& society,
                                    const SoftmaxPolicy& initial, const RestConfig& cfg,
                                    const OrchestratorConfig& orch,
                                    const RewardConfig& reward_cfg) {
  return train_loop(world, society, initial, cfg, orch, reward_cfg, true);
}

std::vector<TrainExample> action_supervision_labels(std::span<const Rollout> rollouts,
                                                    const Society& society,
                                                    const PolicyConfig& cfg) {
  const Rollout* best_answer = nullptr;
  const Rollout* best_hedge = nullptr;
  for (const auto& r : rollouts) {
    if (!r.terminal || r.turns.empty()) continue;
    const ActionType last = r.turns.back().action.type;
    if (last == ActionType::Answer &&
        (best_answer == nullptr || r.reward > best_answer->reward))
      best_answer = &r;
    if (last == ActionType::Hedge &&
        (best_hedge == nullptr || r.reward > best_hedge->reward))
      best_hedge = &r;
  }
  if (best_answer != nullptr && best_answer->score > 0.5)
    return rollout_to_examples(*best_answer, society, cfg);
  if (best_hedge != nullptr && best_hedge->score < 0.5) {
    auto examples = rollout_to_examples(*best_hedge, society, cfg);
    if (!examples.empty()) {
      examples.back().source.clear();  // train the hedge action, not the answer
      examples.back().available_sources.clear();
    }
    return examples;
  }
  return {};
}

}  // namespace csp
