#include "csp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csp/parallel.hpp"

namespace csp {

TaskReport task_metrics(std::span<const Rollout> rollouts) {
  TaskReport report;
  report.count = rollouts.size();
  report.empty = rollouts.empty();
  if (report.empty) return report;
  for (const auto& r : rollouts) {
    report.task_f1 += r.score;
    report.mean_reward += r.reward;
    report.search_rate += r.effort >= 1 ? 1.0 : 0.0;
    report.hedge_rate +=
        !r.turns.empty() && r.turns.back().action.type == ActionType::Hedge ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(rollouts.size());
  report.task_f1 /= n;
  report.mean_reward /= n;
  report.search_rate /= n;
  report.hedge_rate /= n;
  return report;
}

std::vector<double> default_fractions() {
  std::vector<double> fractions;
  for (int i = 0; i <= 20; ++i) fractions.push_back(i * 0.05);
  return fractions;
}

ForcedModeScores forced_mode_scores(const World& world,
                                    std::span<const Question* const> questions,
                                    const std::string& corpus_id, uint64_t seed,
                                    int n_draws, int threads) {
  ForcedModeScores scores;
  scores.parametric.resize(questions.size());
  scores.search.resize(questions.size());
  parallel_for(questions.size(), threads, [&](size_t i) {
    const Question& q = *questions[i];
    Rng param_rng = make_rng(seed, "param-draw", hash_str(q.id));
    Rng search_rng = make_rng(seed, "search-draw", hash_str(q.id));
    double param = 0.0, search = 0.0;
    for (int d = 0; d < n_draws; ++d) {
      param += token_f1(answer_draw(world, q, AnswerMode::Parametric, param_rng),
                        q.gold_answer);
      const bool hit = bernoulli(search_rng, q.hit(corpus_id));
      search += token_f1(
          answer_draw(world, q, hit ? AnswerMode::EvidenceHit : AnswerMode::EvidenceMiss,
                      search_rng),
          q.gold_answer);
    }
    scores.parametric[i] = param / n_draws;
    scores.search[i] = search / n_draws;
  });
  return scores;
}

namespace {

AgentContext first_turn_context(const Question& q, bool include_search) {
  AgentContext ctx;
  ctx.question = &q;
  ctx.query = q.text;
  ctx.available_actions = {ActionKind::answer(), ActionKind::hedge()};
  if (include_search) ctx.available_actions.push_back(search_action());
  return ctx;
}

// indices ordered by score descending, question id ascending on ties
std::vector<size_t> ranking(std::span<const double> scores,
                            std::span<const Question* const> questions) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return questions[a]->id < questions[b]->id;
  });
  return order;
}

size_t top_k(double fraction, size_t n) {
  const auto k = static_cast<long>(std::lround(fraction * static_cast<double>(n)));
  return static_cast<size_t>(std::clamp<long>(k, 0, static_cast<long>(n)));
}

}  // namespace

std::vector<double> policy_search_scores(const SoftmaxPolicy& policy,
                                         const AgentSpec& agent,
                                         std::span<const Question* const> questions) {
  std::vector<double> scores(questions.size());
  for (size_t i = 0; i < questions.size(); ++i) {
    const AgentContext ctx = first_turn_context(*questions[i], true);
    for (const auto& [kind, p] : policy.action_probs(agent, ctx))
      if (kind.is_tool()) scores[i] += p;
  }
  return scores;
}

std::vector<double> policy_answer_scores(const SoftmaxPolicy& policy,
                                         const AgentSpec& agent,
                                         std::span<const Question* const> questions) {
  std::vector<double> scores(questions.size());
  for (size_t i = 0; i < questions.size(); ++i) {
    const AgentContext ctx = first_turn_context(*questions[i], false);
    double p_answer = 0.0, p_hedge = 0.0;
    for (const auto& [kind, p] : policy.action_probs(agent, ctx)) {
      if (kind.type == ActionType::Answer) p_answer = p;
      if (kind.type == ActionType::Hedge) p_hedge = p;
    }
    scores[i] = p_answer / (p_answer + p_hedge);
  }
  return scores;
}

std::vector<double> oracle_search_scores(const World& world,
                                         std::span<const Question* const> questions,
                                         const std::string& corpus_id) {
  std::vector<double> scores(questions.size());
  for (size_t i = 0; i < questions.size(); ++i)
    scores[i] = implied_alpha(world, *questions[i], corpus_id) - questions[i]->beta;
  return scores;
}

std::vector<double> oracle_answer_scores(std::span<const Question* const> questions) {
  std::vector<double> scores(questions.size());
  for (size_t i = 0; i < questions.size(); ++i) scores[i] = questions[i]->beta;
  return scores;
}

CalibrationCurve search_curve_from_scores(std::span<const double> scores,
                                          const ForcedModeScores& modes,
                                          std::span<const Question* const> questions,
                                          std::span<const double> fractions) {
  const auto order = ranking(scores, questions);
  const size_t n = order.size();
  CalibrationCurve curve;
  for (double f : fractions) {
    const size_t k = top_k(f, n);
    double total = 0.0;
    for (size_t pos = 0; pos < n; ++pos)
      total += pos < k ? modes.search[order[pos]] : modes.parametric[order[pos]];
    curve.fractions.push_back(f);
    curve.mean_f1.push_back(n == 0 ? 0.0 : total / static_cast<double>(n));
  }
  return curve;
}

CalibrationCurve answer_curve_from_scores(std::span<const double> scores,
                                          std::span<const double> parametric_f1,
                                          std::span<const Question* const> questions,
                                          std::span<const double> fractions) {
  const auto order = ranking(scores, questions);
  const size_t n = order.size();
  CalibrationCurve curve;
  for (double f : fractions) {
    const size_t k = top_k(f, n);
    if (k == 0) continue;
    double total = 0.0;
    for (size_t pos = 0; pos < k; ++pos) total += parametric_f1[order[pos]];
    curve.fractions.push_back(f);
    curve.mean_f1.push_back(total / static_cast<double>(k));
  }
  return curve;
}

namespace {

std::string agent_corpus(const AgentSpec& agent) {
  return agent.tools.empty() ? std::string{} : agent.tools.front().corpus_id;
}

}  // namespace

CalibrationCurve search_calibration_curve(const SoftmaxPolicy& policy,
                                          const AgentSpec& agent,
                                          std::span<const Question* const> questions,
                                          const World& world,
                                          std::span<const double> fractions,
                                          uint64_t seed, int n_draws) {
  const auto modes = forced_mode_scores(world, questions, agent_corpus(agent), seed, n_draws);
  return search_curve_from_scores(policy_search_scores(policy, agent, questions), modes,
                                  questions, fractions);
}

CalibrationCurve answer_calibration_curve(const SoftmaxPolicy& policy,
                                          const AgentSpec& agent,
                                          std::span<const Question* const> questions,
                                          const World& world,
                                          std::span<const double> fractions,
                                          uint64_t seed, int n_draws) {
  const auto modes = forced_mode_scores(world, questions, agent_corpus(agent), seed, n_draws);
  return answer_curve_from_scores(policy_answer_scores(policy, agent, questions),
                                  modes.parametric, questions, fractions);
}

CalibrationCurve shuffled_baseline(const AgentSpec& agent,
                                   std::span<const Question* const> questions,
                                   const World& world, std::span<const double> fractions,
                                   uint64_t seed, int n_draws) {
  const auto modes = forced_mode_scores(world, questions, agent_corpus(agent), seed, n_draws);
  std::vector<size_t> perm(questions.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_rng(seed, "shuffle");
  for (size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  std::vector<double> scores(questions.size());
  for (size_t pos = 0; pos < perm.size(); ++pos)
    scores[perm[pos]] = static_cast<double>(perm.size() - pos);
  return search_curve_from_scores(scores, modes, questions, fractions);
}

double shuffled_sigma(const ForcedModeScores& modes, size_t k) {
  // curve(f) - line(f) = (1/N) * sum_{i in top set} (d_i - mean d), with the
  // top set a simple random sample of size k; d_i = search_i - parametric_i
  const size_t n = modes.parametric.size();
  if (n < 2 || k == 0 || k >= n) return 0.0;
  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = modes.search[i] - modes.parametric[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  // Var(sum over the sample) = k (N - k) / (N - 1) * population variance
  const double var_sum = kd * (nd - kd) / (nd - 1.0) * (ss / nd);
  return std::sqrt(std::max(0.0, var_sum)) / nd;
}

}  // namespace csp
