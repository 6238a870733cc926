#pragma once

#include <span>
#include <string>
#include <vector>

#include "csp/policy.hpp"

namespace csp {

struct TaskReport {
  double task_f1 = 0.0;
  double search_rate = 0.0;  // fraction of rollouts with effort >= 1
  double hedge_rate = 0.0;   // fraction terminated by HEDGE
  double mean_reward = 0.0;
  size_t count = 0;
  bool empty = true;
};

TaskReport task_metrics(std::span<const Rollout>);

struct CalibrationCurve {
  std::vector<double> fractions;  // strictly increasing
  std::vector<double> mean_f1;
};

std::vector<double> default_fractions();  // 0.00 .. 1.00 step 0.05

// Per-question mean F1 under the two forced modes, n_draws each. Streams are
// keyed by (seed, question id, mode) so every ranking method sees identical
// draws and curves differ only through the ranking.
struct ForcedModeScores {
  std::vector<double> parametric;
  std::vector<double> search;
};

ForcedModeScores forced_mode_scores(const World&, std::span<const Question* const>,
                                    const std::string& corpus_id, uint64_t seed,
                                    int n_draws, int threads = 0);

// P(SEARCH) at the first turn of single-agent deployment (no evidence).
std::vector<double> policy_search_scores(const SoftmaxPolicy&, const AgentSpec&,
                                         std::span<const Question* const>);
// P(ANSWER) / (P(ANSWER) + P(HEDGE)) with SEARCH and ASK removed.
std::vector<double> policy_answer_scores(const SoftmaxPolicy&, const AgentSpec&,
                                         std::span<const Question* const>);
// True usefulness gap of retrieval: alpha_tool(x) - beta(x).
std::vector<double> oracle_search_scores(const World&, std::span<const Question* const>,
                                         const std::string& corpus_id);
// True parametric correctness beta(x).
std::vector<double> oracle_answer_scores(std::span<const Question* const>);

// Questions are ranked by score (descending, ties by id); the top round(f*N)
// get forced search-then-answer, the rest answer parametrically.
CalibrationCurve search_curve_from_scores(std::span<const double> scores,
                                          const ForcedModeScores&,
                                          std::span<const Question* const>,
                                          std::span<const double> fractions);

// Mean parametric F1 over the top round(f*N) questions; fractions whose top
// set is empty are dropped (the f = 0 point is undefined here).
CalibrationCurve answer_curve_from_scores(std::span<const double> scores,
                                          std::span<const double> parametric_f1,
                                          std::span<const Question* const>,
                                          std::span<const double> fractions);

CalibrationCurve search_calibration_curve(const SoftmaxPolicy&, const AgentSpec&,
                                          std::span<const Question* const>, const World&,
                                          std::span<const double> fractions,
                                          uint64_t seed, int n_draws);

CalibrationCurve answer_calibration_curve(const SoftmaxPolicy&, const AgentSpec&,
                                          std::span<const Question* const>, const World&,
                                          std::span<const double> fractions,
                                          uint64_t seed, int n_draws);

// Random ranking, otherwise identical to search_calibration_curve; under
// matched seeds its endpoints equal the calibrated curve's exactly.
CalibrationCurve shuffled_baseline(const AgentSpec&, std::span<const Question* const>,
                                   const World&, std::span<const double> fractions,
                                   uint64_t seed, int n_draws);

// Standard deviation of the shuffled curve value at fraction f under simple
// random sampling of the top set, given the per-question mode scores. Used to
// build the binomial-style confidence band around the linear-mix oracle.
double shuffled_sigma(const ForcedModeScores&, size_t top_k);

}  // namespace csp
