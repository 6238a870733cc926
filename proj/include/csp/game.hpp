#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csp {

// The information-provision game: each player either searches-then-answers
// (S, correct with probability alpha_i, cost delta) or guesses-then-hedges
// (G, correct with probability beta). The asker relays a searcher's answer
// when one exists, so everyone scores the searchers' mean accuracy, or beta
// when nobody searched.

enum class Strategy : uint8_t { Search, Guess };

using StrategyProfile = std::vector<Strategy>;

std::string profile_label(const StrategyProfile&);  // e.g. "SG"

struct TwoPlayerGame {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta = 0.0;
  double delta = 0.01;  // must be > 0
};

struct NPlayerGame {
  std::vector<double> alphas;
  double beta = 0.0;
  double delta = 0.01;
};

NPlayerGame as_nplayer(const TwoPlayerGame&);
std::vector<std::string> validate_game(const NPlayerGame&);

// Expected reward per player: searchers' mean alpha (beta when none search),
// minus delta for each searcher.
std::vector<double> payoffs(const NPlayerGame&, const StrategyProfile&);
std::array<double, 2> payoffs(const TwoPlayerGame&, Strategy z1, Strategy z2);

struct EquilibriumInfo {
  StrategyProfile profile;
  bool weak_tie = false;  // some unilateral deviation pays exactly the same
};

// Brute force over all 2^n profiles; a profile stays when no player strictly
// gains from a unilateral flip. Exact payoff ties are retained and reported
// so boundary parameterizations stay visible.
std::vector<EquilibriumInfo> pure_equilibria(const NPlayerGame&);

enum class EquilibriumClass { UniqueSG, UniqueGS, UniqueGG, BothSGGS, Boundary };

std::string equilibrium_class_label(EquilibriumClass);

// Maps a two-player brute-force equilibrium set onto the class taxonomy;
// anything unexpected (or any payoff tie) lands on Boundary.
EquilibriumClass classify_equilibria(const std::vector<EquilibriumInfo>&);

// Closed-form prediction. Returns Boundary whenever a non-degeneracy
// assumption fails within tolerance: alpha_i = beta + delta, alpha1 = alpha2,
// or |alpha1 - alpha2| = 2 delta.
EquilibriumClass theorem1_predict(const TwoPlayerGame&, double boundary_eps = 1e-9);

// n-player closed form. A profile when one premise applies (dominant searcher
// or all-guess), nothing when the theorem is silent.
std::optional<StrategyProfile> theorem2_predict(const NPlayerGame&);

struct SweepPoint {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  EquilibriumClass cls = EquilibriumClass::Boundary;
};

// Brute-force classification over the alpha grid at fixed (beta, delta).
std::vector<SweepPoint> region_sweep(std::span<const double> alpha1_grid,
                                     std::span<const double> alpha2_grid, double beta,
                                     double delta, int threads = 0);

// n values offset half a step from the usual boundary lines: offset + k * step
std::vector<double> offset_grid(int n, double step = 0.01, double offset = 0.005);

}  // namespace csp
