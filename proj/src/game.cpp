#include "csp/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csp/parallel.hpp"

namespace csp {

std::string profile_label(const StrategyProfile& profile) {
  std::string out;
  for (Strategy z : profile) out += z == Strategy::Search ? 'S' : 'G';
  return out;
}

NPlayerGame as_nplayer(const TwoPlayerGame& g) {
  return NPlayerGame{{g.alpha1, g.alpha2}, g.beta, g.delta};
}

std::vector<std::string> validate_game(const NPlayerGame& g) {
  std::vector<std::string> violations;
  if (g.alphas.size() < 2) violations.push_back("fewer than two players");
  if (!(g.delta > 0.0)) violations.push_back("delta must be positive");
  for (double a : g.alphas)
    if (a < 0.0 || a > 1.0) violations.push_back("alpha outside [0, 1]");
  if (g.beta < 0.0 || g.beta > 1.0) violations.push_back("beta outside [0, 1]");
  return violations;
}

std::vector<double> payoffs(const NPlayerGame& g, const StrategyProfile& profile) {
  if (profile.size() != g.alphas.size())
    throw std::invalid_argument("profile size does not match player count");
  int searchers = 0;
  double alpha_sum = 0.0;
  for (size_t i = 0; i < profile.size(); ++i) {
    if (profile[i] == Strategy::Search) {
      ++searchers;
      alpha_sum += g.alphas[i];
    }
  }
  const double abar = searchers > 0 ? alpha_sum / searchers : g.beta;
  std::vector<double> rewards(profile.size());
  for (size_t i = 0; i < profile.size(); ++i)
    rewards[i] = profile[i] == Strategy::Search ? abar - g.delta : abar;
  return rewards;
}

std::array<double, 2> payoffs(const TwoPlayerGame& g, Strategy z1, Strategy z2) {
  const auto r = payoffs(as_nplayer(g), {z1, z2});
  return {r[0], r[1]};
}

std::vector<EquilibriumInfo> pure_equilibria(const NPlayerGame& g) {
  const size_t n = g.alphas.size();
  if (n < 2 || n > 20) throw std::invalid_argument("pure_equilibria supports 2..20 players");

  std::vector<EquilibriumInfo> out;
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    StrategyProfile profile(n);
    for (size_t i = 0; i < n; ++i)
      profile[i] = (mask >> i) & 1u ? Strategy::Search : Strategy::Guess;
    const auto base = payoffs(g, profile);

    bool equilibrium = true;
    bool tie = false;
    for (size_t i = 0; i < n && equilibrium; ++i) {
      StrategyProfile flipped = profile;
      flipped[i] = flipped[i] == Strategy::Search ? Strategy::Guess : Strategy::Search;
      const double deviation = payoffs(g, flipped)[i];
      if (deviation > base[i]) equilibrium = false;
      if (deviation == base[i]) tie = true;
    }
    if (equilibrium) out.push_back({std::move(profile), tie});
  }
  return out;
}

std::string equilibrium_class_label(EquilibriumClass cls) {
  switch (cls) {
    case EquilibriumClass::UniqueSG: return "SG";
    case EquilibriumClass::UniqueGS: return "GS";
    case EquilibriumClass::UniqueGG: return "GG";
    case EquilibriumClass::BothSGGS: return "SG+GS";
    case EquilibriumClass::Boundary: return "BOUNDARY";
  }
  return "BOUNDARY";
}

EquilibriumClass classify_equilibria(const std::vector<EquilibriumInfo>& eqs) {
  for (const auto& e : eqs)
    if (e.weak_tie || e.profile.size() != 2) return EquilibriumClass::Boundary;

  const auto contains = [&](Strategy z1, Strategy z2) {
    for (const auto& e : eqs)
      if (e.profile[0] == z1 && e.profile[1] == z2) return true;
    return false;
  };
  const bool sg = contains(Strategy::Search, Strategy::Guess);
  const bool gs = contains(Strategy::Guess, Strategy::Search);
  const bool gg = contains(Strategy::Guess, Strategy::Guess);

  if (eqs.size() == 1 && sg) return EquilibriumClass::UniqueSG;
  if (eqs.size() == 1 && gs) return EquilibriumClass::UniqueGS;
  if (eqs.size() == 1 && gg) return EquilibriumClass::UniqueGG;
  if (eqs.size() == 2 && sg && gs) return EquilibriumClass::BothSGGS;
  return EquilibriumClass::Boundary;
}

EquilibriumClass theorem1_predict(const TwoPlayerGame& g, double boundary_eps) {
  const double a1 = g.alpha1, a2 = g.alpha2, line = g.beta + g.delta;
  if (std::abs(a1 - a2) <= boundary_eps) return EquilibriumClass::Boundary;
  if (std::abs(a1 - line) <= boundary_eps || std::abs(a2 - line) <= boundary_eps)
    return EquilibriumClass::Boundary;
  if (std::abs(std::abs(a1 - a2) - 2.0 * g.delta) <= boundary_eps)
    return EquilibriumClass::Boundary;

  const bool first_high = a1 > a2;
  const double hi = first_high ? a1 : a2;
  const double lo = first_high ? a2 : a1;
  const bool unique = hi > lo + 2.0 * g.delta || lo < line;
  if (!unique) return EquilibriumClass::BothSGGS;
  if (hi > line)
    return first_high ? EquilibriumClass::UniqueSG : EquilibriumClass::UniqueGS;
  return EquilibriumClass::UniqueGG;
}

std::optional<StrategyProfile> theorem2_predict(const NPlayerGame& g) {
  const size_t n = g.alphas.size();
  const double line = g.beta + g.delta;

  size_t top = 0;
  for (size_t i = 1; i < n; ++i)
    if (g.alphas[i] > g.alphas[top]) top = i;
  double second = -1.0;
  for (size_t i = 0; i < n; ++i)
    if (i != top) second = std::max(second, g.alphas[i]);

  if (g.alphas[top] > second + static_cast<double>(n) * g.delta && g.alphas[top] > line) {
    StrategyProfile profile(n, Strategy::Guess);
    profile[top] = Strategy::Search;
    return profile;
  }
  bool all_below = true;
  for (double a : g.alphas) all_below = all_below && a < line;
  if (all_below) return StrategyProfile(n, Strategy::Guess);
  return std::nullopt;
}

std::vector<SweepPoint> region_sweep(std::span<const double> alpha1_grid,
                                     std::span<const double> alpha2_grid, double beta,
                                     double delta, int threads) {
  std::vector<SweepPoint> points(alpha1_grid.size() * alpha2_grid.size());
  parallel_for(points.size(), threads, [&](size_t idx) {
    const double a1 = alpha1_grid[idx / alpha2_grid.size()];
    const double a2 = alpha2_grid[idx % alpha2_grid.size()];
    const NPlayerGame g{{a1, a2}, beta, delta};
    points[idx] = {a1, a2, classify_equilibria(pure_equilibria(g))};
  });
  return points;
}

std::vector<double> offset_grid(int n, double step, double offset) {
  std::vector<double> grid(static_cast<size_t>(std::max(0, n)));
  for (int k = 0; k < n; ++k) grid[static_cast<size_t>(k)] = offset + k * step;
  return grid;
}

}  // namespace csp
