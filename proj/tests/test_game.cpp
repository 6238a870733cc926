#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "csp/game.hpp"
#include "csp/rng.hpp"

using namespace csp;

namespace {

std::set<std::string> profile_set(const std::vector<EquilibriumInfo>& eqs) {
  std::set<std::string> out;
  for (const auto& e : eqs) out.insert(profile_label(e.profile));
  return out;
}

const Strategy S = Strategy::Search;
const Strategy G = Strategy::Guess;

}  // namespace

TEST_CASE("payoff cells for (0.7, 0.4, 0.2, 0.1)") {
  const TwoPlayerGame g{0.7, 0.4, 0.2, 0.1};
  const auto sg = payoffs(g, S, G);
  CHECK(sg[0] == doctest::Approx(0.6));
  CHECK(sg[1] == doctest::Approx(0.7));
  const auto gg = payoffs(g, G, G);
  CHECK(gg[0] == doctest::Approx(0.2));
  CHECK(gg[1] == doctest::Approx(0.2));
  const auto ss = payoffs(g, S, S);
  CHECK(ss[0] == doctest::Approx(0.45));
  CHECK(ss[1] == doctest::Approx(0.45));
  const auto gs = payoffs(g, G, S);
  CHECK(gs[0] == doctest::Approx(0.4));
  CHECK(gs[1] == doctest::Approx(0.3));
}

TEST_CASE("payoffs reproduce the four closed-form cells exactly") {
  Rng rng(101);
  for (int trial = 0; trial < 10000; ++trial) {
    const TwoPlayerGame g{uniform01(rng), uniform01(rng), uniform01(rng),
                          0.001 + 0.3 * uniform01(rng)};
    const double abar = (g.alpha1 + g.alpha2) / 2;
    const auto ss = payoffs(g, S, S);
    CHECK(ss[0] == abar - g.delta);  // same arithmetic, no tolerance
    CHECK(ss[1] == abar - g.delta);
    const auto sg = payoffs(g, S, G);
    CHECK(sg[0] == g.alpha1 - g.delta);
    CHECK(sg[1] == g.alpha1);
    const auto gs = payoffs(g, G, S);
    CHECK(gs[0] == g.alpha2);
    CHECK(gs[1] == g.alpha2 - g.delta);
    const auto gg = payoffs(g, G, G);
    CHECK(gg[0] == g.beta);
    CHECK(gg[1] == g.beta);
  }
}

TEST_CASE("n-player payoffs: searchers' mean minus delta, beta when none") {
  const NPlayerGame g{{0.9, 0.5, 0.1}, 0.3, 0.05};
  const auto r = payoffs(g, {S, G, S});
  CHECK(r[0] == doctest::Approx(0.45));  // (0.9 + 0.1) / 2 - 0.05
  CHECK(r[1] == doctest::Approx(0.5));
  CHECK(r[2] == doctest::Approx(0.45));
  const auto all_guess = payoffs(g, {G, G, G});
  for (double v : all_guess) CHECK(v == doctest::Approx(0.3));
}

TEST_CASE("brute-force equilibria on the worked examples") {
  CHECK(profile_set(pure_equilibria(as_nplayer({0.7, 0.4, 0.2, 0.1}))) ==
        std::set<std::string>{"SG"});
  CHECK(profile_set(pure_equilibria(as_nplayer({0.8, 0.75, 0.2, 0.1}))) ==
        std::set<std::string>{"SG", "GS"});
  CHECK(profile_set(pure_equilibria(as_nplayer({0.25, 0.22, 0.3, 0.05}))) ==
        std::set<std::string>{"GG"});
}

TEST_CASE("theorem 1 on the worked examples") {
  CHECK(theorem1_predict({0.7, 0.4, 0.2, 0.1}) == EquilibriumClass::UniqueSG);
  CHECK(theorem1_predict({0.4, 0.7, 0.2, 0.1}) == EquilibriumClass::UniqueGS);
  CHECK(theorem1_predict({0.8, 0.75, 0.2, 0.1}) == EquilibriumClass::BothSGGS);
  CHECK(theorem1_predict({0.25, 0.22, 0.3, 0.05}) == EquilibriumClass::UniqueGG);
  // alpha2 exactly on the beta + delta line -> excluded assumption
  CHECK(theorem1_predict({0.4, 0.25, 0.2, 0.05}) == EquilibriumClass::Boundary);
  CHECK(theorem1_predict({0.5, 0.5, 0.2, 0.05}) == EquilibriumClass::Boundary);
}

TEST_CASE("theorem 1 matches brute force away from boundaries") {
  Rng rng(7);
  int checked = 0;
  while (checked < 4000) {
    const TwoPlayerGame g{uniform01(rng), uniform01(rng), uniform01(rng),
                          0.001 + 0.25 * uniform01(rng)};
    const EquilibriumClass predicted = theorem1_predict(g);
    if (predicted == EquilibriumClass::Boundary) continue;
    const EquilibriumClass brute = classify_equilibria(pure_equilibria(as_nplayer(g)));
    CHECK(brute == predicted);
    ++checked;
  }
}

TEST_CASE("swapping players swaps SG and GS everywhere") {
  Rng rng(13);
  for (int trial = 0; trial < 2000; ++trial) {
    const TwoPlayerGame g{uniform01(rng), uniform01(rng), uniform01(rng),
                          0.001 + 0.25 * uniform01(rng)};
    const TwoPlayerGame swapped{g.alpha2, g.alpha1, g.beta, g.delta};
    const auto forward = profile_set(pure_equilibria(as_nplayer(g)));
    auto mirrored = profile_set(pure_equilibria(as_nplayer(swapped)));
    std::set<std::string> remapped;
    for (std::string p : mirrored) {
      std::swap(p[0], p[1]);
      remapped.insert(p);
    }
    CHECK(forward == remapped);

    const auto r = payoffs(g, S, G);
    const auto rs = payoffs(swapped, G, S);
    CHECK(r[0] == rs[1]);
    CHECK(r[1] == rs[0]);
  }
}

TEST_CASE("increasing delta never adds S to a best response") {
  Rng rng(29);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a1 = uniform01(rng), a2 = uniform01(rng), beta = uniform01(rng);
    const double delta = 0.001 + 0.2 * uniform01(rng);
    const double bigger = delta + 0.05 + 0.2 * uniform01(rng);
    for (Strategy opponent : {S, G}) {
      const auto prefers_search = [&](double d) {
        const TwoPlayerGame g{a1, a2, beta, d};
        return payoffs(g, S, opponent)[0] > payoffs(g, G, opponent)[0];
      };
      if (prefers_search(bigger)) CHECK(prefers_search(delta));
    }
  }
}

TEST_CASE("theorem 2 on the worked examples") {
  const NPlayerGame dominant{{0.9, 0.5, 0.4}, 0.3, 0.02};
  const auto profile = theorem2_predict(dominant);
  REQUIRE(profile.has_value());
  CHECK(profile_label(*profile) == "SGG");
  CHECK(profile_set(pure_equilibria(dominant)) == std::set<std::string>{"SGG"});

  const NPlayerGame timid{{0.3, 0.25, 0.2}, 0.4, 0.05};
  const auto all_guess = theorem2_predict(timid);
  REQUIRE(all_guess.has_value());
  CHECK(profile_label(*all_guess) == "GGG");
  CHECK(profile_set(pure_equilibria(timid)) == std::set<std::string>{"GGG"});
}

TEST_CASE("theorem 2 returns nothing when neither premise applies") {
  const NPlayerGame gap{{0.8, 0.75, 0.7}, 0.2, 0.05};
  CHECK_FALSE(theorem2_predict(gap).has_value());
}

TEST_CASE("theorem 2 at n = 2 agrees with theorem 1 where it speaks") {
  Rng rng(37);
  int checked = 0;
  while (checked < 1500) {
    const TwoPlayerGame g{uniform01(rng), uniform01(rng), uniform01(rng),
                          0.001 + 0.2 * uniform01(rng)};
    const auto profile = theorem2_predict(as_nplayer(g));
    if (!profile) continue;
    const EquilibriumClass t1 = theorem1_predict(g);
    if (t1 == EquilibriumClass::Boundary) continue;
    const std::string label = profile_label(*profile);
    if (label == "SG") CHECK(t1 == EquilibriumClass::UniqueSG);
    if (label == "GS") CHECK(t1 == EquilibriumClass::UniqueGS);
    if (label == "GG") CHECK(t1 == EquilibriumClass::UniqueGG);
    ++checked;
  }
}

TEST_CASE("region sweep classifies the worked grid points") {
  const std::vector<double> a_low{0.1}, a_high{0.9}, b_low{0.1};
  const double beta = 0.2, delta = 0.12;

  auto single = [&](double a1, double a2) {
    const std::vector<double> g1{a1}, g2{a2};
    return region_sweep(g1, g2, beta, delta, 1).front().cls;
  };
  CHECK(single(0.1, 0.1) == EquilibriumClass::UniqueGG);
  CHECK(single(0.9, 0.1) == EquilibriumClass::UniqueSG);  // alpha1 high, alpha2 low
  CHECK(single(0.92, 0.9) == EquilibriumClass::BothSGGS);
}

TEST_CASE("offset grid avoids the beta + delta boundary lines") {
  const auto grid = offset_grid(99);
  REQUIRE(grid.size() == 99);
  CHECK(grid.front() == doctest::Approx(0.005));
  CHECK(grid.back() == doctest::Approx(0.985));
  for (double a : grid) CHECK(std::abs(a - 0.32) > 1e-3);  // beta 0.2 + delta 0.12
}

TEST_CASE("weak ties are reported, not silently classified") {
  // alpha1 exactly beta + delta: the (G,G) -> (S,G) deviation is a tie
  const NPlayerGame g{{0.25, 0.1}, 0.2, 0.05};
  const auto eqs = pure_equilibria(g);
  bool any_tie = false;
  for (const auto& e : eqs) any_tie = any_tie || e.weak_tie;
  CHECK(any_tie);
  CHECK(classify_equilibria(eqs) == EquilibriumClass::Boundary);
}

TEST_CASE("validate_game flags bad parameters") {
  CHECK(validate_game({{0.5, 0.5}, 0.2, 0.0}).size() == 1);   // delta
  CHECK(validate_game({{0.5}, 0.2, 0.1}).size() == 1);        // player count
  CHECK(validate_game({{1.5, 0.5}, -0.2, 0.1}).size() == 2);  // ranges
}
