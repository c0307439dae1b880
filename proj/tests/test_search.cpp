#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace bcast;
using test::q;

namespace {

// Minimum over every Markov encoder of the cost with MAP decoders, built
// from the public strategy and decoding functions only.
Rational naive_optimum(const SystemModel<Rational>& m) {
  auto s = MarkovStrategy::zeros(m.sizes, m.horizon);
  std::optional<Rational> best;
  while (true) {
    const Rational c = map_decoding(m, *make_executable(s, m)).cost;
    if (!best || c < *best) best = c;
    // Odometer over all encoder entries.
    bool carry = true;
    for (auto stage = s.encoder.rbegin(); stage != s.encoder.rend() && carry; ++stage)
      for (auto it = stage->rbegin(); it != stage->rend() && carry; ++it) {
        if (++*it < m.sizes.x)
          carry = false;
        else
          *it = 0;
      }
    if (carry) return *best;
  }
}

std::size_t encoder_digits(const SystemModel<Rational>& m) {
  std::size_t d = 0;
  for (int t = 1; t <= m.horizon; ++t) d += MarkovStrategy::stage_entries(m.sizes, t);
  return d;
}

SystemModel<Rational> small_model(std::mt19937_64& rng, int T, std::size_t max_encoders) {
  while (true) {
    auto m = random_model(rng, random_sizes(rng, 3), T);
    if (ipow(m.sizes.x, static_cast<int>(encoder_digits(m))) <= max_encoders) return m;
  }
}

}  // namespace

TEST(Brute, MatchesNaiveEnumeration) {
  std::mt19937_64 rng(71);
  for (int k = 0; k < 12; ++k) {
    auto m = small_model(rng, 1 + k % 2, 256);
    auto r = brute_force_markov(m);
    EXPECT_EQ(r.best_cost, naive_optimum(m)) << "instance " << k;
    ASSERT_TRUE(r.markov);
    EXPECT_EQ(exact_cost(m, *make_executable(*r.markov, m)).total, r.best_cost);
  }
}

TEST(Brute, ScaledIntegerPathMatchesRationalPath) {
  std::mt19937_64 rng(72);
  for (int k = 0; k < 10; ++k) {
    auto m = small_model(rng, 1 + k % 3, 1 << 12);
    auto scaled = detail::scale_exact(m);
    ASSERT_TRUE(scaled);
    const std::size_t count = ipow(m.sizes.x, static_cast<int>(encoder_digits(m)));
    auto fast = detail::parallel_scan(scaled->first, count, 1);
    auto slow = detail::parallel_scan(detail::plain_tables(m), count, 1);
    Rational fast_cost(detail::from_i128(fast.cost), scaled->second);
    fast_cost.canonicalize();
    EXPECT_EQ(fast_cost, slow.cost);
    EXPECT_EQ(fast.encoder, slow.encoder);
  }
}

TEST(Brute, WorkersAgree) {
  std::mt19937_64 rng(73);
  auto m = random_binary_model(rng, 2, true);
  SearchLimits one, three;
  three.workers = 3;
  auto a = brute_force_markov(m, one), b = brute_force_markov(m, three);
  EXPECT_EQ(a.best_cost, b.best_cost);
  EXPECT_EQ(*a.markov, *b.markov);
}

TEST(Brute, DistortionScalingAndShift) {
  std::mt19937_64 rng(74);
  for (int k = 0; k < 5; ++k) {
    auto m = small_model(rng, 2, 1 << 12);
    auto base = brute_force_markov(m);
    auto scaled = m;
    for (auto* sched : {&scaled.distortion.rho1, &scaled.distortion.rho2})
      for (auto& r : *sched)
        for (auto& x : r.data) x *= 3;
    scaled.distortion.rho_max *= 3;
    auto rs = brute_force_markov(scaled);
    EXPECT_EQ(rs.best_cost, 3 * base.best_cost);
    EXPECT_EQ(rs.markov->encoder, base.markov->encoder);

    auto shifted = m;
    for (auto& r : shifted.distortion.rho1)
      for (auto& x : r.data) x += 2;
    shifted.distortion.rho_max += 2;
    auto rsh = brute_force_markov(shifted);
    EXPECT_EQ(rsh.best_cost, base.best_cost + 2 * m.horizon);
    EXPECT_EQ(rsh.markov->encoder, base.markov->encoder);
  }
}

TEST(Brute, CapExceeded) {
  auto m = test::bsc_special(2);
  SearchLimits l;
  l.encoders = 1000;
  EXPECT_THROW(brute_force_markov(m, l), CapExceeded);
  auto big = test::bsc_special(3);  // 2^84 encoders
  EXPECT_THROW(brute_force_markov(big), CapExceeded);
}

TEST(Dp, MatchesBruteForceSingleStage) {
  std::mt19937_64 rng(75);
  for (int k = 0; k < 20; ++k) {
    auto m = small_model(rng, 1, 1 << 16);
    EXPECT_EQ(coordinator_dp(m).best_cost, brute_force_markov(m).best_cost) << "instance " << k;
  }
}

TEST(Dp, MatchesBruteForceTwoStages) {
  std::mt19937_64 rng(76);
  for (int k = 0; k < 3; ++k) {
    auto m = random_binary_model(rng, 2, k % 2 == 0);
    EXPECT_EQ(coordinator_dp(m).best_cost, brute_force_markov(m).best_cost) << "instance " << k;
  }
  auto m = load_model(test::scenario("random_binary_T2.json"));
  EXPECT_EQ(coordinator_dp(m).best_cost, q("6113/2145"));
}

TEST(Dp, StrategyAchievesValueAndNodesMatchOracle) {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 6; ++k) {
    auto m = random_model(rng, random_sizes(rng, 2), 1 + k % 2);
    auto r = coordinator_dp(m);
    ASSERT_TRUE(r.structured);
    auto exec = make_executable(*r.structured, m);
    EXPECT_EQ(exact_cost(m, *exec).total, r.best_cost);
    Oracle<Rational> oracle(m, *exec);
    std::vector<int> zs;
    auto walk = [&](auto&& self, const PiNode<Rational>& node) -> void {
      const auto exact = oracle.pi(zs);
      ASSERT_EQ(exact.size(), node.pi.size());
      for (std::size_t i = 0; i < exact.size(); ++i) {
        EXPECT_EQ(exact[i].xi, node.pi.atoms[i].atom.xi.dist);
        EXPECT_EQ(exact[i].weight, node.pi.atoms[i].weight);
      }
      for (const auto& [z, child] : node.children) {
        zs.push_back(z);
        self(self, *child);
        zs.pop_back();
      }
    };
    walk(walk, *r.structured->root);
  }
}

TEST(Dp, FloatAgreesWithExact) {
  std::mt19937_64 rng(78);
  for (int k = 0; k < 5; ++k) {
    auto m = random_model(rng, random_sizes(rng, 2), 2);
    EXPECT_NEAR(coordinator_dp(convert<double>(m)).best_cost, coordinator_dp(m).best_cost.get_d(), 1e-9);
  }
}

TEST(Dp, CapExceeded) {
  auto m = test::bsc_special(2);
  SearchLimits l;
  l.nodes = 1;
  EXPECT_THROW(coordinator_dp(m, l), CapExceeded);
  l = {};
  l.actions = 4;
  EXPECT_THROW(coordinator_dp(m, l), CapExceeded);
}

TEST(Golden, BinarySpecialCase) {
  for (auto [T, expected] : {std::pair{1, "3/5"}, std::pair{2, "9/25"}}) {
    auto m = test::bsc_special(T);
    EXPECT_EQ(brute_force_markov(m).best_cost, q(expected));
    EXPECT_EQ(coordinator_dp(m).best_cost, q(expected));
  }
}

TEST(Golden, NoiselessIsLossless) {
  auto m = build_special_case(Alphabets{2, 2, 4, 4, 4, 2, 2}, 1);
  EXPECT_EQ(brute_force_markov(m).best_cost, 0);
  EXPECT_EQ(coordinator_dp(m).best_cost, 0);
}

TEST(Golden, QuaternaryInputsSingleStage) {
  Alphabets a{2, 2, 4, 4, 4, 2, 2};
  auto m = build_special_case(a, 1, {symmetric_kernel(4, q("1/10")), symmetric_kernel(4, q("1/5"))});
  EXPECT_EQ(brute_force_markov(m).best_cost, q("56/225"));
  EXPECT_EQ(coordinator_dp(m).best_cost, q("56/225"));
}

TEST(Falsify, NoSamplesIsNotFalsified) {
  auto m = test::bsc_special(1);
  auto v = falsify_structural(m, 0, 1);
  EXPECT_FALSE(v.falsified);
  EXPECT_EQ(v.samples, 0u);
  EXPECT_EQ(v.optimum, q("3/5"));
  ASSERT_TRUE(v.planted);
  EXPECT_EQ(*v.planted, v.optimum);
}

TEST(Falsify, RandomSamplesDoNotBeatOptimum) {
  std::mt19937_64 rng(79);
  auto m = random_binary_model(rng, 2, true);
  auto v = falsify_structural(m, 200, 5);
  EXPECT_FALSE(v.falsified);
  EXPECT_EQ(v.samples, 200u);
  ASSERT_TRUE(v.best_sample);
  EXPECT_GE(*v.best_sample, v.optimum);
  EXPECT_EQ(*v.planted, v.optimum);
}

TEST(Falsify, ReportsStrategyBelowClaimedOptimum) {
  // With a claimed optimum above the true one, some sample must beat it.
  auto m = test::bsc_special(1);
  auto v = falsify_structural<Rational>(m, 500, 3, Rational(2));
  ASSERT_TRUE(v.falsified);
  ASSERT_TRUE(v.counterexample);
  EXPECT_LT(v.counterexample->cost, 2);
  EXPECT_EQ(exact_cost(m, *make_executable(v.counterexample->strategy, m)).total, v.counterexample->cost);
}
