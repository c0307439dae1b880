#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace bcast;
using test::q;

namespace {

// x = u on the binary special case.
const std::vector<int> x_is_u{0, 0, 1, 1};

SystemModel<Rational> noiseless_2x2(int T) { return build_special_case(Alphabets{2, 2, 4, 4, 4, 2, 2}, T); }

}  // namespace

TEST(Xi, InitIsSourceLaw) {
  auto m = test::bsc_special(1);
  auto xi = xi_init(m);
  EXPECT_EQ(xi.stage, 0);
  EXPECT_EQ(xi.dist, m.source.initial);
}

TEST(Xi, HandComputedPosterior) {
  // Pr(u, v, y=0, z=0) = 1/4 * Q(0|u) * 4/5, so U=0 carries 9/10 of the mass.
  auto m = test::bsc_special(1);
  auto xi = xi_update(xi_init(m), 0, 0, x_is_u, m);
  EXPECT_EQ(xi.stage, 1);
  EXPECT_EQ(xi.dist, (std::vector<Rational>{q("9/20"), q("9/20"), q("1/20"), q("1/20")}));
  auto th = theta1(xi_init(m), 0, x_is_u, m);
  EXPECT_EQ(th.dist, (std::vector<Rational>{q("9/10"), q("1/10")}));
  th = theta1(xi_init(m), 1, x_is_u, m);
  EXPECT_EQ(th.dist, (std::vector<Rational>{q("1/10"), q("9/10")}));
}

TEST(Xi, NoiselessInjectiveEncoderGivesPointMass) {
  auto m = noiseless_2x2(2);
  const std::vector<int> ident{0, 1, 2, 3};
  for (int s = 0; s < 4; ++s) {
    auto xi = xi_update(xi_init(m), s, s, ident, m);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(xi.dist[k], k == s ? 1 : 0);
    // The static source keeps the point mass at the next stage.
    auto next = xi_update(xi, 0, 0, std::vector<int>(4, 0), m);
    EXPECT_EQ(next.dist, xi.dist);
  }
}

TEST(Xi, UninformativeChannelOnlyPredicts) {
  std::mt19937_64 rng(11);
  auto m = random_binary_model(rng, 2);
  for (int x = 0; x < 2; ++x) m.channel.inner(x, 0) = m.channel.inner(x, 1) = q("1/2");
  auto xi1 = xi_update(xi_init(m), 1, 0, std::vector<int>{0, 1, 1, 0}, m);
  EXPECT_EQ(xi1.dist, m.source.initial);
  auto xi2 = xi_update(xi1, 0, 1, std::vector<int>{1, 1, 0, 0}, m);
  EXPECT_EQ(xi2.dist, predict<Rational>(m, xi1.dist, 1));
}

TEST(Xi, ZeroProbabilityObservationThrows) {
  auto m = noiseless_2x2(1);
  const std::vector<int> ident{0, 1, 2, 3};
  EXPECT_THROW(xi_update(xi_init(m), 0, 1, ident, m), ZeroProbabilityObservation);
  Oracle<Rational> oracle(m, *make_executable(MarkovStrategy::zeros(m.sizes, 1), m));
  std::vector<int> ys{1}, zs{1};
  EXPECT_THROW(oracle.xi(ys, zs), ZeroProbabilityObservation);
}

TEST(Xi, EncoderShapeChecked) {
  auto m = test::bsc_special(1);
  EXPECT_THROW(xi_update(xi_init(m), 0, 0, std::vector<int>{0, 1}, m), std::invalid_argument);
}

TEST(Pi, InitHasOneAtom) {
  auto m = test::bsc_special(2);
  auto pi = pi_init(m);
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_EQ(pi.atoms[0].weight, m.source.initial);
  EXPECT_EQ(pi.atoms[0].atom.xi.dist, m.source.initial);
}

TEST(Pi, ConstantEncoderMergesAllInnerOutputs) {
  // The inner output carries no information about (u, v), so every y leads
  // to the same Xi and the children collapse into one atom of full mass.
  auto m = test::bsc_special(2);
  AtomEncoder enc{PairEncoder(4, 0)};
  auto pi = pi_update(pi_init(m), 1, enc, m);
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_EQ(sum<Rational>(pi.atoms[0].weight), 1);
}

TEST(Pi, InformativeEncoderSplitsAtoms) {
  auto m = test::bsc_special(2);
  auto pi = pi_update(pi_init(m), 0, AtomEncoder{x_is_u}, m);
  ASSERT_EQ(pi.size(), 2u);
  Rational total = 0;
  for (const auto& e : pi.atoms) total += sum<Rational>(e.weight);
  EXPECT_EQ(total, 1);
  auto expected = xi_update(xi_init(m), 0, 0, x_is_u, m);
  EXPECT_GE(find_atom(pi, expected), 0);
}

TEST(Pi, AtomWeightsAreProportionalToTheirXi) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 10; ++k) {
    auto m = random_model(rng, random_sizes(rng, 3), 1 + k % 3);
    auto s = random_structured(rng, m);
    auto walk = [&](auto&& self, const PiNode<Rational>& node) -> void {
      for (const auto& e : node.pi.atoms) {
        const Rational mass = sum<Rational>(e.weight);
        ASSERT_GT(mass, 0);
        for (std::size_t i = 0; i < e.weight.size(); ++i) EXPECT_EQ(e.weight[i], mass * e.atom.xi.dist[i]);
      }
      for (const auto& [z, child] : node.children) self(self, *child);
    };
    walk(walk, *s.root);
  }
}

TEST(Pi, SupportGrowsAtMostByInnerAlphabet) {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 10; ++k) {
    auto m = random_model(rng, random_sizes(rng, 3), 3);
    auto s = random_structured(rng, m);
    auto walk = [&](auto&& self, const PiNode<Rational>& node) -> void {
      EXPECT_LE(node.pi.size(), ipow(m.sizes.y, node.pi.stage));
      for (std::size_t i = 1; i < node.pi.size(); ++i) EXPECT_LT(node.pi.atoms[i - 1].atom.key, node.pi.atoms[i].atom.key);
      for (const auto& [z, child] : node.children) {
        EXPECT_LE(child->pi.size(), node.pi.size() * m.sizes.y);
        self(self, *child);
      }
    };
    walk(walk, *s.root);
  }
}

TEST(Pi, ZeroProbabilityOuterObservation) {
  auto m = noiseless_2x2(1);
  AtomEncoder enc{PairEncoder(4, 0)};
  EXPECT_THROW(pi_update(pi_init(m), 2, enc, m), ZeroProbabilityObservation);
  EXPECT_THROW(pi_update(pi_init(m), 0, AtomEncoder{}, m), UnknownAtom);
}

TEST(Theta, OuterBeliefIsVMarginal) {
  auto m = test::bsc_special(1);
  auto th = theta2(pi_init(m), m.sizes);
  EXPECT_EQ(th.dist, (std::vector<Rational>{q("1/2"), q("1/2")}));
  // x = v: the outer decoder sees v through both crossovers.
  const PairEncoder x_is_v{0, 1, 0, 1};
  auto pi = pi_update(pi_init(m), 0, AtomEncoder{x_is_v}, m);
  // Pr(z=0 | v=0) = 9/10 * 4/5 + 1/10 * 1/5 = 37/50.
  EXPECT_EQ(theta2(pi, m.sizes).dist, (std::vector<Rational>{q("37/50"), q("13/50")}));
}

TEST(Filters, MatchOracleExactly) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 15; ++k) {
    auto m = random_model(rng, random_sizes(rng, 3), 1 + k % 3);
    auto dev = filter_trial(m, rng, Arithmetic::rational);
    EXPECT_EQ(dev.worst(), 0.0) << "instance " << k;
    EXPECT_GT(dev.histories, 0u);
  }
}

TEST(Filters, FloatWithinTolerance) {
  std::mt19937_64 rng(32);
  for (int k = 0; k < 15; ++k) {
    auto m = random_model(rng, random_sizes(rng, 3), 1 + k % 3);
    auto dev = filter_trial(m, rng, Arithmetic::floating);
    EXPECT_LE(dev.worst(), 1e-9) << "instance " << k;
  }
}

TEST(Filters, CheckReportsCorruptedFilter) {
  // A structured strategy whose Pi is perturbed must be flagged.
  std::mt19937_64 rng(33);
  auto m = test::bsc_special(2);
  auto s = random_structured(rng, m);
  auto root = std::make_shared<PiNode<Rational>>(*s.root);
  root->children.begin()->second = std::make_shared<PiNode<Rational>>(*root->children.begin()->second);
  auto& w = root->children.begin()->second->pi.atoms[0].weight;
  w[0] += q("1/100");
  w[1] -= q("1/100");
  StructuredStrategy<Rational> bad{s.sizes, s.horizon, root};
  auto dev = detail::check_structured(m, m, bad, default_trajectory_cap);
  EXPECT_GT(dev.pi, 0.0);
}
