#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "bcast/belief.hpp"
#include "bcast/model.hpp"
#include "bcast/strategy.hpp"

// Random instances and strategies for tests and the falsification sampler.
// Draws use rng() % n rather than std distributions so that sequences are
// identical across standard library implementations.

namespace bcast {

inline int below(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

/// Distribution with small integer weights in 0..max_weight (at least one positive).
inline std::vector<Rational> random_distribution(std::mt19937_64& rng, int n, int max_weight = 4,
                                                 bool allow_zero = true) {
  std::vector<long> w(n);
  long total = 0;
  do {
    total = 0;
    for (auto& x : w) {
      x = allow_zero ? below(rng, max_weight + 1) : 1 + below(rng, max_weight);
      total += x;
    }
  } while (total == 0);
  std::vector<Rational> out;
  for (long x : w) out.emplace_back(x, total);
  for (auto& x : out) x.canonicalize();
  return out;
}

inline Matrix<Rational> random_kernel(std::mt19937_64& rng, int rows, int cols, bool allow_zero = true) {
  Matrix<Rational> m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    auto row = random_distribution(rng, cols, 4, allow_zero);
    for (int c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

inline Matrix<Rational> random_distortion(std::mt19937_64& rng, int n, int nhat, int rho_max) {
  Matrix<Rational> m(n, nhat);
  for (auto& x : m.data) x = below(rng, rho_max + 1);
  return m;
}

/// Alphabet sizes drawn uniformly from 1..max_size; reconstructions match sources.
inline Alphabets random_sizes(std::mt19937_64& rng, int max_size) {
  Alphabets a;
  a.u = 1 + below(rng, max_size);
  a.v = 1 + below(rng, max_size);
  a.x = 1 + below(rng, max_size);
  a.y = 1 + below(rng, max_size);
  a.z = 1 + below(rng, max_size);
  a.uhat = a.u;
  a.vhat = a.v;
  return a;
}

inline Alphabets binary_sizes() { return Alphabets{2, 2, 2, 2, 2, 2, 2}; }

/// Random model; `noisy` forbids zero entries in the channel kernels.
inline SystemModel<Rational> random_model(std::mt19937_64& rng, const Alphabets& a, int horizon,
                                          bool noisy = false, int rho_max = 3) {
  SystemModel<Rational> m;
  m.sizes = a;
  m.horizon = horizon;
  m.source.initial = random_distribution(rng, a.pairs());
  m.source.transition = random_kernel(rng, a.pairs(), a.pairs());
  m.channel.inner = random_kernel(rng, a.x, a.y, !noisy);
  m.channel.outer = random_kernel(rng, a.y, a.z, !noisy);
  m.distortion.rho_max = rho_max;
  for (int t = 1; t <= horizon; ++t) {
    m.distortion.rho1.push_back(random_distortion(rng, a.u, a.uhat, rho_max));
    m.distortion.rho2.push_back(random_distortion(rng, a.v, a.vhat, rho_max));
  }
  check_model(m);
  return m;
}

inline SystemModel<Rational> random_binary_model(std::mt19937_64& rng, int horizon, bool noisy = false) {
  return random_model(rng, binary_sizes(), horizon, noisy);
}

inline DecoderTables random_decoders(std::mt19937_64& rng, const Alphabets& a, int horizon) {
  auto d = DecoderTables::zeros(a, horizon);
  for (auto& stage : d.inner)
    for (auto& x : stage) x = below(rng, a.uhat);
  for (auto& stage : d.outer)
    for (auto& x : stage) x = below(rng, a.vhat);
  return d;
}

inline MarkovStrategy random_markov(std::mt19937_64& rng, const Alphabets& a, int horizon) {
  auto s = MarkovStrategy::zeros(a, horizon);
  for (auto& stage : s.encoder)
    for (auto& x : stage) x = below(rng, a.x);
  s.decoders = random_decoders(rng, a, horizon);
  return s;
}

inline GeneralStrategy random_general(std::mt19937_64& rng, const Alphabets& a, int horizon) {
  auto s = GeneralStrategy::zeros(a, horizon);
  for (auto& stage : s.encoder)
    for (auto& x : stage) x = below(rng, a.x);
  s.decoders = random_decoders(rng, a, horizon);
  return s;
}

/// Structured strategy with a uniformly random partial encoder at every
/// reachable Pi node.
template <class S>
StructuredStrategy<S> random_structured(std::mt19937_64& rng, const SystemModel<S>& m) {
  const auto& a = m.sizes;
  auto grow = [&](auto&& self, BeliefPi<S> pi) -> std::shared_ptr<PiNode<S>> {
    auto node = std::make_shared<PiNode<S>>();
    node->pi = std::move(pi);
    if (node->pi.stage == m.horizon) return node;
    node->action.assign(node->pi.size(), PairEncoder(a.pairs(), 0));
    for (auto& enc : node->action)
      for (auto& x : enc) x = below(rng, a.x);
    for (int z = 0; z < a.z; ++z) {
      try {
        node->children[z] = self(self, pi_update(node->pi, z, node->action, m));
      } catch (const ZeroProbabilityObservation&) {
      }
    }
    return node;
  };
  return {a, m.horizon, grow(grow, pi_init(m))};
}

}  // namespace bcast
