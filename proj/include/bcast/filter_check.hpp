#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "bcast/belief.hpp"
#include "bcast/model.hpp"
#include "bcast/oracle.hpp"
#include "bcast/random.hpp"
#include "bcast/runner.hpp"
#include "bcast/strategy.hpp"

namespace bcast {

/// Largest deviation of each recursive filter from the brute-force oracle.
/// Deviations are max-norm distances; an atom of Pi present on one side
/// only counts as an infinite deviation.
struct FilterDeviation {
  double xi = 0, theta1 = 0, pi = 0, theta2 = 0;
  std::size_t histories = 0;  // observation histories compared

  double worst() const { return std::max({xi, theta1, pi, theta2}); }
  void merge(const FilterDeviation& o) {
    xi = std::max(xi, o.xi);
    theta1 = std::max(theta1, o.theta1);
    pi = std::max(pi, o.pi);
    theta2 = std::max(theta2, o.theta2);
    histories += o.histories;
  }
};

struct FilterCheckReport {
  Arithmetic mode = Arithmetic::rational;
  std::size_t trials = 0;
  FilterDeviation deviation;
};

namespace detail {

inline constexpr double atom_tolerance = 1e-9;

template <class S>
double distance_to_exact(std::span<const S> filter, std::span<const Rational> exact) {
  if (filter.size() != exact.size()) return std::numeric_limits<double>::infinity();
  double worst = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    double d;
    if constexpr (scalar_traits<S>::exact)
      d = std::fabs(Rational(filter[i] - exact[i]).get_d());
    else
      d = std::fabs(filter[i] - exact[i].get_d());
    worst = std::max(worst, d);
  }
  return worst;
}

/// Max deviation between a filter's Pi and the oracle's atoms. Atoms are
/// matched exactly by key in rational mode and within the tolerance
/// otherwise.
template <class S>
double pi_distance(const BeliefPi<S>& pi, const std::vector<Oracle<Rational>::PiAtom>& exact) {
  const double inf = std::numeric_limits<double>::infinity();
  if (pi.size() != exact.size()) return inf;
  double worst = 0;
  std::vector<char> used(pi.size(), 0);
  for (const auto& e : exact) {
    int match = -1;
    for (std::size_t k = 0; k < pi.size() && match < 0; ++k) {
      if (used[k]) continue;
      if constexpr (scalar_traits<S>::exact) {
        if (pi.atoms[k].atom.key == e.key) match = static_cast<int>(k);
      } else {
        if (distance_to_exact<S>(pi.atoms[k].atom.xi.dist, e.xi) <= atom_tolerance) match = static_cast<int>(k);
      }
    }
    if (match < 0) return inf;
    used[match] = 1;
    const auto& a = pi.atoms[match];
    worst = std::max({worst, distance_to_exact<S>(a.atom.xi.dist, e.xi),
                      distance_to_exact<S>(a.weight, e.weight)});
  }
  return worst;
}

/// Xi and Theta_1 along every reachable history under a Markov encoder.
template <class S>
FilterDeviation check_markov(const SystemModel<Rational>& exact, const SystemModel<S>& m,
                             const MarkovStrategy& s, std::size_t cap) {
  const auto& a = m.sizes;
  auto exec = make_executable(s, exact);
  Oracle<Rational> oracle(exact, *exec, cap);
  FilterDeviation dev;
  std::vector<int> ys, zs;
  auto walk = [&](auto&& self, int t, std::size_t h, const BeliefXi<S>& xi) -> void {
    ++dev.histories;
    dev.xi = std::max(dev.xi, distance_to_exact<S>(xi.dist, oracle.xi(ys, zs)));
    if (t > m.horizon) return;
    const auto enc = std::span<const int>(s.encoder[t - 1]).subspan(h * a.pairs(), a.pairs());
    for (int y = 0; y < a.y; ++y) {
      ys.push_back(y);
      bool y_reachable = false;
      for (int z = 0; z < a.z; ++z) {
        zs.push_back(z);
        if (oracle.prob(ys, zs) != 0) {
          y_reachable = true;
          self(self, t + 1, h * a.outputs() + y * a.z + z, xi_update(xi, y, z, enc, m));
        }
        zs.pop_back();
      }
      if (y_reachable) {
        const auto th = theta1(xi, y, enc, m);
        dev.theta1 = std::max(dev.theta1, distance_to_exact<S>(th.dist, oracle.theta1(ys, zs)));
      }
      ys.pop_back();
    }
  };
  walk(walk, 1, 0, xi_init(m));
  return dev;
}

/// Replays the actions of an exact structured strategy on the filter's own
/// Pi tree: each filter atom takes the action of the exact atom it matches.
template <class S>
std::shared_ptr<PiNode<S>> replay(const PiNode<Rational>& exact, BeliefPi<S> pi, const SystemModel<S>& m) {
  auto node = std::make_shared<PiNode<S>>();
  node->pi = std::move(pi);
  if (exact.action.empty()) return node;
  for (const auto& e : node->pi.atoms) {
    int match = -1;
    for (std::size_t k = 0; k < exact.pi.size() && match < 0; ++k)
      if (distance_to_exact<S>(e.atom.xi.dist, exact.pi.atoms[k].atom.xi.dist) <= atom_tolerance)
        match = static_cast<int>(k);
    if (match < 0) throw UnknownAtom("filter atom has no exact counterpart");
    node->action.push_back(exact.action[match]);
  }
  for (const auto& [z, child] : exact.children)
    node->children[z] = replay<S>(*child, pi_update(node->pi, z, node->action, m), m);
  return node;
}

/// Pi and Theta_2 on every reachable outer history under a structured strategy.
template <class S>
FilterDeviation check_structured(const SystemModel<Rational>& exact, const SystemModel<S>& m,
                                 const StructuredStrategy<Rational>& s, std::size_t cap) {
  auto exec = make_executable(s, exact);
  Oracle<Rational> oracle(exact, *exec, cap);
  FilterDeviation dev;
  std::shared_ptr<PiNode<S>> root;
  try {
    if constexpr (scalar_traits<S>::exact)
      root = std::const_pointer_cast<PiNode<S>>(s.root);
    else
      root = replay<S>(*s.root, pi_init(m), m);
  } catch (const UnknownAtom&) {
    dev.pi = std::numeric_limits<double>::infinity();
    return dev;
  }
  std::vector<int> zs;
  auto walk = [&](auto&& self, const PiNode<S>& node) -> void {
    ++dev.histories;
    dev.pi = std::max(dev.pi, pi_distance(node.pi, oracle.pi(zs)));
    dev.theta2 = std::max(dev.theta2, distance_to_exact<S>(theta2(node.pi, m.sizes).dist, oracle.theta2(zs)));
    for (const auto& [z, child] : node.children) {
      zs.push_back(z);
      self(self, *child);
      zs.pop_back();
    }
  };
  walk(walk, *root);
  // Every reachable outer history must have a node.
  for (int t = 1; t <= m.horizon; ++t)
    for (const auto& z : oracle.reachable_z(t)) {
      const PiNode<S>* node = root.get();
      for (int sym : z) {
        auto it = node->children.find(sym);
        if (it == node->children.end()) {
          dev.pi = std::numeric_limits<double>::infinity();
          return dev;
        }
        node = it->second.get();
      }
    }
  return dev;
}

}  // namespace detail

/// One trial: a random Markov encoder (checks Xi, Theta_1) and a random
/// structured strategy (checks Pi, Theta_2), run in the requested arithmetic
/// against the exact oracle.
inline FilterDeviation filter_trial(const SystemModel<Rational>& m, std::mt19937_64& rng, Arithmetic mode,
                                    std::size_t cap = default_trajectory_cap) {
  const auto markov = random_markov(rng, m.sizes, m.horizon);
  const auto structured = random_structured(rng, m);
  FilterDeviation dev;
  if (mode == Arithmetic::rational) {
    dev.merge(detail::check_markov(m, m, markov, cap));
    dev.merge(detail::check_structured(m, m, structured, cap));
  } else {
    const auto md = convert<double>(m);
    dev.merge(detail::check_markov(m, md, markov, cap));
    dev.merge(detail::check_structured(m, md, structured, cap));
  }
  return dev;
}

inline FilterCheckReport filter_check(const SystemModel<Rational>& m, std::size_t trials, std::uint64_t seed,
                                      Arithmetic mode, std::size_t cap = default_trajectory_cap) {
  FilterCheckReport r{mode, trials, {}};
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < trials; ++i) r.deviation.merge(filter_trial(m, rng, mode, cap));
  return r;
}

}  // namespace bcast
