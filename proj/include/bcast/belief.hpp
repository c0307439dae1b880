#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcast/errors.hpp"
#include "bcast/model.hpp"
#include "bcast/scalar.hpp"

// Sufficient statistics of the broadcast system.
//
//   Xi_t    = Pr(U_t, V_t | Y^t, Z^t)            shared by encoder and inner decoder
//   Pi_t    = Pr(U_t, V_t, Xi_t | Z^t)            shared by everyone
//   Theta_1 = Pr(U_t | Y^t, Z^{t-1})              inner decoder
//   Theta_2 = Pr(V_t | Z^t)                       outer decoder
//
// Stage bookkeeping: a belief of stage t >= 1 is a posterior of the stage-t
// source pair. Stage 0 is the time origin; its "posterior" is the law of the
// first source pair, so predicting from stage 0 is the identity while
// predicting from stage t >= 1 pushes through the source transition matrix.

namespace bcast {

template <class S>
struct BeliefXi {
  std::vector<S> dist;  // over flattened (u, v)
  int stage = 0;
};

template <class S>
struct BeliefThetaU {
  std::vector<S> dist;
};

template <class S>
struct BeliefThetaV {
  std::vector<S> dist;
};

/// A point of the simplex over U x V together with its canonical identity.
/// Exact mode compares coordinates exactly; float mode compares them
/// quantized to 12 decimal digits.
template <class S>
struct XiAtom {
  BeliefXi<S> xi;
  Key<S> key;

  static XiAtom make(BeliefXi<S> xi) {
    Key<S> k = make_key<S>(xi.dist);
    return {std::move(xi), std::move(k)};
  }
};

/// Finitely supported law of (U_t, V_t, Xi_t): per atom, the weights
/// w(u, v, xi). Atoms are sorted by key and have positive mass.
template <class S>
struct BeliefPi {
  struct Entry {
    XiAtom<S> atom;
    std::vector<S> weight;  // over flattened (u, v)
  };
  int stage = 0;
  std::vector<Entry> atoms;

  std::size_t size() const { return atoms.size(); }
};

/// Partial encoder on U x V (one channel input per flattened pair).
using PairEncoder = std::vector<int>;
/// Partial encoder on U x V x (atoms of a Pi belief), indexed [atom][pair].
using AtomEncoder = std::vector<PairEncoder>;

namespace detail {

inline void check_encoder(std::span<const int> enc, const Alphabets& a) {
  if (enc.size() != static_cast<std::size_t>(a.pairs()))
    throw std::invalid_argument("partial encoder must cover every (u, v) pair");
  for (int x : enc)
    if (x < 0 || x >= a.x) throw std::invalid_argument("partial encoder emits an invalid symbol");
}

template <class S>
void normalize_or_throw(std::vector<S>& w, const char* what) {
  S total = sum<S>(w);
  if (total == 0) throw ZeroProbabilityObservation(what);
  for (auto& x : w) x /= total;
}

}  // namespace detail

/// Unnormalized law of the next source pair given weights on the current one.
template <class S>
std::vector<S> predict(const SystemModel<S>& m, std::span<const S> weights, int stage) {
  if (stage == 0) return {weights.begin(), weights.end()};
  const int np = m.sizes.pairs();
  std::vector<S> out(np, S(0));
  for (int sp = 0; sp < np; ++sp) {
    if (weights[sp] == 0) continue;
    const auto row = m.source.transition.row(sp);
    for (int s = 0; s < np; ++s)
      if (row[s] != 0) out[s] += weights[sp] * row[s];
  }
  return out;
}

template <class S>
BeliefXi<S> xi_init(const SystemModel<S>& m) {
  return {m.source.initial, 0};
}

/// Bayes update of Xi on the stage observation (y, z) when the encoder used
/// the partial function `enc` on the current source pair.
template <class S>
BeliefXi<S> xi_update(const BeliefXi<S>& xi, int y, int z, std::span<const int> enc,
                      const SystemModel<S>& m) {
  detail::check_encoder(enc, m.sizes);
  std::vector<S> post = predict<S>(m, xi.dist, xi.stage);
  const S& qz = m.channel.outer(y, z);
  for (std::size_t s = 0; s < post.size(); ++s)
    if (post[s] != 0) post[s] *= m.channel.inner(enc[s], y) * qz;
  detail::normalize_or_throw(post, "observation (y, z) has zero probability under xi");
  return {std::move(post), xi.stage + 1};
}

template <class S>
BeliefPi<S> pi_init(const SystemModel<S>& m) {
  BeliefPi<S> pi;
  pi.stage = 0;
  pi.atoms.push_back({XiAtom<S>::make(xi_init(m)), m.source.initial});
  return pi;
}

/// Bayes update of Pi on the outer observation z. Each prior atom xi' spawns
/// one child atom per inner output y of positive probability, namely
/// xi_update(xi', y, z, enc[xi']); children with equal keys are merged.
template <class S>
BeliefPi<S> pi_update(const BeliefPi<S>& pi, int z, const AtomEncoder& enc,
                      const SystemModel<S>& m) {
  if (enc.size() < pi.atoms.size())
    throw UnknownAtom("partial encoder does not cover atom " + std::to_string(enc.size()));
  const auto& a = m.sizes;
  std::map<Key<S>, typename BeliefPi<S>::Entry> children;
  for (std::size_t k = 0; k < pi.atoms.size(); ++k) {
    const auto& entry = pi.atoms[k];
    detail::check_encoder(enc[k], a);
    const std::vector<S> pred = predict<S>(m, entry.weight, pi.stage);
    for (int y = 0; y < a.y; ++y) {
      const S& qz = m.channel.outer(y, z);
      if (qz == 0) continue;
      std::vector<S> joint(a.pairs(), S(0));
      S mass = 0;
      for (int s = 0; s < a.pairs(); ++s) {
        if (pred[s] == 0) continue;
        joint[s] = pred[s] * m.channel.inner(enc[k][s], y) * qz;
        mass += joint[s];
      }
      if (mass == 0) continue;
      auto child = XiAtom<S>::make(xi_update(entry.atom.xi, y, z, enc[k], m));
      auto [it, fresh] = children.try_emplace(child.key);
      if (fresh) {
        it->second.atom = std::move(child);
        it->second.weight = std::move(joint);
        continue;
      }
      if constexpr (!scalar_traits<S>::exact) {
        if (linf_distance<S>(it->second.atom.xi.dist, child.xi.dist) > 1e-9)
          throw std::logic_error("atom key collision between distinct beliefs");
      }
      for (int s = 0; s < a.pairs(); ++s) it->second.weight[s] += joint[s];
    }
  }
  S total = 0;
  for (const auto& [key, e] : children) total += sum<S>(e.weight);
  if (total == 0) throw ZeroProbabilityObservation("outer observation z has zero probability under pi");
  BeliefPi<S> out;
  out.stage = pi.stage + 1;
  for (auto& [key, e] : children) {
    for (auto& w : e.weight) w /= total;
    out.atoms.push_back(std::move(e));
  }
  return out;
}

/// Pr(U_t | Y^t, Z^{t-1}): predict from xi_prev, weigh by the likelihood of
/// the inner output y, marginalize V.
template <class S>
BeliefThetaU<S> theta1(const BeliefXi<S>& xi_prev, int y, std::span<const int> enc,
                       const SystemModel<S>& m) {
  detail::check_encoder(enc, m.sizes);
  const auto& a = m.sizes;
  const std::vector<S> pred = predict<S>(m, xi_prev.dist, xi_prev.stage);
  std::vector<S> out(a.u, S(0));
  for (int s = 0; s < a.pairs(); ++s)
    if (pred[s] != 0) out[a.u_of(s)] += pred[s] * m.channel.inner(enc[s], y);
  detail::normalize_or_throw(out, "inner output y has zero probability under xi");
  return {std::move(out)};
}

/// Pr(V_t | Z^t): the V-marginal of pi.
template <class S>
BeliefThetaV<S> theta2(const BeliefPi<S>& pi, const Alphabets& a) {
  std::vector<S> out(a.v, S(0));
  for (const auto& e : pi.atoms)
    for (int s = 0; s < a.pairs(); ++s) out[a.v_of(s)] += e.weight[s];
  return {std::move(out)};
}

/// Marginal of pi over (u, v).
template <class S>
std::vector<S> pair_marginal(const BeliefPi<S>& pi, int pairs) {
  std::vector<S> out(pairs, S(0));
  for (const auto& e : pi.atoms)
    for (int s = 0; s < pairs; ++s) out[s] += e.weight[s];
  return out;
}

template <class S>
S atom_mass(const typename BeliefPi<S>::Entry& e) {
  return sum<S>(e.weight);
}

/// Index of the atom of `pi` equal to `xi`, or -1. Float mode matches within
/// 1e-9 in the max norm instead of by key.
template <class S>
int find_atom(const BeliefPi<S>& pi, const BeliefXi<S>& xi) {
  if constexpr (scalar_traits<S>::exact) {
    const Key<S> k = make_key<S>(xi.dist);
    std::size_t lo = 0, hi = pi.atoms.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (pi.atoms[mid].atom.key < k)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo < pi.atoms.size() && pi.atoms[lo].atom.key == k ? static_cast<int>(lo) : -1;
  } else {
    for (std::size_t i = 0; i < pi.atoms.size(); ++i)
      if (linf_distance<S>(pi.atoms[i].atom.xi.dist, xi.dist) <= 1e-9) return static_cast<int>(i);
    return -1;
  }
}

/// Canonical identity of a whole Pi belief (atoms and weights).
template <class S>
Key<S> pi_key(const BeliefPi<S>& pi) {
  Key<S> k;
  for (const auto& e : pi.atoms) {
    k.insert(k.end(), e.atom.key.begin(), e.atom.key.end());
    for (const auto& w : e.weight) k.push_back(scalar_traits<S>::key(w));
  }
  return k;
}

}  // namespace bcast
