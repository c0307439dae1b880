#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "bcast/errors.hpp"
#include "bcast/executable.hpp"
#include "bcast/history.hpp"
#include "bcast/model.hpp"
#include "bcast/trajectory.hpp"

namespace bcast {

/// Brute-force Bayes oracle: enumerates every trajectory of the system under
/// a fixed encoder once, tabulates the joint law of each observation history
/// with the current source symbols, and answers conditional queries by
/// slicing and normalizing. Shares no code with the recursive filters.
template <class S>
class Oracle {
 public:
  struct PiAtom {
    std::vector<S> xi;
    Key<S> key;
    std::vector<S> weight;  // Pr(U_t, V_t, Xi_t = xi | z^t) over flattened (u, v)
  };

  Oracle(const SystemModel<S>& m, const Executable& encoder,
         std::size_t cap = default_trajectory_cap)
      : sizes_(m.sizes), horizon_(m.horizon), initial_(m.source.initial) {
    const auto& a = sizes_;
    for (int t = 1; t <= horizon_; ++t) {
      joint_yz_.emplace_back(yz_count(a, t) * a.pairs(), S(0));
      joint_u_.emplace_back(yz_count(a, t - 1) * a.y * a.u, S(0));
      joint_v_.emplace_back(z_count(a, t) * a.v, S(0));
    }
    for_each_trajectory(m, encoder, cap, [&](std::span<const Step> steps, const S& p) {
      std::size_t h = 0, hz = 0;
      for (int t = 1; t <= horizon_; ++t) {
        const Step& st = steps[t - 1];
        const int s = a.pair(st.u, st.v);
        joint_u_[t - 1][(h * a.y + st.y) * a.u + st.u] += p;
        h = h * a.outputs() + st.y * a.z + st.z;
        hz = hz * a.z + st.z;
        joint_yz_[t - 1][h * a.pairs() + s] += p;
        joint_v_[t - 1][hz * a.v + st.v] += p;
      }
    });
  }

  int horizon() const { return horizon_; }

  /// Pr(U_t, V_t | y^t, z^t); the empty history gives the initial law.
  std::vector<S> xi(std::span<const int> ys, std::span<const int> zs) const {
    check_lengths(ys.size(), zs.size(), 0);
    if (zs.empty()) return initial_;
    const auto h = yz_index(ys, zs, sizes_);
    return normalized(slice(joint_yz_[zs.size() - 1], h, sizes_.pairs()));
  }

  /// Joint probability Pr(y^t, z^t).
  S prob(std::span<const int> ys, std::span<const int> zs) const {
    check_lengths(ys.size(), zs.size(), 0);
    if (zs.empty()) return S(1);
    return sum<S>(slice(joint_yz_[zs.size() - 1], yz_index(ys, zs, sizes_), sizes_.pairs()));
  }

  /// Pr(U_t | y^t, z^{t-1}).
  std::vector<S> theta1(std::span<const int> ys, std::span<const int> zs) const {
    check_lengths(ys.size(), zs.size(), 1);
    const int t = static_cast<int>(ys.size());
    const auto h = yz_index(ys.first(t - 1), zs, sizes_) * sizes_.y + ys[t - 1];
    return normalized(slice(joint_u_[t - 1], h, sizes_.u));
  }

  /// Pr(V_t | z^t).
  std::vector<S> theta2(std::span<const int> zs) const {
    if (zs.size() > static_cast<std::size_t>(horizon_)) throw std::invalid_argument("history too long");
    if (zs.empty()) {
      std::vector<S> out(sizes_.v, S(0));
      for (int s = 0; s < sizes_.pairs(); ++s) out[sizes_.v_of(s)] += initial_[s];
      return out;
    }
    return normalized(slice(joint_v_[zs.size() - 1], z_index(zs, sizes_), sizes_.v));
  }

  /// Pr(U_t, V_t, Xi_t | z^t), where each value of Xi_t is obtained from this
  /// oracle's own table for one inner history y^t. Atoms sorted by key.
  std::vector<PiAtom> pi(std::span<const int> zs) const {
    if (zs.size() > static_cast<std::size_t>(horizon_)) throw std::invalid_argument("history too long");
    const int np = sizes_.pairs();
    if (zs.empty()) return {PiAtom{initial_, make_key<S>(initial_), initial_}};
    const int t = static_cast<int>(zs.size());
    const auto target = z_index(zs, sizes_);
    const auto& table = joint_yz_[t - 1];
    std::map<Key<S>, PiAtom> atoms;
    S total = 0;
    for (std::size_t h = 0; h < yz_count(sizes_, t); ++h) {
      if (z_part(h, t, sizes_) != target) continue;
      auto joint = slice(table, h, np);
      S mass = sum<S>(joint);
      if (mass == 0) continue;
      total += mass;
      std::vector<S> xi(joint);
      for (auto& w : xi) w /= mass;
      Key<S> key = make_key<S>(xi);
      auto [it, fresh] = atoms.try_emplace(key, PiAtom{xi, key, std::vector<S>(np, S(0))});
      for (int s = 0; s < np; ++s) it->second.weight[s] += joint[s];
    }
    if (total == 0) throw ZeroProbabilityObservation("outer history has zero probability");
    std::vector<PiAtom> out;
    for (auto& [k, atom] : atoms) {
      for (auto& w : atom.weight) w /= total;
      out.push_back(std::move(atom));
    }
    return out;
  }

  /// All (y^t, z^t) of positive probability.
  std::vector<std::pair<std::vector<int>, std::vector<int>>> reachable_yz(int t) const {
    std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
    if (t == 0) return {{{}, {}}};
    for (std::size_t h = 0; h < yz_count(sizes_, t); ++h) {
      if (sum<S>(slice(joint_yz_[t - 1], h, sizes_.pairs())) == 0) continue;
      std::vector<int> ys, zs;
      decode_yz(h, t, sizes_, ys, zs);
      out.emplace_back(std::move(ys), std::move(zs));
    }
    return out;
  }

  /// All z^t of positive probability.
  std::vector<std::vector<int>> reachable_z(int t) const {
    std::vector<std::vector<int>> out;
    if (t == 0) return {{}};
    for (std::size_t hz = 0; hz < z_count(sizes_, t); ++hz) {
      if (sum<S>(slice(joint_v_[t - 1], hz, sizes_.v)) == 0) continue;
      std::vector<int> zs(t);
      auto rest = hz;
      for (int i = t - 1; i >= 0; --i) {
        zs[i] = static_cast<int>(rest % sizes_.z);
        rest /= sizes_.z;
      }
      out.push_back(std::move(zs));
    }
    return out;
  }

 private:
  void check_lengths(std::size_t ny, std::size_t nz, std::size_t extra_y) const {
    if (ny != nz + extra_y || ny > static_cast<std::size_t>(horizon_))
      throw std::invalid_argument("history lengths do not match the query");
  }

  static std::vector<S> slice(const std::vector<S>& table, std::size_t h, int width) {
    auto first = table.begin() + static_cast<std::ptrdiff_t>(h * width);
    return {first, first + width};
  }

  static std::vector<S> normalized(std::vector<S> w) {
    S total = sum<S>(w);
    if (total == 0) throw ZeroProbabilityObservation("conditioning history has zero probability");
    for (auto& x : w) x /= total;
    return w;
  }

  Alphabets sizes_;
  int horizon_;
  std::vector<S> initial_;
  std::vector<std::vector<S>> joint_yz_;  // [t-1][(h(y^t, z^t)) * |UV| + s]
  std::vector<std::vector<S>> joint_u_;   // [t-1][(h(y^{t-1}, z^{t-1}) |Y| + y_t) * |U| + u]
  std::vector<std::vector<S>> joint_v_;   // [t-1][h(z^t) * |V| + v]
};

enum class Query { pair_given_yz, u_given_y_zprev, v_given_z };

/// One-shot form of the oracle for a single query.
template <class S>
std::vector<S> oracle_conditional(const SystemModel<S>& m, const Executable& encoder, Query q,
                                  std::span<const int> ys, std::span<const int> zs,
                                  std::size_t cap = default_trajectory_cap) {
  Oracle<S> oracle(m, encoder, cap);
  switch (q) {
    case Query::pair_given_yz: return oracle.xi(ys, zs);
    case Query::u_given_y_zprev: return oracle.theta1(ys, zs);
    case Query::v_given_z: return oracle.theta2(zs);
  }
  return {};
}

}  // namespace bcast
