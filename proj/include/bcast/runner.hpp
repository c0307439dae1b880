#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bcast/belief.hpp"
#include "bcast/errors.hpp"
#include "bcast/executable.hpp"
#include "bcast/history.hpp"
#include "bcast/strategy.hpp"
#include "bcast/trajectory.hpp"

namespace bcast {

namespace detail {

/// Shared-history bookkeeping common to the table-driven runners.
struct HistoryCursor {
  int t = 1;           // current stage, 1-based
  std::size_t h = 0;   // h(y^{t-1}, z^{t-1})
  std::size_t hz = 0;  // h(z^{t-1})
  int s = 0, x = 0, y = 0;

  void advance(const Alphabets& a, int z) {
    h = h * a.outputs() + y * a.z + z;
    hz = hz * a.z + z;
    ++t;
  }
};

class MarkovRunner final : public Executable {
 public:
  explicit MarkovRunner(std::shared_ptr<const MarkovStrategy> s) : s_(std::move(s)) {}
  std::unique_ptr<Executable> clone() const override { return std::make_unique<MarkovRunner>(*this); }
  void reset() override { c_ = {}; }
  int encode(int u, int v) override {
    c_.s = s_->sizes.pair(u, v);
    return c_.x = s_->encoder[c_.t - 1][c_.h * s_->sizes.pairs() + c_.s];
  }
  int decode_inner(int y) override {
    c_.y = y;
    return s_->decoders.inner[c_.t - 1][c_.h * s_->sizes.y + y];
  }
  int decode_outer(int z) override {
    const int t = c_.t;
    c_.advance(s_->sizes, z);
    return s_->decoders.outer[t - 1][c_.hz];
  }

 private:
  std::shared_ptr<const MarkovStrategy> s_;
  HistoryCursor c_;
};

class GeneralRunner final : public Executable {
 public:
  explicit GeneralRunner(std::shared_ptr<const GeneralStrategy> s) : s_(std::move(s)) {}
  std::unique_ptr<Executable> clone() const override { return std::make_unique<GeneralRunner>(*this); }
  void reset() override {
    c_ = {};
    g_ = 0;
  }
  int encode(int u, int v) override {
    c_.s = s_->sizes.pair(u, v);
    return c_.x = s_->encoder[c_.t - 1][g_ * s_->sizes.pairs() + c_.s];
  }
  int decode_inner(int y) override {
    c_.y = y;
    return s_->decoders.inner[c_.t - 1][c_.h * s_->sizes.y + y];
  }
  int decode_outer(int z) override {
    const auto& a = s_->sizes;
    g_ = (((g_ * a.pairs() + c_.s) * a.x + c_.x) * a.y + c_.y) * a.z + z;
    const int t = c_.t;
    c_.advance(a, z);
    return s_->decoders.outer[t - 1][c_.hz];
  }

 private:
  std::shared_ptr<const GeneralStrategy> s_;
  HistoryCursor c_;
  std::size_t g_ = 0;
};

/// Coordinator form: a coordinator watches the shared history and issues
/// partial functions; the encoder and inner decoder only evaluate them.
class CoordinatorRunner final : public Executable {
 public:
  explicit CoordinatorRunner(std::shared_ptr<const CoordinatorStrategy> s) : s_(std::move(s)) {}
  std::unique_ptr<Executable> clone() const override {
    return std::make_unique<CoordinatorRunner>(*this);
  }
  void reset() override {
    c_ = {};
    rule_ = nullptr;
  }
  int encode(int u, int v) override {
    rule_ = &s_->rules[c_.t - 1][c_.h];
    return rule_->encoder[s_->sizes.pair(u, v)];
  }
  int decode_inner(int y) override {
    c_.y = y;
    return rule_->inner[y];
  }
  int decode_outer(int z) override {
    const int t = c_.t;
    c_.advance(s_->sizes, z);
    return s_->outer[t - 1][c_.hz];
  }

 private:
  std::shared_ptr<const CoordinatorStrategy> s_;
  HistoryCursor c_;
  const PartialFunctions* rule_ = nullptr;
};

/// State generators (Xi, Pi), state compressors (Theta_1, Theta_2) and
/// memoryless MAP decoders driving a structured strategy.
template <class S>
class StructuredRunner final : public Executable {
 public:
  StructuredRunner(std::shared_ptr<const StructuredStrategy<S>> s,
                   std::shared_ptr<const SystemModel<S>> m)
      : s_(std::move(s)), m_(std::move(m)) {
    reset();
  }
  std::unique_ptr<Executable> clone() const override {
    return std::make_unique<StructuredRunner>(*this);
  }
  void reset() override {
    t_ = 1;
    node_ = s_->root.get();
    xi_ = xi_init(*m_);
    atom_ = -1;
  }
  int encode(int u, int v) override {
    if (node_->action.empty()) throw UnknownAtom("structured strategy has no action at this node");
    atom_ = find_atom(node_->pi, xi_);
    if (atom_ < 0) throw UnknownAtom("realized Xi is not an atom of the node's Pi");
    return node_->action[atom_][m_->sizes.pair(u, v)];
  }
  int decode_inner(int y) override {
    y_ = y;
    const auto theta = theta1(xi_, y, std::span<const int>(node_->action[atom_]), *m_);
    return map_decode_u(theta, m_->distortion.rho1[t_ - 1]);
  }
  int decode_outer(int z) override {
    xi_ = xi_update(xi_, y_, z, std::span<const int>(node_->action[atom_]), *m_);
    auto child = node_->children.find(z);
    if (child == node_->children.end())
      throw UnknownAtom("structured strategy lacks the branch z=" + std::to_string(z));
    node_ = child->second.get();
    const auto theta = theta2(node_->pi, m_->sizes);
    return map_decode_v(theta, m_->distortion.rho2[t_++ - 1]);
  }

  const BeliefXi<S>& xi() const { return xi_; }
  const BeliefPi<S>& pi() const { return node_->pi; }

 private:
  std::shared_ptr<const StructuredStrategy<S>> s_;
  std::shared_ptr<const SystemModel<S>> m_;
  int t_ = 1;
  const PiNode<S>* node_ = nullptr;
  BeliefXi<S> xi_;
  int atom_ = -1;
  int y_ = 0;
};

}  // namespace detail

inline std::unique_ptr<Executable> make_executable(MarkovStrategy s) {
  check_strategy(s, s.sizes, s.horizon);
  return std::make_unique<detail::MarkovRunner>(std::make_shared<const MarkovStrategy>(std::move(s)));
}

inline std::unique_ptr<Executable> make_executable(GeneralStrategy s) {
  check_strategy(s, s.sizes, s.horizon);
  return std::make_unique<detail::GeneralRunner>(std::make_shared<const GeneralStrategy>(std::move(s)));
}

inline std::unique_ptr<Executable> make_executable(CoordinatorStrategy s) {
  check_strategy(s, s.sizes, s.horizon);
  return std::make_unique<detail::CoordinatorRunner>(
      std::make_shared<const CoordinatorStrategy>(std::move(s)));
}

template <class S>
std::unique_ptr<Executable> make_executable(StructuredStrategy<S> s, SystemModel<S> m) {
  detail::expect(s.sizes == m.sizes && s.horizon == m.horizon && s.root, "alphabets or horizon");
  return std::make_unique<detail::StructuredRunner<S>>(
      std::make_shared<const StructuredStrategy<S>>(std::move(s)),
      std::make_shared<const SystemModel<S>>(std::move(m)));
}

/// Table-driven strategies checked against a model before running.
template <class S>
std::unique_ptr<Executable> make_executable(MarkovStrategy s, const SystemModel<S>& m) {
  check_strategy(s, m.sizes, m.horizon);
  return make_executable(std::move(s));
}

template <class S>
std::unique_ptr<Executable> make_executable(GeneralStrategy s, const SystemModel<S>& m) {
  check_strategy(s, m.sizes, m.horizon);
  return make_executable(std::move(s));
}

template <class S>
std::unique_ptr<Executable> make_executable(CoordinatorStrategy s, const SystemModel<S>& m) {
  check_strategy(s, m.sizes, m.horizon);
  return make_executable(std::move(s));
}

// ---------------------------------------------------------------------------
// Decoders from the trajectory law

/// Optimal decoders for a fixed encoder: per decoder history, the
/// reconstruction minimizing expected distortion under the exact joint law of
/// that history and the current source symbol. Unreachable histories decode to 0.
template <class S>
struct MapDecoding {
  DecoderTables decoders;
  S cost = 0;  // expected total distortion with these decoders
  std::vector<S> rho1, rho2;  // per-stage parts of `cost`
};

template <class S>
MapDecoding<S> map_decoding(const SystemModel<S>& m, const Executable& encoder,
                            std::size_t cap = default_trajectory_cap) {
  const auto& a = m.sizes;
  const int T = m.horizon;
  std::vector<std::vector<S>> c1(T), c2(T);  // [t-1][history * |hat| + hat]
  for (int t = 1; t <= T; ++t) {
    c1[t - 1].assign(yz_count(a, t - 1) * a.y * a.uhat, S(0));
    c2[t - 1].assign(z_count(a, t) * a.vhat, S(0));
  }
  for_each_trajectory(m, encoder, cap, [&](std::span<const Step> steps, const S& p) {
    std::size_t h = 0, hz = 0;
    for (int t = 1; t <= T; ++t) {
      const Step& st = steps[t - 1];
      const std::size_t hi = h * a.y + st.y;
      hz = hz * a.z + st.z;
      const auto& r1 = m.distortion.rho1[t - 1];
      const auto& r2 = m.distortion.rho2[t - 1];
      for (int uh = 0; uh < a.uhat; ++uh)
        if (r1(st.u, uh) != 0) c1[t - 1][hi * a.uhat + uh] += p * r1(st.u, uh);
      for (int vh = 0; vh < a.vhat; ++vh)
        if (r2(st.v, vh) != 0) c2[t - 1][hz * a.vhat + vh] += p * r2(st.v, vh);
      h = h * a.outputs() + st.y * a.z + st.z;
    }
  });
  MapDecoding<S> out{DecoderTables::zeros(a, T), S(0), std::vector<S>(T, S(0)),
                     std::vector<S>(T, S(0))};
  auto argmin = [](const std::vector<S>& costs, std::size_t base, int n, S& best) {
    int arg = 0;
    best = costs[base];
    for (int k = 1; k < n; ++k)
      if (costs[base + k] < best) {
        best = costs[base + k];
        arg = k;
      }
    return arg;
  };
  for (int t = 1; t <= T; ++t) {
    S best;
    for (std::size_t hi = 0; hi < out.decoders.inner[t - 1].size(); ++hi) {
      out.decoders.inner[t - 1][hi] = argmin(c1[t - 1], hi * a.uhat, a.uhat, best);
      out.rho1[t - 1] += best;
    }
    for (std::size_t hz = 0; hz < out.decoders.outer[t - 1].size(); ++hz) {
      out.decoders.outer[t - 1][hz] = argmin(c2[t - 1], hz * a.vhat, a.vhat, best);
      out.rho2[t - 1] += best;
    }
    out.cost += out.rho1[t - 1] + out.rho2[t - 1];
  }
  return out;
}

template <class S>
MarkovStrategy with_map_decoders(const SystemModel<S>& m, MarkovStrategy s,
                                 std::size_t cap = default_trajectory_cap) {
  s.decoders = DecoderTables::zeros(s.sizes, s.horizon);
  auto exec = make_executable(s, m);
  s.decoders = map_decoding(m, *exec, cap).decoders;
  return s;
}

template <class S>
GeneralStrategy with_map_decoders(const SystemModel<S>& m, GeneralStrategy s,
                                  std::size_t cap = default_trajectory_cap) {
  s.decoders = DecoderTables::zeros(s.sizes, s.horizon);
  auto exec = make_executable(s, m);
  s.decoders = map_decoding(m, *exec, cap).decoders;
  return s;
}

/// Reads a Markov-class strategy off any executable by recording its
/// responses on every reachable trajectory. Entries never exercised are 0.
/// Throws if the executable's encoder depends on more than
/// (u_t, v_t, y^{t-1}, z^{t-1}).
template <class S>
MarkovStrategy tabulate_markov(const SystemModel<S>& m, const Executable& exec,
                               std::size_t cap = default_trajectory_cap) {
  const auto& a = m.sizes;
  MarkovStrategy s = MarkovStrategy::zeros(a, m.horizon);
  std::vector<std::vector<char>> seen_enc, seen_in, seen_out;
  for (int t = 1; t <= m.horizon; ++t) {
    seen_enc.emplace_back(s.encoder[t - 1].size(), 0);
    seen_in.emplace_back(s.decoders.inner[t - 1].size(), 0);
    seen_out.emplace_back(s.decoders.outer[t - 1].size(), 0);
  }
  auto record = [](std::vector<int>& table, std::vector<char>& seen, std::size_t i, int value) {
    if (seen[i] && table[i] != value)
      throw std::invalid_argument("executable is not of the Markov class");
    table[i] = value;
    seen[i] = 1;
  };
  for_each_trajectory(m, exec, cap, [&](std::span<const Step> steps, const S&) {
    std::size_t h = 0, hz = 0;
    for (int t = 1; t <= m.horizon; ++t) {
      const Step& st = steps[t - 1];
      record(s.encoder[t - 1], seen_enc[t - 1], h * a.pairs() + a.pair(st.u, st.v), st.x);
      record(s.decoders.inner[t - 1], seen_in[t - 1], h * a.y + st.y, st.uhat);
      hz = hz * a.z + st.z;
      record(s.decoders.outer[t - 1], seen_out[t - 1], hz, st.vhat);
      h = h * a.outputs() + st.y * a.z + st.z;
    }
  });
  return s;
}

}  // namespace bcast
