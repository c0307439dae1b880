#pragma once

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcast/belief.hpp"
#include "bcast/history.hpp"
#include "bcast/model.hpp"

namespace bcast {

/// Decoder lookup tables shared by the table-driven strategy classes.
///   inner[t-1][h(y^{t-1}, z^{t-1}) |Y| + y_t] -> uhat
///   outer[t-1][h(z^t)]                        -> vhat
struct DecoderTables {
  std::vector<std::vector<int>> inner;
  std::vector<std::vector<int>> outer;

  static DecoderTables zeros(const Alphabets& a, int horizon) {
    DecoderTables d;
    for (int t = 1; t <= horizon; ++t) {
      d.inner.emplace_back(yz_count(a, t - 1) * a.y, 0);
      d.outer.emplace_back(z_count(a, t), 0);
    }
    return d;
  }

  bool operator==(const DecoderTables&) const = default;
};

/// Encoder sees only the current source pair and the channel-output history:
///   encoder[t-1][h(y^{t-1}, z^{t-1}) |UV| + s] -> x
struct MarkovStrategy {
  Alphabets sizes;
  int horizon = 1;
  std::vector<std::vector<int>> encoder;
  DecoderTables decoders;

  static std::size_t stage_entries(const Alphabets& a, int t) {
    return yz_count(a, t - 1) * a.pairs();
  }
  static MarkovStrategy zeros(const Alphabets& a, int horizon) {
    MarkovStrategy m{a, horizon, {}, DecoderTables::zeros(a, horizon)};
    for (int t = 1; t <= horizon; ++t) m.encoder.emplace_back(stage_entries(a, t), 0);
    return m;
  }

  bool operator==(const MarkovStrategy&) const = default;
};

/// Encoder sees the full past: source pairs, channel inputs and outputs.
///   encoder[t-1][g * |UV| + s_t] -> x, with g the mixed-radix index of
///   ((s_k, x_k, y_k, z_k))_{k<t}, earliest stage most significant.
struct GeneralStrategy {
  Alphabets sizes;
  int horizon = 1;
  std::vector<std::vector<int>> encoder;
  DecoderTables decoders;

  static std::size_t stage_entries(const Alphabets& a, int t) {
    return ipow(static_cast<std::size_t>(a.pairs()) * a.x * a.y * a.z, t - 1) * a.pairs();
  }
  static GeneralStrategy zeros(const Alphabets& a, int horizon) {
    GeneralStrategy g{a, horizon, {}, DecoderTables::zeros(a, horizon)};
    for (int t = 1; t <= horizon; ++t) g.encoder.emplace_back(stage_entries(a, t), 0);
    return g;
  }

  bool operator==(const GeneralStrategy&) const = default;
};

/// Rules a coordinator hands to the encoder and the inner decoder for one stage.
struct PartialFunctions {
  PairEncoder encoder;     // (u, v) -> x
  std::vector<int> inner;  // y -> uhat

  bool operator==(const PartialFunctions&) const = default;
};

/// Coordinator observing the shared history (y^{t-1}, z^{t-1}):
///   rules[t-1][h(y^{t-1}, z^{t-1})] -> partial functions
/// The outer decoder keeps its own tables.
struct CoordinatorStrategy {
  Alphabets sizes;
  int horizon = 1;
  std::vector<std::vector<PartialFunctions>> rules;
  std::vector<std::vector<int>> outer;

  bool operator==(const CoordinatorStrategy&) const = default;
};

/// Node of the reachable Pi-belief tree. A node of depth t-1 carries Pi_{t-1}
/// and the stage-t partial encoder on U x V x (its atoms); nodes at the
/// horizon carry only Pi_T (needed for the last outer decision).
template <class S>
struct PiNode {
  BeliefPi<S> pi;
  AtomEncoder action;
  std::map<int, std::shared_ptr<PiNode>> children;  // by z

  int depth() const { return pi.stage; }
};

/// X_t = chat_t(Pi_{t-1})(U_t, V_t, Xi_{t-1}); both decoders are MAP on the
/// compressed beliefs.
template <class S>
struct StructuredStrategy {
  Alphabets sizes;
  int horizon = 1;
  std::shared_ptr<const PiNode<S>> root;

  std::size_t node_count() const {
    std::size_t n = 0;
    auto walk = [&](auto&& self, const PiNode<S>& node) -> void {
      ++n;
      for (const auto& [z, child] : node.children) self(self, *child);
    };
    if (root) walk(walk, *root);
    return n;
  }
};

// ---------------------------------------------------------------------------
// MAP decoders

/// argmin over reconstructions of sum_w rho(w, what) theta(w); ties go to the
/// lowest reconstruction index.
template <class S>
int map_decode(std::span<const S> theta, const Matrix<S>& rho) {
  int best = 0;
  S best_value = 0;
  for (int wh = 0; wh < rho.cols; ++wh) {
    S value = 0;
    for (int w = 0; w < rho.rows; ++w)
      if (theta[w] != 0) value += rho(w, wh) * theta[w];
    if (wh == 0 || value < best_value) {
      best = wh;
      best_value = value;
    }
  }
  return best;
}

template <class S>
int map_decode_u(const BeliefThetaU<S>& theta, const Matrix<S>& rho1_t) {
  return map_decode<S>(theta.dist, rho1_t);
}

template <class S>
int map_decode_v(const BeliefThetaV<S>& theta, const Matrix<S>& rho2_t) {
  return map_decode<S>(theta.dist, rho2_t);
}

// ---------------------------------------------------------------------------
// Shape checks

namespace detail {

inline void expect(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("strategy does not fit the model: " + what);
}

inline void check_decoders(const DecoderTables& d, const Alphabets& a, int horizon) {
  expect(d.inner.size() == static_cast<std::size_t>(horizon), "inner decoder stages");
  expect(d.outer.size() == static_cast<std::size_t>(horizon), "outer decoder stages");
  for (int t = 1; t <= horizon; ++t) {
    expect(d.inner[t - 1].size() == yz_count(a, t - 1) * a.y, "inner decoder table size");
    expect(d.outer[t - 1].size() == z_count(a, t), "outer decoder table size");
    for (int x : d.inner[t - 1]) expect(x >= 0 && x < a.uhat, "inner reconstruction symbol");
    for (int x : d.outer[t - 1]) expect(x >= 0 && x < a.vhat, "outer reconstruction symbol");
  }
}

template <class Tables>
void check_encoder_tables(const Tables& enc, const Alphabets& a, int horizon, auto&& entries) {
  expect(enc.size() == static_cast<std::size_t>(horizon), "encoder stages");
  for (int t = 1; t <= horizon; ++t) {
    expect(enc[t - 1].size() == entries(a, t), "encoder table size");
    for (int x : enc[t - 1]) expect(x >= 0 && x < a.x, "channel input symbol");
  }
}

}  // namespace detail

inline void check_strategy(const MarkovStrategy& s, const Alphabets& a, int horizon) {
  detail::expect(s.sizes == a && s.horizon == horizon, "alphabets or horizon");
  detail::check_encoder_tables(s.encoder, a, horizon, MarkovStrategy::stage_entries);
  detail::check_decoders(s.decoders, a, horizon);
}

inline void check_strategy(const GeneralStrategy& s, const Alphabets& a, int horizon) {
  detail::expect(s.sizes == a && s.horizon == horizon, "alphabets or horizon");
  detail::check_encoder_tables(s.encoder, a, horizon, GeneralStrategy::stage_entries);
  detail::check_decoders(s.decoders, a, horizon);
}

inline void check_strategy(const CoordinatorStrategy& s, const Alphabets& a, int horizon) {
  detail::expect(s.sizes == a && s.horizon == horizon, "alphabets or horizon");
  detail::expect(s.rules.size() == static_cast<std::size_t>(horizon), "coordinator stages");
  detail::expect(s.outer.size() == static_cast<std::size_t>(horizon), "outer decoder stages");
  for (int t = 1; t <= horizon; ++t) {
    detail::expect(s.rules[t - 1].size() == yz_count(a, t - 1), "coordinator table size");
    for (const auto& r : s.rules[t - 1]) {
      detail::expect(r.encoder.size() == static_cast<std::size_t>(a.pairs()), "partial encoder size");
      detail::expect(r.inner.size() == static_cast<std::size_t>(a.y), "partial decoder size");
    }
    detail::expect(s.outer[t - 1].size() == z_count(a, t), "outer decoder table size");
  }
}

// ---------------------------------------------------------------------------
// Implementability maps

/// The coordinator that knows (y^{t-1}, z^{t-1}) prescribes
/// chat(u, v) = c_t(u, v, y^{t-1}, z^{t-1}) and ghat(y) = g_{1,t}(y, y^{t-1}, z^{t-1}).
inline CoordinatorStrategy lift_to_coordinator(const MarkovStrategy& s) {
  const auto& a = s.sizes;
  CoordinatorStrategy c{a, s.horizon, {}, s.decoders.outer};
  for (int t = 1; t <= s.horizon; ++t) {
    std::vector<PartialFunctions> stage;
    for (std::size_t h = 0; h < yz_count(a, t - 1); ++h) {
      PartialFunctions r;
      const auto enc = s.encoder[t - 1].begin() + static_cast<std::ptrdiff_t>(h * a.pairs());
      r.encoder.assign(enc, enc + a.pairs());
      const auto dec = s.decoders.inner[t - 1].begin() + static_cast<std::ptrdiff_t>(h * a.y);
      r.inner.assign(dec, dec + a.y);
      stage.push_back(std::move(r));
    }
    c.rules.push_back(std::move(stage));
  }
  return c;
}

/// The encoder and inner decoder each replay the coordinator's prescription
/// for the realized shared history and apply it to their private symbol.
inline MarkovStrategy lower_from_coordinator(const CoordinatorStrategy& c) {
  const auto& a = c.sizes;
  MarkovStrategy s = MarkovStrategy::zeros(a, c.horizon);
  s.decoders.outer = c.outer;
  for (int t = 1; t <= c.horizon; ++t)
    for (std::size_t h = 0; h < yz_count(a, t - 1); ++h) {
      const auto& r = c.rules[t - 1][h];
      for (int p = 0; p < a.pairs(); ++p) s.encoder[t - 1][h * a.pairs() + p] = r.encoder[p];
      for (int y = 0; y < a.y; ++y) s.decoders.inner[t - 1][h * a.y + y] = r.inner[y];
    }
  return s;
}

/// Embeds a Markov encoder in the general class (it ignores past source
/// symbols and channel inputs).
inline GeneralStrategy to_general(const MarkovStrategy& s) {
  const auto& a = s.sizes;
  GeneralStrategy g = GeneralStrategy::zeros(a, s.horizon);
  g.decoders = s.decoders;
  const std::size_t step = static_cast<std::size_t>(a.pairs()) * a.x * a.y * a.z;
  for (int t = 1; t <= s.horizon; ++t) {
    const std::size_t histories = ipow(step, t - 1);
    for (std::size_t gi = 0; gi < histories; ++gi) {
      // Recover (y^{t-1}, z^{t-1}) from the general history index.
      std::size_t h = 0, rest = gi, scale = 1;
      for (int k = 0; k < t - 1; ++k) {
        const std::size_t tuple = rest % step;
        rest /= step;
        const std::size_t yz = tuple % a.outputs();  // (y_k, z_k) are the trailing digits
        h += yz * scale;
        scale *= a.outputs();
      }
      for (int p = 0; p < a.pairs(); ++p)
        g.encoder[t - 1][gi * a.pairs() + p] = s.encoder[t - 1][h * a.pairs() + p];
    }
  }
  return g;
}

}  // namespace bcast
