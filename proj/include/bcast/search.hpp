#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bcast/belief.hpp"
#include "bcast/errors.hpp"
#include "bcast/evaluate.hpp"
#include "bcast/history.hpp"
#include "bcast/model.hpp"
#include "bcast/random.hpp"
#include "bcast/runner.hpp"
#include "bcast/strategy.hpp"

namespace bcast {

inline constexpr std::size_t default_encoder_cap = std::size_t{1} << 22;
inline constexpr std::size_t default_action_cap = std::size_t{1} << 20;
inline constexpr std::size_t default_node_cap = 100'000;

template <class S>
struct SearchResult {
  std::string method;
  S best_cost = 0;
  std::size_t enumerated = 0;  // encoders (brute) or actions (dp) evaluated
  std::size_t nodes = 0;       // dp only: distinct Pi nodes
  double seconds = 0;
  std::optional<MarkovStrategy> markov;
  std::optional<StructuredStrategy<S>> structured;
};

namespace detail {

inline double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Number of encoders in a class with `digits` free entries over `base`
/// symbols, or nothing when it exceeds `cap`.
inline std::optional<std::size_t> class_size(std::size_t digits, int base, std::size_t cap) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < digits; ++i) {
    if (n > cap / static_cast<std::size_t>(base)) return std::nullopt;
    n *= static_cast<std::size_t>(base);
  }
  if (n > cap) return std::nullopt;
  return n;
}

// --- Brute force ----------------------------------------------------------

/// Model tables in the number type N used by the enumerator. For exact
/// models the enumerator runs on 128-bit integers: every kernel is scaled by
/// the lcm of its denominators, and stage-t costs carry the factor
/// (D_trans D_inner D_outer)^(T-t) so all stages share one denominator.
template <class N>
struct Tables {
  Alphabets a;
  int horizon = 1;
  std::vector<N> init, trans, qy, qz;
  std::vector<std::vector<N>> rho1, rho2;
  std::vector<N> stage_factor;
};

using i128 = __int128;

inline mpz_class lcm_of_denominators(std::span<const Rational> xs) {
  mpz_class l = 1;
  for (const auto& x : xs) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  return l;
}

inline i128 to_i128(const mpz_class& z) {
  mpz_class mag = abs(z);
  mpz_class hi = mag >> 64;
  mpz_class lo = mag - (hi << 64);
  i128 r = (static_cast<i128>(mpz_get_ui(hi.get_mpz_t())) << 64) |
           static_cast<i128>(static_cast<unsigned __int128>(mpz_get_ui(lo.get_mpz_t())));
  return sgn(z) < 0 ? -r : r;
}

inline mpz_class from_i128(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 mag = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  mpz_class hi = static_cast<unsigned long>(static_cast<std::uint64_t>(mag >> 64));
  mpz_class lo = static_cast<unsigned long>(static_cast<std::uint64_t>(mag));
  mpz_class r = (hi << 64) + lo;
  return neg ? mpz_class(-r) : r;
}

/// Integer tables and the common denominator of the total cost, or nothing
/// when the worst-case magnitude could overflow 128 bits.
inline std::optional<std::pair<Tables<i128>, mpz_class>> scale_exact(const SystemModel<Rational>& m) {
  const int T = m.horizon;
  const mpz_class d0 = lcm_of_denominators(m.source.initial);
  const mpz_class d1 = lcm_of_denominators(m.source.transition.data);
  const mpz_class d2 = lcm_of_denominators(m.channel.inner.data);
  const mpz_class d3 = lcm_of_denominators(m.channel.outer.data);
  mpz_class d4 = 1;
  for (const auto& r : m.distortion.rho1) d4 = lcm(d4, lcm_of_denominators(r.data));
  for (const auto& r : m.distortion.rho2) d4 = lcm(d4, lcm_of_denominators(r.data));

  mpz_class step = d1 * d2 * d3, probability = d0 * d2 * d3;
  for (int t = 1; t < T; ++t) probability *= step;
  const mpz_class denominator = probability * d4;
  Rational rho_bound = 0;
  for (const auto& r : m.distortion.rho1)
    for (const auto& x : r.data) rho_bound = std::max(rho_bound, Rational(abs(x)));
  for (const auto& r : m.distortion.rho2)
    for (const auto& x : r.data) rho_bound = std::max(rho_bound, Rational(abs(x)));
  const Rational rho_scaled = rho_bound * d4;
  const mpz_class rho_int = rho_scaled.get_num();
  // Sums of at most 2T stage costs, each at most probability * rho_int, plus
  // room for intermediate products.
  const mpz_class bound = probability * (rho_int + 1) * (2 * T + 1) * step;
  if (mpz_sizeinbase(bound.get_mpz_t(), 2) > 120) return std::nullopt;

  auto scaled = [](const std::vector<Rational>& xs, const mpz_class& d) {
    std::vector<i128> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
      Rational v = x * d;
      out.push_back(to_i128(v.get_num()));
    }
    return out;
  };
  Tables<i128> tb;
  tb.a = m.sizes;
  tb.horizon = T;
  tb.init = scaled(m.source.initial, d0);
  tb.trans = scaled(m.source.transition.data, d1);
  tb.qy = scaled(m.channel.inner.data, d2);
  tb.qz = scaled(m.channel.outer.data, d3);
  for (const auto& r : m.distortion.rho1) tb.rho1.push_back(scaled(r.data, d4));
  for (const auto& r : m.distortion.rho2) tb.rho2.push_back(scaled(r.data, d4));
  for (int t = 1; t <= T; ++t) {
    mpz_class f = 1;
    for (int k = t; k < T; ++k) f *= step;
    tb.stage_factor.push_back(to_i128(f));
  }
  return std::make_pair(std::move(tb), denominator);
}

template <class S>
Tables<S> plain_tables(const SystemModel<S>& m) {
  Tables<S> tb;
  tb.a = m.sizes;
  tb.horizon = m.horizon;
  tb.init = m.source.initial;
  tb.trans = m.source.transition.data;
  tb.qy = m.channel.inner.data;
  tb.qz = m.channel.outer.data;
  for (const auto& r : m.distortion.rho1) tb.rho1.push_back(r.data);
  for (const auto& r : m.distortion.rho2) tb.rho2.push_back(r.data);
  tb.stage_factor.assign(m.horizon, S(1));
  return tb;
}

/// Exact cost of Markov encoders under MAP decoding, evaluated forward over
/// channel-output histories and updated incrementally when only a few
/// encoder entries change.
///
///   pred_t[h][s]       = Pr(y^{t-1}, z^{t-1}, S_t = s)
///   alpha_t[h'][s]     = Pr(y^t, z^t, S_t = s)
///   inner_t[h, y]      = min_uhat sum_{z, s} alpha_t[(h, y, z)][s] rho1(u_s, uhat)
///   outer_t[z^t]       = min_vhat sum_{y^t, s} alpha_t[(y^t, z^t)][s] rho2(v_s, vhat)
template <class N>
class MarkovEnumerator {
 public:
  explicit MarkovEnumerator(const Tables<N>& tb) : tb_(tb), a_(tb.a), T_(tb.horizon) {
    np_ = a_.pairs();
    for (int t = 1; t <= T_; ++t) {
      const std::size_t prev = yz_count(a_, t - 1), cur = yz_count(a_, t);
      enc_.emplace_back(prev * np_, 0);
      pred_.emplace_back(prev * np_, N(0));
      alpha_.emplace_back(cur * np_, N(0));
      inner_.emplace_back(prev * a_.y, N(0));
      outer_.emplace_back(z_count(a_, t), N(0));
      dirty_.emplace_back(z_count(a_, t), 0);
      std::vector<std::vector<std::size_t>> groups(z_count(a_, t));
      for (std::size_t h = 0; h < cur; ++h) groups[z_part(h, t, a_)].push_back(h);
      members_.push_back(std::move(groups));
    }
    for (int t = 1; t <= T_; ++t) offsets_.push_back(t == 1 ? 0 : offsets_.back() + enc_[t - 2].size());
    digits_ = offsets_.back() + enc_.back().size();
  }

  std::size_t digits() const { return digits_; }

  /// Sets the encoder to the index-th table in lexicographic order (stage 1
  /// most significant) and evaluates it from scratch.
  void seek(std::size_t index) {
    for (std::size_t d = digits_; d-- > 0;) {
      digit(d) = static_cast<int>(index % a_.x);
      index /= a_.x;
    }
    for (std::size_t h = 0; h < yz_count(a_, 0); ++h) refresh(1, h);
    flush();
  }

  /// Moves to the next table; returns false after the last one.
  bool next() {
    std::size_t d = digits_;
    while (d-- > 0) {
      if (++digit(d) < a_.x) break;
      digit(d) = 0;
      if (d == 0) return false;
    }
    // Entries d.. changed; refresh each touched history once, earliest stage first.
    int last_t = 0;
    std::size_t last_h = SIZE_MAX;
    for (std::size_t e = d; e < digits_; ++e) {
      const auto [t, h] = locate(e);
      if (t == last_t && h == last_h) continue;
      if (t > last_t && last_t != 0 && covered(last_t, last_h, t, h)) continue;
      refresh(t, h);
      last_t = t;
      last_h = h;
    }
    flush();
    return true;
  }

  N total() const {
    N sum = 0;
    for (int t = 1; t <= T_; ++t) {
      N stage = 0;
      for (const auto& c : inner_[t - 1]) stage += c;
      for (const auto& c : outer_[t - 1]) stage += c;
      sum += stage * tb_.stage_factor[t - 1];
    }
    return sum;
  }

  const std::vector<std::vector<int>>& encoder() const { return enc_; }

 private:
  int& digit(std::size_t d) {
    const int t = locate(d).first;
    return enc_[t - 1][d - offsets_[t - 1]];
  }

  std::pair<int, std::size_t> locate(std::size_t d) const {
    int t = T_;
    while (offsets_[t - 1] > d) --t;
    return {t, (d - offsets_[t - 1]) / np_};
  }

  /// True when history h of stage t descends from history hp of stage tp.
  bool covered(int tp, std::size_t hp, int t, std::size_t h) const {
    for (int k = t; k > tp; --k) h /= a_.outputs();
    return h == hp;
  }

  /// Recomputes everything downstream of history h (length t-1) at stage t.
  void refresh(int t, std::size_t h) {
    auto pred = pred_[t - 1].begin() + static_cast<std::ptrdiff_t>(h * np_);
    if (t == 1) {
      for (int s = 0; s < np_; ++s) pred[s] = tb_.init[s];
    } else {
      const auto prev = alpha_[t - 2].begin() + static_cast<std::ptrdiff_t>(h * np_);
      for (int s = 0; s < np_; ++s) pred[s] = 0;
      for (int sp = 0; sp < np_; ++sp) {
        if (prev[sp] == 0) continue;
        for (int s = 0; s < np_; ++s) {
          const N& p = tb_.trans[static_cast<std::size_t>(sp) * np_ + s];
          if (p != 0) pred[s] += prev[sp] * p;
        }
      }
    }
    const int* enc = enc_[t - 1].data() + h * np_;
    std::vector<N> col(a_.u);
    for (int y = 0; y < a_.y; ++y) {
      for (auto& c : col) c = 0;
      for (int z = 0; z < a_.z; ++z) {
        const std::size_t child = h * a_.outputs() + y * a_.z + z;
        auto alpha = alpha_[t - 1].begin() + static_cast<std::ptrdiff_t>(child * np_);
        const N& qz = tb_.qz[static_cast<std::size_t>(y) * a_.z + z];
        for (int s = 0; s < np_; ++s) {
          if (pred[s] == 0 || qz == 0) {
            alpha[s] = 0;
            continue;
          }
          alpha[s] = pred[s] * tb_.qy[static_cast<std::size_t>(enc[s]) * a_.y + y] * qz;
          col[a_.u_of(s)] += alpha[s];
        }
        dirty_[t - 1][z_part(child, t, a_)] = 1;
      }
      inner_[t - 1][h * a_.y + y] = min_cost(col, tb_.rho1[t - 1], a_.uhat);
    }
    if (t < T_)
      for (int o = 0; o < a_.outputs(); ++o) refresh(t + 1, h * a_.outputs() + o);
  }

  void flush() {
    std::vector<N> col(a_.v);
    for (int t = 1; t <= T_; ++t)
      for (std::size_t hz = 0; hz < dirty_[t - 1].size(); ++hz) {
        if (!dirty_[t - 1][hz]) continue;
        dirty_[t - 1][hz] = 0;
        for (auto& c : col) c = 0;
        for (std::size_t h : members_[t - 1][hz]) {
          auto alpha = alpha_[t - 1].begin() + static_cast<std::ptrdiff_t>(h * np_);
          for (int s = 0; s < np_; ++s)
            if (alpha[s] != 0) col[a_.v_of(s)] += alpha[s];
        }
        outer_[t - 1][hz] = min_cost(col, tb_.rho2[t - 1], a_.vhat);
      }
  }

  static N min_cost(const std::vector<N>& mass, const std::vector<N>& rho, int nhat) {
    N best = 0;
    for (int wh = 0; wh < nhat; ++wh) {
      N c = 0;
      for (std::size_t w = 0; w < mass.size(); ++w)
        if (mass[w] != 0) c += mass[w] * rho[w * nhat + wh];
      if (wh == 0 || c < best) best = c;
    }
    return best;
  }

  const Tables<N>& tb_;
  Alphabets a_;
  int T_;
  int np_;
  std::vector<std::vector<int>> enc_;
  std::vector<std::vector<N>> pred_, alpha_, inner_, outer_;
  std::vector<std::vector<char>> dirty_;
  std::vector<std::vector<std::vector<std::size_t>>> members_;
  std::vector<std::size_t> offsets_;
  std::size_t digits_ = 0;
};

template <class N>
struct EnumerationBest {
  N cost{};
  std::size_t index = 0;
  std::vector<std::vector<int>> encoder;
};

/// Scans encoder indices in [begin, end) and keeps the first minimizer.
template <class N>
EnumerationBest<N> scan(const Tables<N>& tb, std::size_t begin, std::size_t end) {
  MarkovEnumerator<N> e(tb);
  e.seek(begin);
  EnumerationBest<N> best{e.total(), begin, e.encoder()};
  for (std::size_t i = begin + 1; i < end; ++i) {
    e.next();
    N c = e.total();
    if (c < best.cost) {
      best.cost = c;
      best.index = i;
      best.encoder = e.encoder();
    }
  }
  return best;
}

template <class N>
EnumerationBest<N> parallel_scan(const Tables<N>& tb, std::size_t count, unsigned workers) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(count, 1024))));
  std::vector<EnumerationBest<N>> parts(workers);
  std::vector<std::thread> pool;
  auto range = [&](unsigned w) {
    return std::pair{count * w / workers, count * (w + 1) / workers};
  };
  for (unsigned w = 1; w < workers; ++w)
    pool.emplace_back([&, w] {
      auto [b, e] = range(w);
      parts[w] = scan(tb, b, e);
    });
  {
    auto [b, e] = range(0);
    parts[0] = scan(tb, b, e);
  }
  for (auto& th : pool) th.join();
  EnumerationBest<N> best = std::move(parts[0]);
  for (unsigned w = 1; w < workers; ++w)
    if (parts[w].cost < best.cost) best = std::move(parts[w]);
  return best;
}

}  // namespace detail

struct SearchLimits {
  std::size_t encoders = default_encoder_cap;
  std::size_t trajectories = default_trajectory_cap;
  std::size_t actions = default_action_cap;
  std::size_t nodes = default_node_cap;
  unsigned workers = 1;
};

/// Exhaustive search over Markov encoders (current source pair and channel
/// output history) paired with MAP decoders. Ties keep the lexicographically
/// first encoder table, stage 1 most significant.
template <class S>
SearchResult<S> brute_force_markov(const SystemModel<S>& m, const SearchLimits& limits = {}) {
  const auto start = std::chrono::steady_clock::now();
  const auto& a = m.sizes;
  std::size_t digits = 0;
  for (int t = 1; t <= m.horizon; ++t) digits += MarkovStrategy::stage_entries(a, t);
  const auto count = detail::class_size(digits, a.x, limits.encoders);
  if (!count)
    throw CapExceeded("Markov encoder class has " + std::to_string(a.x) + "^" + std::to_string(digits) +
                      " members, over the cap of " + std::to_string(limits.encoders));

  SearchResult<S> r;
  r.method = "brute";
  r.enumerated = *count;
  std::vector<std::vector<int>> encoder;
  if constexpr (scalar_traits<S>::exact) {
    if (auto scaled = detail::scale_exact(m)) {
      auto best = detail::parallel_scan(scaled->first, *count, limits.workers);
      r.best_cost = Rational(detail::from_i128(best.cost), scaled->second);
      r.best_cost.canonicalize();
      encoder = std::move(best.encoder);
    } else {
      auto best = detail::parallel_scan(detail::plain_tables(m), *count, limits.workers);
      r.best_cost = best.cost;
      encoder = std::move(best.encoder);
    }
  } else {
    auto best = detail::parallel_scan(detail::plain_tables(m), *count, limits.workers);
    r.best_cost = best.cost;
    encoder = std::move(best.encoder);
  }
  MarkovStrategy s = MarkovStrategy::zeros(a, m.horizon);
  s.encoder = std::move(encoder);
  s.decoders = map_decoding(m, *make_executable(s, m), limits.trajectories).decoders;
  r.markov = std::move(s);
  r.seconds = detail::elapsed(start);
  return r;
}

// --- Coordinator dynamic program ------------------------------------------

namespace detail {

template <class S>
class CoordinatorDp {
 public:
  CoordinatorDp(const SystemModel<S>& m, const SearchLimits& limits)
      : m_(m), a_(m.sizes), limits_(limits), memo_(m.horizon + 1) {}

  struct Solved {
    S value;
    std::shared_ptr<PiNode<S>> node;
  };

  Solved solve(const BeliefPi<S>& pi) {
    auto& memo = memo_[pi.stage];
    const Key<S> key = pi_key(pi);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (++nodes_ > limits_.nodes)
      throw CapExceeded("Pi-belief tree exceeds the node cap of " + std::to_string(limits_.nodes));
    Solved out{S(0), std::make_shared<PiNode<S>>()};
    out.node->pi = pi;
    if (pi.stage < m_.horizon) expand(pi, out);
    memo.emplace(key, out);
    return out;
  }

  std::size_t nodes() const { return nodes_; }
  std::size_t actions() const { return actions_; }

 private:
  void expand(const BeliefPi<S>& pi, Solved& out) {
    const int t = pi.stage + 1;
    const int np = a_.pairs();
    const std::size_t K = pi.size();
    std::vector<std::vector<S>> pred;
    std::vector<std::pair<std::size_t, int>> free;  // (atom, pair) with positive predicted mass
    for (std::size_t k = 0; k < K; ++k) {
      pred.push_back(predict<S>(m_, pi.atoms[k].weight, pi.stage));
      for (int s = 0; s < np; ++s)
        if (pred[k][s] != 0) free.emplace_back(k, s);
    }
    const auto count = class_size(free.size(), a_.x, limits_.actions);
    if (!count)
      throw CapExceeded("partial encoder count " + std::to_string(a_.x) + "^" + std::to_string(free.size()) +
                        " at a Pi node exceeds the action cap of " + std::to_string(limits_.actions));

    AtomEncoder action(K, PairEncoder(np, 0));
    std::vector<S> joint(K * a_.y * np), col_u(a_.u), col_v(a_.v);
    bool have = false;
    S best = 0;
    std::vector<std::shared_ptr<PiNode<S>>> best_children;
    for (std::size_t i = 0; i < *count; ++i) {
      if (i > 0) {
        for (std::size_t d = free.size(); d-- > 0;) {
          int& x = action[free[d].first][free[d].second];
          if (++x < a_.x) break;
          x = 0;
        }
      }
      ++actions_;
      for (std::size_t k = 0; k < K; ++k)
        for (int y = 0; y < a_.y; ++y)
          for (int s = 0; s < np; ++s) {
            S& j = joint[(k * a_.y + y) * np + s];
            j = pred[k][s] == 0 ? S(0) : S(pred[k][s] * m_.channel.inner(action[k][s], y));
          }
      S cost = 0;
      for (std::size_t k = 0; k < K; ++k)
        for (int y = 0; y < a_.y; ++y) {
          for (auto& c : col_u) c = 0;
          for (int s = 0; s < np; ++s) col_u[a_.u_of(s)] += joint[(k * a_.y + y) * np + s];
          cost += min_cost(col_u, m_.distortion.rho1[t - 1]);
        }
      for (int z = 0; z < a_.z; ++z) {
        for (auto& c : col_v) c = 0;
        for (std::size_t k = 0; k < K; ++k)
          for (int y = 0; y < a_.y; ++y) {
            const S& qz = m_.channel.outer(y, z);
            if (qz == 0) continue;
            for (int s = 0; s < np; ++s) {
              const S& j = joint[(k * a_.y + y) * np + s];
              if (j != 0) col_v[a_.v_of(s)] += j * qz;
            }
          }
        cost += min_cost(col_v, m_.distortion.rho2[t - 1]);
      }
      std::vector<std::shared_ptr<PiNode<S>>> children(a_.z);
      if (t < m_.horizon) {
        for (int z = 0; z < a_.z; ++z) {
          S mass = 0;
          for (std::size_t k = 0; k < K; ++k)
            for (int y = 0; y < a_.y; ++y) {
              const S& qz = m_.channel.outer(y, z);
              if (qz == 0) continue;
              for (int s = 0; s < np; ++s) {
                const S& j = joint[(k * a_.y + y) * np + s];
                if (j != 0) mass += j * qz;
              }
            }
          if (mass == 0) continue;
          Solved child = solve(pi_update(pi, z, action, m_));
          cost += mass * child.value;
          children[z] = child.node;
        }
      }
      if (!have || cost < best) {
        have = true;
        best = cost;
        out.node->action = action;
        best_children = std::move(children);
      }
    }
    out.value = best;
    for (int z = 0; z < a_.z; ++z)
      if (best_children.size() > static_cast<std::size_t>(z) && best_children[z])
        out.node->children[z] = best_children[z];
    if (t == m_.horizon) {
      // Horizon nodes carry Pi_T for the last outer decision.
      for (int z = 0; z < a_.z; ++z) {
        try {
          out.node->children[z] = solve(pi_update(pi, z, out.node->action, m_)).node;
        } catch (const ZeroProbabilityObservation&) {
        }
      }
    }
  }

  static S min_cost(const std::vector<S>& mass, const Matrix<S>& rho) {
    S best = 0;
    for (int wh = 0; wh < rho.cols; ++wh) {
      S c = 0;
      for (int w = 0; w < rho.rows; ++w)
        if (mass[w] != 0) c += mass[w] * rho(w, wh);
      if (wh == 0 || c < best) best = c;
    }
    return best;
  }

  const SystemModel<S>& m_;
  Alphabets a_;
  SearchLimits limits_;
  std::vector<std::map<Key<S>, Solved>> memo_;
  std::size_t nodes_ = 0, actions_ = 0;
};

}  // namespace detail

/// Backward induction over the reachable Pi beliefs. At every node the
/// action is a partial encoder on the node's (atom, pair) support; decoders
/// are MAP. Nodes with equal Pi share one subtree.
template <class S>
SearchResult<S> coordinator_dp(const SystemModel<S>& m, const SearchLimits& limits = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::CoordinatorDp<S> dp(m, limits);
  auto root = dp.solve(pi_init(m));
  SearchResult<S> r;
  r.method = "dp";
  r.best_cost = root.value;
  r.enumerated = dp.actions();
  r.nodes = dp.nodes();
  r.structured = StructuredStrategy<S>{m.sizes, m.horizon, root.node};
  r.seconds = detail::elapsed(start);
  return r;
}

// --- Falsification --------------------------------------------------------

template <class S>
struct Counterexample {
  std::size_t sample = 0;
  std::string decoders;  // "own" or "map"
  S cost = 0;
  GeneralStrategy strategy;
};

template <class S>
struct FalsifyVerdict {
  bool falsified = false;
  std::size_t samples = 0;
  S optimum = 0;
  std::optional<S> best_sample;  // lowest cost seen over all samples and decoders
  std::optional<S> planted;      // cost of the planted optimum
  std::optional<Counterexample<S>> counterexample;
};

/// Samples uniformly random general strategies and reports the first one
/// whose exact cost, with its own decoders or with MAP decoders, falls below
/// `optimum` (strictly in exact mode, by more than 1e-9 otherwise). A planted
/// strategy, when given, is evaluated separately and reported.
template <class S>
FalsifyVerdict<S> falsify_structural(const SystemModel<S>& m, std::size_t n, std::uint64_t seed,
                                     const S& optimum, const std::optional<GeneralStrategy>& planted = {},
                                     std::size_t cap = default_trajectory_cap) {
  FalsifyVerdict<S> v;
  v.optimum = optimum;
  auto beats = [&](const S& c) {
    if constexpr (scalar_traits<S>::exact)
      return c < optimum;
    else
      return c < optimum - 1e-9;
  };
  if (planted) v.planted = exact_cost(m, *make_executable(*planted, m), cap).total;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    GeneralStrategy g = random_general(rng, m.sizes, m.horizon);
    auto exec = make_executable(g, m);
    const S own = exact_cost(m, *exec, cap).total;
    const S map = map_decoding(m, *exec, cap).cost;
    ++v.samples;
    auto record = [&](const S& cost, const char* kind) {
      if (!v.best_sample || cost < *v.best_sample) v.best_sample = cost;
      if (v.falsified || !beats(cost)) return;
      v.falsified = true;
      GeneralStrategy shown = std::string(kind) == "map" ? with_map_decoders(m, g, cap) : g;
      v.counterexample = Counterexample<S>{i, kind, cost, std::move(shown)};
    };
    record(own, "own");
    record(map, "map");
    if (v.falsified) break;
  }
  return v;
}

/// Runs the coordinator program for the optimum and plants its Markov
/// tabulation among the samples.
template <class S>
FalsifyVerdict<S> falsify_structural(const SystemModel<S>& m, std::size_t n, std::uint64_t seed,
                                     const SearchLimits& limits = {}) {
  auto dp = coordinator_dp(m, limits);
  auto exec = make_executable(*dp.structured, m);
  auto planted = to_general(tabulate_markov(m, *exec, limits.trajectories));
  return falsify_structural(m, n, seed, dp.best_cost, std::optional<GeneralStrategy>(std::move(planted)),
                            limits.trajectories);
}

}  // namespace bcast
