#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bcast/errors.hpp"
#include "bcast/executable.hpp"
#include "bcast/model.hpp"
#include "bcast/trajectory.hpp"

namespace bcast {

enum class CostMode { exact, monte_carlo };

/// Expected total distortion with its per-stage split.
template <class S>
struct CostReport {
  CostMode mode = CostMode::exact;
  S total = 0;
  std::vector<S> rho1, rho2;  // per stage
  std::size_t samples = 0;    // monte carlo only
  double std_error = 0;
  std::uint64_t seed = 0;

  S stage_total(int t) const { return rho1[t - 1] + rho2[t - 1]; }
};

/// Sum of distortions over every trajectory weighted by its exact probability.
template <class S>
CostReport<S> exact_cost(const SystemModel<S>& m, const Executable& exec,
                         std::size_t cap = default_trajectory_cap) {
  const int T = m.horizon;
  CostReport<S> r;
  r.rho1.assign(T, S(0));
  r.rho2.assign(T, S(0));
  for_each_trajectory(m, exec, cap, [&](std::span<const Step> steps, const S& p) {
    for (int t = 0; t < T; ++t) {
      const Step& st = steps[t];
      const S& d1 = m.distortion.rho1[t](st.u, st.uhat);
      const S& d2 = m.distortion.rho2[t](st.v, st.vhat);
      if (d1 != 0) r.rho1[t] += p * d1;
      if (d2 != 0) r.rho2[t] += p * d2;
    }
  });
  for (int t = 0; t < T; ++t) r.total += r.rho1[t] + r.rho2[t];
  return r;
}

// ---------------------------------------------------------------------------
// Simulation

struct Episode {
  std::vector<Step> steps;
  std::uint64_t seed = 0;
};

namespace detail {

inline constexpr std::size_t mc_chunk = 4096;

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// Double-precision copy of the kernels used for sampling.
struct SamplingKernels {
  Alphabets sizes;
  int horizon = 1;
  Matrix<double> transition, inner, outer;
  std::vector<double> initial;
  std::vector<Matrix<double>> rho1, rho2;

  template <class S>
  explicit SamplingKernels(const SystemModel<S>& m) : sizes(m.sizes), horizon(m.horizon) {
    auto conv = [](const Matrix<S>& src) {
      Matrix<double> out(src.rows, src.cols);
      for (std::size_t i = 0; i < src.data.size(); ++i) out.data[i] = to_double(src.data[i]);
      return out;
    };
    transition = conv(m.source.transition);
    inner = conv(m.channel.inner);
    outer = conv(m.channel.outer);
    for (const auto& p : m.source.initial) initial.push_back(to_double(p));
    for (const auto& r : m.distortion.rho1) rho1.push_back(conv(r));
    for (const auto& r : m.distortion.rho2) rho2.push_back(conv(r));
  }

  /// One episode. Every stage consumes exactly three uniforms (source,
  /// inner noise, outer noise) in that order, whatever the strategy does, so
  /// strategies sharing a generator face common random numbers.
  void run(Executable& runner, std::mt19937_64& rng, std::vector<Step>& steps) const {
    runner.reset();
    steps.resize(horizon);
    int s = 0;
    for (int t = 1; t <= horizon; ++t) {
      const double w_src = uniform01(rng), w_y = uniform01(rng), w_z = uniform01(rng);
      s = inverse_cdf<double>(t == 1 ? std::span<const double>(initial) : transition.row(s), w_src);
      Step& st = steps[t - 1];
      st.u = sizes.u_of(s);
      st.v = sizes.v_of(s);
      st.x = runner.encode(st.u, st.v);
      st.y = inverse_cdf<double>(inner.row(st.x), w_y);
      st.uhat = runner.decode_inner(st.y);
      st.z = inverse_cdf<double>(outer.row(st.y), w_z);
      st.vhat = runner.decode_outer(st.z);
    }
  }
};

}  // namespace detail

template <class S>
Episode simulate_episode(const SystemModel<S>& m, const Executable& exec, std::uint64_t seed) {
  detail::SamplingKernels k(m);
  auto rng = detail::seeded(seed, 0);
  auto runner = exec.clone();
  Episode e{{}, seed};
  k.run(*runner, rng, e.steps);
  return e;
}

/// Sample mean of the total distortion over n episodes. Episodes are drawn
/// in fixed chunks with per-chunk generators and reduced in chunk order, so
/// the report depends only on (model, strategy, n, seed).
template <class S>
CostReport<double> monte_carlo_cost(const SystemModel<S>& m, const Executable& exec, std::size_t n,
                                    std::uint64_t seed, unsigned workers = 1) {
  if (n == 0) throw std::invalid_argument("monte carlo needs at least one sample");
  constexpr std::size_t chunk = detail::mc_chunk;
  const int T = m.horizon;
  const detail::SamplingKernels k(m);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  struct Partial {
    std::vector<double> rho1, rho2;
    double sum = 0, sumsq = 0;
  };
  std::vector<Partial> partials(chunks);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    auto runner = exec.clone();
    std::vector<Step> steps;
    for (std::size_t c; (c = next++) < chunks;) {
      Partial p{std::vector<double>(T, 0.0), std::vector<double>(T, 0.0)};
      auto rng = detail::seeded(seed, c + 1);
      const std::size_t count = std::min(chunk, n - c * chunk);
      for (std::size_t i = 0; i < count; ++i) {
        k.run(*runner, rng, steps);
        double episode = 0;
        for (int t = 0; t < T; ++t) {
          const double d1 = k.rho1[t](steps[t].u, steps[t].uhat);
          const double d2 = k.rho2[t](steps[t].v, steps[t].vhat);
          p.rho1[t] += d1;
          p.rho2[t] += d2;
          episode += d1 + d2;
        }
        p.sum += episode;
        p.sumsq += episode * episode;
      }
      partials[c] = std::move(p);
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  CostReport<double> r;
  r.mode = CostMode::monte_carlo;
  r.samples = n;
  r.seed = seed;
  r.rho1.assign(T, 0.0);
  r.rho2.assign(T, 0.0);
  double sum = 0, sumsq = 0;
  for (const auto& p : partials) {
    for (int t = 0; t < T; ++t) {
      r.rho1[t] += p.rho1[t];
      r.rho2[t] += p.rho2[t];
    }
    sum += p.sum;
    sumsq += p.sumsq;
  }
  const double dn = static_cast<double>(n);
  for (int t = 0; t < T; ++t) {
    r.rho1[t] /= dn;
    r.rho2[t] /= dn;
    r.total += r.rho1[t] + r.rho2[t];
  }
  if (n > 1) {
    const double var = std::max(0.0, (sumsq - sum * sum / dn) / (dn - 1));
    r.std_error = std::sqrt(var / dn);
  }
  return r;
}

/// The first k episodes of the stream monte_carlo_cost draws for `seed`.
template <class S>
std::vector<Episode> trace_episodes(const SystemModel<S>& m, const Executable& exec, std::size_t k,
                                    std::uint64_t seed) {
  const detail::SamplingKernels kernels(m);
  auto runner = exec.clone();
  std::vector<Episode> out;
  std::mt19937_64 rng;
  for (std::size_t i = 0; i < k; ++i) {
    if (i % detail::mc_chunk == 0) rng = detail::seeded(seed, i / detail::mc_chunk + 1);
    Episode e{{}, seed};
    kernels.run(*runner, rng, e.steps);
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory equivalence

struct Divergence {
  int stage = 0;
  std::string field;
  int a = 0, b = 0;
  std::vector<Step> history;  // strategy a's steps up to and including `stage`
};

struct EquivalenceVerdict {
  bool equivalent = true;
  std::size_t realizations = 0;
  std::optional<Divergence> divergence;
};

/// Co-executes two strategies on every realization of the source and of the
/// channel noise. Noise is the finite cell decomposition of the inverse-CDF
/// coupling, so both strategies see the same noise value even when they send
/// different inputs. Reports the first divergent symbol in stage order.
inline EquivalenceVerdict trajectory_equivalence(const SystemModel<Rational>& m, const Executable& a,
                                                 const Executable& b,
                                                 std::size_t cap = default_trajectory_cap) {
  const auto n1 = noise_cells(m.channel.inner);
  const auto n2 = noise_cells(m.channel.outer);
  const auto& al = m.sizes;
  EquivalenceVerdict verdict;
  std::vector<Step> sa(m.horizon), sb(m.horizon);

  auto diverge = [&](int t, const char* field, int va, int vb) {
    verdict.equivalent = false;
    verdict.divergence = Divergence{t, field, va, vb, {sa.begin(), sa.begin() + t}};
  };

  auto walk = [&](auto&& self, int t, const Executable& ra, const Executable& rb, int prev) -> void {
    if (!verdict.equivalent) return;
    if (t > m.horizon) {
      if (++verdict.realizations > cap)
        throw CapExceeded("realization count exceeds cap of " + std::to_string(cap));
      return;
    }
    const auto row = m.source_row(t, prev);
    for (int s = 0; s < al.pairs() && verdict.equivalent; ++s) {
      if (row[s] == 0) continue;
      const int u = al.u_of(s), v = al.v_of(s);
      auto ea = ra.clone(), eb = rb.clone();
      const int xa = ea->encode(u, v), xb = eb->encode(u, v);
      sa[t - 1] = Step{u, v, xa, 0, 0, 0, 0};
      if (xa != xb) return diverge(t, "x", xa, xb);
      for (int c1 = 0; c1 < n1.count() && verdict.equivalent; ++c1) {
        const int ya = n1.output(xa, c1), yb = n1.output(xb, c1);
        sa[t - 1].y = ya;
        if (ya != yb) return diverge(t, "y", ya, yb);
        auto ia = ea->clone(), ib = eb->clone();
        const int uha = ia->decode_inner(ya), uhb = ib->decode_inner(yb);
        sa[t - 1].uhat = uha;
        if (uha != uhb) return diverge(t, "uhat", uha, uhb);
        for (int c2 = 0; c2 < n2.count() && verdict.equivalent; ++c2) {
          const int za = n2.output(ya, c2), zb = n2.output(yb, c2);
          sa[t - 1].z = za;
          if (za != zb) return diverge(t, "z", za, zb);
          auto oa = ia->clone(), ob = ib->clone();
          const int vha = oa->decode_outer(za), vhb = ob->decode_outer(zb);
          sa[t - 1].vhat = vha;
          if (vha != vhb) return diverge(t, "vhat", vha, vhb);
          self(self, t + 1, *oa, *ob, s);
        }
      }
    }
  };
  auto ra = a.clone(), rb = b.clone();
  ra->reset();
  rb->reset();
  walk(walk, 1, *ra, *rb, 0);
  return verdict;
}

}  // namespace bcast
