#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bcast/errors.hpp"
#include "bcast/executable.hpp"
#include "bcast/model.hpp"

namespace bcast {

inline constexpr std::size_t default_trajectory_cap = 10'000'000;

/// Realized symbols of one stage.
struct Step {
  int u = 0, v = 0, x = 0, y = 0, z = 0, uhat = 0, vhat = 0;
  bool operator==(const Step&) const = default;
};

template <class S>
struct Trajectory {
  std::vector<Step> steps;
  S prob;
};

namespace detail {

inline void check_symbol(int value, int size, const char* what) {
  if (value < 0 || value >= size)
    throw Error(std::string("strategy emitted out-of-range ") + what + " " + std::to_string(value));
}

template <class S, class Visit>
struct TrajectoryWalker {
  const SystemModel<S>& model;
  std::size_t cap;
  Visit& visit;
  std::vector<Step> steps;
  std::size_t count = 0;

  void walk(int t, const Executable& runner, int prev_pair, const S& prob) {
    const auto& a = model.sizes;
    if (t > model.horizon) {
      if (++count > cap)
        throw CapExceeded("trajectory count exceeds cap of " + std::to_string(cap));
      visit(std::span<const Step>(steps), prob);
      return;
    }
    const auto row = model.source_row(t, prev_pair);
    for (int s = 0; s < a.pairs(); ++s) {
      if (row[s] == 0) continue;
      const S ps = prob * row[s];
      auto enc = runner.clone();
      const int u = a.u_of(s), v = a.v_of(s);
      const int x = enc->encode(u, v);
      check_symbol(x, a.x, "channel input");
      for (int y = 0; y < a.y; ++y) {
        const S& qy = model.channel.inner(x, y);
        if (qy == 0) continue;
        auto inner = enc->clone();
        const int uhat = inner->decode_inner(y);
        check_symbol(uhat, a.uhat, "inner reconstruction");
        const S py = ps * qy;
        for (int z = 0; z < a.z; ++z) {
          const S& qz = model.channel.outer(y, z);
          if (qz == 0) continue;
          auto outer = inner->clone();
          const int vhat = outer->decode_outer(z);
          check_symbol(vhat, a.vhat, "outer reconstruction");
          steps[t - 1] = Step{u, v, x, y, z, uhat, vhat};
          walk(t + 1, *outer, s, py * qz);
        }
      }
    }
  }
};

}  // namespace detail

/// Calls `visit(steps, prob)` for every complete trajectory of positive
/// probability under `exec`. Throws CapExceeded once more than `cap`
/// trajectories have been produced. Returns the trajectory count.
template <class S, class Visit>
std::size_t for_each_trajectory(const SystemModel<S>& model, const Executable& exec, std::size_t cap,
                                Visit&& visit) {
  detail::TrajectoryWalker<S, std::remove_reference_t<Visit>> walker{
      model, cap, visit, std::vector<Step>(model.horizon)};
  auto start = exec.clone();
  start->reset();
  walker.walk(1, *start, 0, S(1));
  return walker.count;
}

/// Every trajectory (source, channel outputs and the strategy's responses)
/// with its exact probability.
template <class S>
std::vector<Trajectory<S>> reachable_trajectory_support(const SystemModel<S>& model,
                                                        const Executable& exec,
                                                        std::size_t cap = default_trajectory_cap) {
  std::vector<Trajectory<S>> out;
  for_each_trajectory(model, exec, cap, [&](std::span<const Step> steps, const S& p) {
    out.push_back({{steps.begin(), steps.end()}, p});
  });
  return out;
}

}  // namespace bcast
