// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "bcast/bcast.hpp"
#include "bcast/cli.hpp"

using namespace bcast;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

// 1. Recursive filters against the brute-force oracle.
Outcome filters() {
  std::mt19937_64 rng(1001);
  double worst_exact = 0, worst_float = 0;
  std::size_t histories = 0;
  for (int k = 0; k < 100; ++k) {
    const auto m = random_model(rng, random_sizes(rng, 3), 1 + k % 3);
    const auto e = filter_trial(m, rng, Arithmetic::rational);
    const auto f = filter_trial(m, rng, Arithmetic::floating);
    worst_exact = std::max(worst_exact, e.worst());
    worst_float = std::max(worst_float, f.worst());
    histories += e.histories + f.histories;
  }
  std::ostringstream d;
  d << "100 instances, " << histories << " histories, rational max deviation " << worst_exact
    << ", float max deviation " << worst_float << " (tolerance 0 / 1e-9)";
  return {worst_exact == 0 && worst_float <= 1e-9, d.str()};
}

// 2. Coordinator program against exhaustive Markov search.
Outcome dp_vs_brute() {
  std::mt19937_64 rng(1002);
  int equal = 0, total = 0;
  std::string first_bad;
  auto run = [&](int T, int count) {
    for (int k = 0; k < count; ++k) {
      const auto m = random_binary_model(rng, T, k % 2 == 1);
      const auto b = brute_force_markov(m).best_cost;
      const auto d = coordinator_dp(m).best_cost;
      ++total;
      if (b == d)
        ++equal;
      else if (first_bad.empty())
        first_bad = "; first mismatch T=" + std::to_string(T) + " brute " + b.get_str() + " dp " + d.get_str();
    }
  };
  run(2, 20);
  run(1, 50);
  return {equal == total, std::to_string(equal) + "/" + std::to_string(total) + " exactly equal" + first_bad};
}

// 3. Implementability maps preserve realizations and cost.
Outcome implementability() {
  std::mt19937_64 rng(1003);
  int ok = 0;
  const int n = 50;
  std::string first_bad;
  for (int k = 0; k < n; ++k) {
    const auto m = random_binary_model(rng, 1 + k % 3, k % 2 == 0);
    const auto s = random_markov(rng, m.sizes, m.horizon);
    const auto c = lift_to_coordinator(s);
    const auto back = lower_from_coordinator(c);
    const auto es = make_executable(s, m), ec = make_executable(c, m), eb = make_executable(back, m);
    const bool round = trajectory_equivalence(m, *es, *eb).equivalent;
    const bool lift = trajectory_equivalence(m, *es, *ec).equivalent;
    const bool lower = trajectory_equivalence(m, *ec, *eb).equivalent;
    const bool cost = exact_cost(m, *es).total == exact_cost(m, *eb).total &&
                      exact_cost(m, *es).total == exact_cost(m, *ec).total;
    if (round && lift && lower && cost)
      ++ok;
    else if (first_bad.empty())
      first_bad = "; first failure at instance " + std::to_string(k);
  }
  return {ok == n, std::to_string(ok) + "/" + std::to_string(n) +
                       " strategies equivalent after lift, lower and round trip with equal exact cost" + first_bad};
}

// Exhaustive minimum over decoder tables for a single-stage encoder, from
// the joint law written out directly.
Rational best_decoders_cost(const SystemModel<Rational>& m, const std::vector<int>& enc) {
  const auto& a = m.sizes;
  std::vector<Rational> puy(a.u * a.y, Rational(0)), pvz(a.v * a.z, Rational(0));
  for (int s = 0; s < a.pairs(); ++s)
    for (int y = 0; y < a.y; ++y)
      for (int z = 0; z < a.z; ++z) {
        const Rational p = m.source.initial[s] * m.channel.inner(enc[s], y) * m.channel.outer(y, z);
        puy[a.u_of(s) * a.y + y] += p;
        pvz[a.v_of(s) * a.z + z] += p;
      }
  auto table_min = [](int n_obs, int n_src, int n_hat, const std::vector<Rational>& joint,
                      const Matrix<Rational>& rho) {
    std::optional<Rational> best;
    std::vector<int> g(n_obs, 0);
    while (true) {
      Rational c = 0;
      for (int o = 0; o < n_obs; ++o)
        for (int w = 0; w < n_src; ++w) c += joint[w * n_obs + o] * rho(w, g[o]);
      if (!best || c < *best) best = c;
      int i = 0;
      while (i < n_obs && ++g[i] == n_hat) g[i++] = 0;
      if (i == n_obs) return *best;
    }
  };
  return table_min(a.y, a.u, a.uhat, puy, m.distortion.rho1[0]) +
         table_min(a.z, a.v, a.vhat, pvz, m.distortion.rho2[0]);
}

// 4. Belief-based MAP decoders are optimal for a fixed encoder.
Outcome map_decoders() {
  std::mt19937_64 rng(1004);
  std::size_t checked = 0, ok = 0;
  for (int k = 0; k < 50; ++k) {
    const auto m = random_model(rng, random_sizes(rng, 3), 1);
    const auto& a = m.sizes;
    const std::size_t all = ipow(a.x, a.pairs());
    std::vector<std::vector<int>> encoders;
    for (std::size_t i = 0; i < all; ++i) {
      std::vector<int> e(a.pairs());
      auto r = i;
      for (auto& x : e) {
        x = static_cast<int>(r % a.x);
        r /= a.x;
      }
      encoders.push_back(std::move(e));
    }
    for (const auto& enc : encoders) {
      auto s = MarkovStrategy::zeros(a, 1);
      s.encoder[0] = enc;
      Oracle<Rational> oracle(m, *make_executable(s, m));
      for (int y = 0; y < a.y; ++y) {
        const std::vector<int> ys{y};
        bool reachable = false;
        for (int z = 0; z < a.z; ++z) reachable = reachable || oracle.prob(ys, std::vector<int>{z}) != 0;
        if (reachable)
          s.decoders.inner[0][y] = map_decode_u(BeliefThetaU<Rational>{oracle.theta1(ys, {})}, m.distortion.rho1[0]);
      }
      for (const auto& zs : oracle.reachable_z(1))
        s.decoders.outer[0][zs[0]] = map_decode_v(BeliefThetaV<Rational>{oracle.theta2(zs)}, m.distortion.rho2[0]);
      ++checked;
      if (exact_cost(m, *make_executable(s, m)).total == best_decoders_cost(m, enc)) ++ok;
    }
  }
  return {ok == checked, std::to_string(ok) + "/" + std::to_string(checked) +
                             " encoders where MAP decoding on the beliefs attains the exhaustive decoder optimum"};
}

// 5. Random general strategies never beat the structured optimum.
Outcome structural() {
  std::mt19937_64 rng(1005);
  int not_falsified = 0, planted_ok = 0;
  std::size_t samples = 0;
  for (int k = 0; k < 10; ++k) {
    const auto m = random_binary_model(rng, 2, k % 2 == 0);
    const auto v = falsify_structural(m, 10000, 2000 + k);
    samples += v.samples;
    if (!v.falsified) ++not_falsified;
    if (v.planted && *v.planted == v.optimum) ++planted_ok;
  }
  return {not_falsified == 10 && planted_ok == 10,
          std::to_string(not_falsified) + "/10 instances NOT_FALSIFIED over " + std::to_string(samples) +
              " samples; planted optimum reproduced on " + std::to_string(planted_ok) + "/10"};
}

// 6. Golden values of the special case.
Outcome goldens() {
  std::vector<std::string> bad;
  auto check = [&](const std::string& name, const SystemModel<Rational>& m, const Rational& expected) {
    const auto b = brute_force_markov(m).best_cost, d = coordinator_dp(m).best_cost;
    if (b != expected || d != expected)
      bad.push_back(name + " brute " + b.get_str() + " dp " + d.get_str() + " expected " + expected.get_str());
  };
  const Alphabets quad{2, 2, 4, 4, 4, 2, 2};
  check("noiseless T=1", build_special_case(quad, 1), Rational(0));
  auto bsc = [](int T) {
    return build_special_case(binary_sizes(), T, {symmetric_kernel(2, Rational(1, 10)), symmetric_kernel(2, Rational(1, 5))});
  };
  check("bsc T=1", bsc(1), Rational(3, 5));
  check("bsc T=2", bsc(2), Rational(9, 25));
  const std::string dir = BCAST_SCENARIOS_DIR;
  const std::pair<std::string, SystemModel<Rational>> files[] = {
      {"special_noiseless_T1.json", build_special_case(quad, 1)},
      {"special_bsc_T1.json", bsc(1)},
      {"special_bsc_T2.json", bsc(2)}};
  for (const auto& [name, m] : files)
    if (model_hash(load_model(dir + "/" + name)) != model_hash(m)) bad.push_back(name + " hash differs");
  std::string detail = "noiseless T=1 -> 0, bsc T=1 -> 3/5, bsc T=2 -> 9/25 by both methods; scenario hashes";
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

// 7. Monte Carlo estimates cover the exact cost.
Outcome monte_carlo() {
  std::mt19937_64 rng(1007);
  int worst_inside = 100;
  std::string per_instance;
  for (int k = 0; k < 10; ++k) {
    const auto m = random_binary_model(rng, 2, true);
    const auto exec = make_executable(random_markov(rng, m.sizes, 2), m);
    const double exact = exact_cost(m, *exec).total.get_d();
    int inside = 0;
    for (int seed = 0; seed < 100; ++seed) {
      const auto r = monte_carlo_cost(m, *exec, 100000, 7000 + 100 * k + seed);
      if (std::fabs(r.total - exact) <= 4 * r.std_error) ++inside;
    }
    worst_inside = std::min(worst_inside, inside);
    per_instance += (k ? " " : "") + std::to_string(inside);
  }
  return {worst_inside >= 99, "seeds within 4 SE per instance (of 100, need >= 99): " + per_instance};
}

// 8. Every subcommand is byte-for-byte reproducible.
Outcome reproducible() {
  const std::string dir = BCAST_SCENARIOS_DIR;
  const std::vector<std::vector<std::string>> runs{
      {"validate", dir + "/special_bsc_T2.json"},
      {"scenario", "--U", "2", "--V", "3", "-T", "2", "--eps-inner", "1/10"},
      {"filter-check", dir + "/random_binary_T2.json", "--trials", "3"},
      {"solve", dir + "/special_bsc_T1.json", "--structured"},
      {"simulate", dir + "/special_bsc_T1.json", dir + "/special_bsc_T1.markov.json", "-n", "20000", "--trace", "2",
       "--exact", "--workers", "2"},
      {"falsify", dir + "/special_bsc_T2.json", "-n", "20", "--csv"}};
  int same = 0;
  std::string first_bad;
  for (const auto& args : runs) {
    std::string outputs[2];
    int codes[2];
    for (int i = 0; i < 2; ++i) {
      std::vector<const char*> argv{"bcast"};
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      codes[i] = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
      outputs[i] = out.str() + err.str();
    }
    if (codes[0] == 0 && codes[0] == codes[1] && outputs[0] == outputs[1] && !outputs[0].empty())
      ++same;
    else if (first_bad.empty())
      first_bad = "; differs or failed: " + args[0];
  }
  return {same == static_cast<int>(runs.size()),
          std::to_string(same) + "/" + std::to_string(runs.size()) + " subcommands identical across two runs" + first_bad};
}

}  // namespace

int main() {
  const std::pair<int, std::function<Outcome()>> criteria[] = {
      {1, filters}, {2, dp_vs_brute}, {3, implementability}, {4, map_decoders},
      {5, structural}, {6, goldens}, {7, monte_carlo}, {8, reproducible}};
  int failures = 0;
  for (const auto& [n, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s  [%.1fs]\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
