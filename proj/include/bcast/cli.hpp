#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bcast/errors.hpp"
#include "bcast/evaluate.hpp"
#include "bcast/filter_check.hpp"
#include "bcast/model.hpp"
#include "bcast/report.hpp"
#include "bcast/runner.hpp"
#include "bcast/search.hpp"
#include "bcast/strategy_io.hpp"

namespace bcast::cli {

enum Exit : int {
  ok = 0,
  failure = 1,
  invalid_model = 2,
  cap_exceeded = 3,
  falsified = 4,
  check_failed = 5,
};

namespace detail {

struct Options {
  std::string model_path, strategy_path, out_path, out_dp_path;
  std::string mode;
  std::string method = "both";
  std::uint64_t seed = 1;
  std::size_t trials = 10, samples = 100000, trace = 0;
  std::size_t cap_trajectories = default_trajectory_cap, cap_encoders = default_encoder_cap;
  std::size_t cap_actions = default_action_cap, cap_nodes = default_node_cap;
  unsigned workers = 1;
  bool csv = false, structured = false, timing = false, exact = false;
  // scenario
  int su = 2, sv = 2, sx = 0, horizon = 1;
  std::string eps_inner, eps_outer;
};

template <class S>
std::string exact_str(const S& x) {
  if constexpr (scalar_traits<S>::exact)
    return x.get_str();
  else
    return scalar_traits<double>::to_string(x);
}

template <class S>
std::string dec_str(const S& x) {
  return decimal(to_double(x));
}

inline std::string u64(std::uint64_t x) { return std::to_string(x); }

class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  ReportFormat format() const {
    if (o_.structured) return ReportFormat::structured;
    if (o_.csv) return ReportFormat::csv;
    return ReportFormat::text;
  }

  Report start(const std::string& sub) {
    RunManifest m;
    m.subcommand = sub;
    if (o_.timing) m.set("timestamp", utc_timestamp());
    return Report(std::move(m));
  }

  int emit(const Report& r, int code) {
    r.render(out_, format());
    return code;
  }

  SystemModel<Rational> model(Report& r) {
    auto m = load_model(o_.model_path);
    r.manifest().set("model_hash", model_hash(m));
    return m;
  }

  Arithmetic mode(Arithmetic fallback) const { return o_.mode.empty() ? fallback : parse_arithmetic(o_.mode); }

  SearchLimits limits() const {
    return {o_.cap_encoders, o_.cap_trajectories, o_.cap_actions, o_.cap_nodes, o_.workers};
  }

  void caps(Report& r) const {
    r.manifest().set("cap_trajectories", u64(o_.cap_trajectories));
    r.manifest().set("cap_encoders", u64(o_.cap_encoders));
    r.manifest().set("cap_actions", u64(o_.cap_actions));
    r.manifest().set("cap_nodes", u64(o_.cap_nodes));
    r.manifest().set("workers", std::to_string(o_.workers));
  }

  int validate() {
    auto r = start("validate");
    auto m = model(r);
    const auto& a = m.sizes;
    r.add("status", "valid");
    r.add("alphabets", "U=" + std::to_string(a.u) + " V=" + std::to_string(a.v) + " X=" + std::to_string(a.x) +
                           " Y=" + std::to_string(a.y) + " Z=" + std::to_string(a.z) +
                           " Uhat=" + std::to_string(a.uhat) + " Vhat=" + std::to_string(a.vhat));
    r.add("horizon", std::to_string(m.horizon));
    return emit(r, ok);
  }

  int scenario() {
    Alphabets a;
    a.u = o_.su;
    a.v = o_.sv;
    a.uhat = a.u;
    a.vhat = a.v;
    a.x = a.y = a.z = o_.sx > 0 ? o_.sx : a.u * a.v;
    SystemModel<Rational> m;
    if (o_.eps_inner.empty() && o_.eps_outer.empty()) {
      m = build_special_case(a, o_.horizon);
    } else {
      const Rational e1 = parse_rational(o_.eps_inner.empty() ? "0" : o_.eps_inner);
      const Rational e2 = parse_rational(o_.eps_outer.empty() ? "0" : o_.eps_outer);
      m = build_special_case(a, o_.horizon, {symmetric_kernel(a.x, e1), symmetric_kernel(a.y, e2)});
    }
    const std::string text = to_json(m).dump(2) + "\n";
    if (o_.out_path.empty()) {
      out_ << text;
    } else {
      write_file(o_.out_path, text);
      auto r = start("scenario");
      r.manifest().set("model_hash", model_hash(m));
      r.add("written", o_.out_path);
      return emit(r, ok);
    }
    return ok;
  }

  int filter_check() {
    auto r = start("filter-check");
    auto m = model(r);
    const Arithmetic mode = this->mode(Arithmetic::rational);
    r.manifest().set("mode", to_string(mode));
    r.manifest().set("trials", u64(o_.trials));
    r.manifest().set("seed", u64(o_.seed));
    r.manifest().set("cap_trajectories", u64(o_.cap_trajectories));
    const auto rep = bcast::filter_check(m, o_.trials, o_.seed, mode, o_.cap_trajectories);
    const auto& d = rep.deviation;
    auto fmt = [](double x) { return scalar_traits<double>::to_string(x); };
    r.add("histories", u64(d.histories));
    r.add("max_deviation.xi", fmt(d.xi));
    r.add("max_deviation.theta1", fmt(d.theta1));
    r.add("max_deviation.pi", fmt(d.pi));
    r.add("max_deviation.theta2", fmt(d.theta2));
    const double tol = mode == Arithmetic::rational ? 0.0 : 1e-9;
    const bool pass = d.worst() <= tol;
    r.add("tolerance", fmt(tol));
    r.add("verdict", pass ? "PASS" : "FAIL");
    return emit(r, pass ? ok : check_failed);
  }

  int solve() {
    auto r = start("solve");
    auto m = model(r);
    const Arithmetic mode = this->mode(Arithmetic::rational);
    r.manifest().set("mode", to_string(mode));
    r.manifest().set("method", o_.method);
    caps(r);
    if (mode == Arithmetic::rational) return solve_in(m, m, r);
    return solve_in(m, convert<double>(m), r);
  }

  int simulate() {
    auto r = start("simulate");
    auto exact = model(r);
    const Arithmetic mode = this->mode(Arithmetic::floating);
    const AnyStrategy s = load_strategy(o_.strategy_path);
    r.manifest().set("strategy_hash", strategy_hash(s));
    r.manifest().set("strategy_class", strategy_class(s));
    r.manifest().set("mode", to_string(mode));
    r.manifest().set("samples", u64(o_.samples));
    r.manifest().set("seed", u64(o_.seed));
    r.manifest().set("trace", u64(o_.trace));
    r.manifest().set("workers", std::to_string(o_.workers));
    if (o_.exact) r.manifest().set("cap_trajectories", u64(o_.cap_trajectories));
    if (mode == Arithmetic::rational) return simulate_in(exact, exact, s, r);
    return simulate_in(exact, convert<double>(exact), s, r);
  }

  int falsify() {
    auto r = start("falsify");
    auto m = model(r);
    const Arithmetic mode = this->mode(Arithmetic::rational);
    r.manifest().set("mode", to_string(mode));
    r.manifest().set("samples", u64(o_.samples));
    r.manifest().set("seed", u64(o_.seed));
    caps(r);
    if (mode == Arithmetic::rational) return falsify_in(m, r);
    return falsify_in(convert<double>(m), r);
  }

 private:
  static void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
  }

  void write_strategy(const std::string& path, const AnyStrategy& s, Report& r, const std::string& key) {
    write_file(path, strategy_to_json(s).dump(2) + "\n");
    r.add(key + ".strategy_file", path);
  }

  template <class S>
  int solve_in(const SystemModel<Rational>& exact, const SystemModel<S>& m, Report& r) {
    const bool brute = o_.method == "brute" || o_.method == "both";
    const bool dp = o_.method == "dp" || o_.method == "both";
    std::optional<S> brute_cost, dp_cost;
    if (brute) {
      auto res = brute_force_markov(m, limits());
      brute_cost = res.best_cost;
      const AnyStrategy s = *res.markov;
      r.add("brute.cost", exact_str(res.best_cost));
      r.add("brute.cost_decimal", dec_str(res.best_cost));
      r.add("brute.encoders", u64(res.enumerated));
      r.add("brute.strategy_hash", strategy_hash(s));
      if (o_.timing) r.add("brute.seconds", decimal(res.seconds, 3));
      if (!o_.out_path.empty()) write_strategy(o_.out_path, s, r, "brute");
    }
    if (dp) {
      auto res = coordinator_dp(m, limits());
      dp_cost = res.best_cost;
      r.add("dp.cost", exact_str(res.best_cost));
      r.add("dp.cost_decimal", dec_str(res.best_cost));
      r.add("dp.actions", u64(res.enumerated));
      r.add("dp.nodes", u64(res.nodes));
      // Float trees are stored in their Markov tabulation.
      AnyStrategy s;
      if constexpr (scalar_traits<S>::exact)
        s = *res.structured;
      else
        s = tabulate_markov(m, *make_executable(*res.structured, m), o_.cap_trajectories);
      r.add("dp.strategy_hash", strategy_hash(s));
      if (o_.timing) r.add("dp.seconds", decimal(res.seconds, 3));
      const std::string path = !o_.out_dp_path.empty() ? o_.out_dp_path : (brute ? "" : o_.out_path);
      if (!path.empty()) write_strategy(path, s, r, "dp");
    }
    (void)exact;
    if (brute && dp) {
      bool equal;
      if constexpr (scalar_traits<S>::exact)
        equal = *brute_cost == *dp_cost;
      else
        equal = std::fabs(*brute_cost - *dp_cost) <= 1e-9;
      r.add("verdict", equal ? "EQUAL" : "UNEQUAL");
      return emit(r, equal ? ok : check_failed);
    }
    return emit(r, ok);
  }

  template <class S>
  int simulate_in(const SystemModel<Rational>& exact, const SystemModel<S>& m, const AnyStrategy& s, Report& r) {
    auto exec = make_executable(s, m);
    const auto mc = monte_carlo_cost(m, *exec, o_.samples, o_.seed, o_.workers);
    r.add("estimate", decimal(mc.total));
    r.add("std_error", decimal(mc.std_error));
    for (std::size_t t = 0; t < mc.rho1.size(); ++t) {
      r.add("stage" + std::to_string(t + 1) + ".rho1", decimal(mc.rho1[t]));
      r.add("stage" + std::to_string(t + 1) + ".rho2", decimal(mc.rho2[t]));
    }
    if (o_.exact) {
      const auto ex = exact_cost(exact, *make_executable(s, exact), o_.cap_trajectories);
      r.add("exact", ex.total.get_str());
      r.add("exact_decimal", dec_str(ex.total));
      const double gap = std::fabs(mc.total - ex.total.get_d());
      r.add("gap_in_std_errors", mc.std_error > 0 ? decimal(gap / mc.std_error, 3) : std::string("n/a"));
    }
    const auto episodes = trace_episodes(m, *exec, o_.trace, o_.seed);
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      std::ostringstream line;
      for (std::size_t t = 0; t < episodes[i].steps.size(); ++t) {
        const Step& st = episodes[i].steps[t];
        line << (t ? " | " : "") << "u=" << st.u << " v=" << st.v << " x=" << st.x << " y=" << st.y
             << " z=" << st.z << " uhat=" << st.uhat << " vhat=" << st.vhat;
      }
      r.add("episode" + std::to_string(i + 1), line.str());
    }
    return emit(r, ok);
  }

  template <class S>
  int falsify_in(const SystemModel<S>& m, Report& r) {
    const auto v = falsify_structural(m, o_.samples, o_.seed, limits());
    r.add("optimum", exact_str(v.optimum));
    r.add("samples", u64(v.samples));
    if (v.best_sample) r.add("best_sample", exact_str(*v.best_sample));
    if (v.planted) {
      r.add("planted", exact_str(*v.planted));
      bool equal;
      if constexpr (scalar_traits<S>::exact)
        equal = *v.planted == v.optimum;
      else
        equal = std::fabs(*v.planted - v.optimum) <= 1e-9;
      r.add("planted_vs_optimum", equal ? "EQUAL" : "UNEQUAL");
    }
    if (v.counterexample) {
      const auto& c = *v.counterexample;
      r.add("counterexample.sample", u64(c.sample));
      r.add("counterexample.decoders", c.decoders);
      r.add("counterexample.cost", exact_str(c.cost));
      r.add("counterexample.strategy", strategy_to_json(AnyStrategy(c.strategy)).dump());
    }
    r.add("verdict", v.falsified ? "FALSIFIED" : "NOT_FALSIFIED");
    return emit(r, v.falsified ? falsified : ok);
  }

  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace detail

/// Entry point of the `bcast` tool. Reports go to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  detail::Options o;
  CLI::App app{"Exact solver and simulator for a source broadcast over a degraded channel with feedback",
               "bcast"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", tool_version);
  app.add_flag("--csv", o.csv, "Emit the report as one CSV header and row");
  app.add_flag("--structured", o.structured, "Emit the report as JSON");
  app.add_flag("--timing", o.timing, "Include wall time and a timestamp (reports are then not reproducible)");

  auto model_arg = [&](CLI::App* sub) {
    sub->add_option("model", o.model_path, "Model file (JSON)")->required()->check(CLI::ExistingFile);
  };
  auto mode_opt = [&](CLI::App* sub, const char* dflt) {
    sub->add_option("--mode", o.mode, std::string("Arithmetic: rational or float (default ") + dflt + ")")
        ->check(CLI::IsMember({"rational", "float"}));
  };
  auto cap_opts = [&](CLI::App* sub) {
    sub->add_option("--cap-trajectories", o.cap_trajectories, "Trajectory enumeration limit");
    sub->add_option("--cap-encoders", o.cap_encoders, "Markov encoder class size limit");
    sub->add_option("--cap-actions", o.cap_actions, "Partial encoders per Pi node limit");
    sub->add_option("--cap-nodes", o.cap_nodes, "Pi node limit");
    sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1u, 256u));
  };

  auto* validate = app.add_subcommand("validate", "Check a model file");
  model_arg(validate);

  auto* scenario = app.add_subcommand("scenario", "Emit the static-source special case with terminal Hamming distortion");
  scenario->add_option("--U", o.su, "|U|")->check(CLI::Range(1, 16));
  scenario->add_option("--V", o.sv, "|V|")->check(CLI::Range(1, 16));
  scenario->add_option("--X", o.sx, "|X| = |Y| = |Z| (default |U||V|)")->check(CLI::Range(1, 256));
  scenario->add_option("-T,--horizon", o.horizon, "Horizon")->check(CLI::Range(1, 64));
  scenario->add_option("--eps-inner", o.eps_inner, "Symmetric inner channel crossover (e.g. 1/10)");
  scenario->add_option("--eps-outer", o.eps_outer, "Symmetric outer channel crossover");
  scenario->add_option("-o,--out", o.out_path, "Write the model here instead of standard output");

  auto* filter = app.add_subcommand("filter-check", "Compare the recursive filters with the brute-force oracle");
  model_arg(filter);
  filter->add_option("--trials", o.trials, "Random strategies to try");
  filter->add_option("--seed", o.seed, "Seed");
  filter->add_option("--cap-trajectories", o.cap_trajectories, "Trajectory enumeration limit");
  mode_opt(filter, "rational");

  auto* solve = app.add_subcommand("solve", "Find the optimal cost by exhaustive search and/or dynamic programming");
  model_arg(solve);
  solve->add_option("--method", o.method, "brute, dp or both")->check(CLI::IsMember({"brute", "dp", "both"}));
  solve->add_option("-o,--out", o.out_path, "Write the optimal strategy here");
  solve->add_option("--out-dp", o.out_dp_path, "Write the dynamic-programming strategy here");
  cap_opts(solve);
  mode_opt(solve, "rational");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of a strategy's expected distortion");
  model_arg(simulate);
  simulate->add_option("strategy", o.strategy_path, "Strategy file (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("-n,--samples", o.samples, "Episodes")->check(CLI::Range(std::size_t{1}, SIZE_MAX));
  simulate->add_option("--seed", o.seed, "Seed");
  simulate->add_option("--trace", o.trace, "Print the first k episodes");
  simulate->add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1u, 256u));
  simulate->add_flag("--exact", o.exact, "Also compute the exact cost");
  simulate->add_option("--cap-trajectories", o.cap_trajectories, "Trajectory enumeration limit");
  mode_opt(simulate, "float");

  auto* falsify = app.add_subcommand("falsify", "Try random general strategies against the structured optimum");
  model_arg(falsify);
  falsify->add_option("-n,--samples", o.samples, "Random strategies");
  falsify->add_option("--seed", o.seed, "Seed");
  cap_opts(falsify);
  mode_opt(falsify, "rational");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForVersion&) {
    out << tool_version << "\n";
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }

  detail::Runner runner(o, out, err);
  try {
    if (*validate) return runner.validate();
    if (*scenario) return runner.scenario();
    if (*filter) return runner.filter_check();
    if (*solve) return runner.solve();
    if (*simulate) return runner.simulate();
    if (*falsify) return runner.falsify();
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return invalid_model;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return cap_exceeded;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
  return failure;
}

}  // namespace bcast::cli
