#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace bcast;
constexpr auto run_cli = test::cli;
using test::scenario;

namespace {

std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "bcast_cli_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string line(const std::string& report, const std::string& key) {
  const auto at = report.find("\n" + key + ": ");
  if (at == std::string::npos) return "";
  return report.substr(at + 1, report.find('\n', at + 1) - at - 1);
}

}  // namespace

TEST(Cli, Version) {
  auto r = run_cli({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1.0.0\n");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"solve"}).code, 1);
  EXPECT_EQ(run_cli({"solve", scenario("special_bsc_T1.json"), "--method", "guess"}).code, 1);
  EXPECT_EQ(run_cli({"validate", scenario("no_such_file.json")}).code, 1);
}

TEST(Cli, ValidateGoodAndBadModels) {
  auto ok = run_cli({"validate", scenario("special_bsc_T2.json")});
  EXPECT_EQ(ok.code, 0);
  EXPECT_TRUE(contains(ok.out, "status: valid"));
  EXPECT_TRUE(contains(ok.out, "horizon: 2"));

  auto row = run_cli({"validate", scenario("broken_row.json")});
  EXPECT_EQ(row.code, 2);
  EXPECT_TRUE(contains(row.err, "channel.inner[1]: row not stochastic at x=1 (sum 9/10)")) << row.err;

  auto missing = run_cli({"validate", scenario("missing_field.json")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_TRUE(contains(missing.err, "missing field 'horizon'")) << missing.err;

  auto range = run_cli({"validate", scenario("rho_out_of_range.json")});
  EXPECT_EQ(range.code, 2);
  EXPECT_TRUE(contains(range.err, "distortion out of range")) << range.err;
}

TEST(Cli, ScenarioOutputValidates) {
  const auto path = temp_path("scenario.json");
  auto r = run_cli({"scenario", "--U", "2", "--V", "2", "--X", "2", "-T", "2", "--eps-inner", "1/10", "--eps-outer", "1/5", "-o", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(model_hash(load_model(path)), model_hash(test::bsc_special(2)));
  EXPECT_EQ(run_cli({"validate", path}).code, 0);
  auto stdout_form = run_cli({"scenario", "--X", "4"});
  EXPECT_EQ(stdout_form.code, 0);
  EXPECT_EQ(model_hash(validate_model(json::parse(stdout_form.out))),
            model_hash(build_special_case(Alphabets{2, 2, 4, 4, 4, 2, 2}, 1)));
}

TEST(Cli, SolveNoiselessIsLossless) {
  auto r = run_cli({"solve", scenario("special_noiseless_T1.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "brute.cost: 0\n"));
  EXPECT_TRUE(contains(r.out, "dp.cost: 0\n"));
  EXPECT_TRUE(contains(r.out, "verdict: EQUAL"));
}

TEST(Cli, SolveWritesStrategies) {
  const auto brute = temp_path("brute.json"), dp = temp_path("dp.json");
  auto r = run_cli({"solve", scenario("special_bsc_T1.json"), "-o", brute, "--out-dp", dp});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "brute.cost: 3/5"));
  auto m = test::bsc_special(1);
  EXPECT_EQ(exact_cost(m, *make_executable(load_strategy(brute), m)).total, Rational(3, 5));
  EXPECT_EQ(exact_cost(m, *make_executable(load_strategy(dp), m)).total, Rational(3, 5));
  EXPECT_EQ(strategy_class(load_strategy(dp)), "structured");
}

TEST(Cli, SolveCapExceeded) {
  auto r = run_cli({"solve", scenario("special_bsc_T2.json"), "--method", "brute", "--cap-encoders", "100"});
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(contains(r.err, "cap"));
}

TEST(Cli, SolveFloatMode) {
  auto r = run_cli({"solve", scenario("special_bsc_T1.json"), "--mode", "float"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "brute.cost_decimal: 0.6"));
  EXPECT_TRUE(contains(r.out, "verdict: EQUAL"));
}

TEST(Cli, SimulateIsReproducible) {
  std::vector<std::string> args{"simulate", scenario("special_bsc_T1.json"), scenario("special_bsc_T1.markov.json"),
                                "-n", "20000", "--seed", "5", "--trace", "3", "--exact"};
  auto a = run_cli(args), b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_TRUE(contains(a.out, "exact: 3/5"));
  EXPECT_TRUE(contains(a.out, "episode3: "));
  args.push_back("--workers");
  args.push_back("3");
  auto c = run_cli(args);
  EXPECT_EQ(line(c.out, "estimate"), line(a.out, "estimate"));
  EXPECT_FALSE(line(a.out, "estimate").empty());
}

TEST(Cli, SimulateStructuredStrategy) {
  auto r = run_cli({"simulate", scenario("special_bsc_T1.json"), scenario("special_bsc_T1.structured.json"), "-n",
                "1000", "--exact", "--mode", "rational"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "exact: 3/5"));
}

TEST(Cli, FilterCheck) {
  auto none = run_cli({"filter-check", scenario("special_bsc_T2.json"), "--trials", "0"});
  EXPECT_EQ(none.code, 0);
  EXPECT_TRUE(contains(none.out, "verdict: PASS"));
  auto r = run_cli({"filter-check", scenario("random_binary_T2.json"), "--trials", "3"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(contains(r.out, "max_deviation.pi: 0"));
  auto f = run_cli({"filter-check", scenario("random_binary_T2.json"), "--trials", "3", "--mode", "float"});
  EXPECT_EQ(f.code, 0) << f.out;
}

TEST(Cli, Falsify) {
  auto r = run_cli({"falsify", scenario("special_bsc_T1.json"), "-n", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "optimum: 3/5"));
  EXPECT_TRUE(contains(r.out, "planted_vs_optimum: EQUAL"));
  EXPECT_TRUE(contains(r.out, "verdict: NOT_FALSIFIED"));
  auto s = run_cli({"falsify", scenario("special_bsc_T2.json"), "-n", "50", "--seed", "4"});
  EXPECT_EQ(s.code, 0);
  EXPECT_TRUE(contains(s.out, "samples: 50"));
}

TEST(Cli, ReportFormats) {
  auto text = run_cli({"validate", scenario("special_bsc_T1.json")});
  EXPECT_EQ(text.out.rfind("# bcast validate\n", 0), 0u);
  EXPECT_TRUE(contains(text.out, "tool_version: 1.0.0"));
  EXPECT_TRUE(contains(text.out, "model_hash: " + model_hash(test::bsc_special(1))));
  EXPECT_FALSE(contains(text.out, "timestamp"));

  auto csv = run_cli({"validate", scenario("special_bsc_T1.json"), "--csv"});
  ASSERT_EQ(csv.code, 0);
  const auto nl = csv.out.find('\n');
  EXPECT_EQ(csv.out.substr(0, nl), "subcommand,tool_version,model_hash,status,alphabets,horizon");
  EXPECT_EQ(std::count(csv.out.begin(), csv.out.end(), '\n'), 2);

  auto js = run_cli({"--structured", "validate", scenario("special_bsc_T1.json")});
  ASSERT_EQ(js.code, 0);
  auto j = json::parse(js.out);
  EXPECT_EQ(j["manifest"]["subcommand"], "validate");
  EXPECT_EQ(j["results"]["status"], "valid");

  auto timed = run_cli({"validate", scenario("special_bsc_T1.json"), "--timing"});
  EXPECT_TRUE(contains(timed.out, "timestamp: "));
}
