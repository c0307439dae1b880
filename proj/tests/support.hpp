#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "bcast/bcast.hpp"
#include "bcast/cli.hpp"

namespace test {

using bcast::Rational;

inline Rational q(const char* s) { return bcast::parse_rational(s); }

inline std::string scenario(const std::string& name) { return std::string(BCAST_SCENARIOS_DIR) + "/" + name; }

inline bcast::SystemModel<Rational> bsc_special(int horizon) {
  return bcast::build_special_case(bcast::binary_sizes(), horizon,
                                   {bcast::symmetric_kernel(2, Rational(1, 10)), bcast::symmetric_kernel(2, Rational(1, 5))});
}

struct CliResult {
  int code;
  std::string out, err;
};

inline CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bcast");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = bcast::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace test
