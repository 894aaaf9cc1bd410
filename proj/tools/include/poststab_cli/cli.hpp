#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace poststab::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kInputError = 2 };

enum class Format { Csv, Json, Both };

struct Flags {
  std::string scenario;
  std::string out = ".";
  bool out_given = false;
  std::optional<std::uint64_t> seed;  // overrides the scenario's seed
  bool oracle = false;
  double tol = 1e-6;
  Format format = Format::Both;
};

// Scalar Gaussians N(mean, var) given on the command line. A scenario file,
// if given, takes precedence.
struct GaussianArgs {
  std::optional<double> mean_a, var_a, mean_b, var_b;
  std::vector<std::string> distances;  // hellinger, kl, tv, w2; empty means all
};

int cmd_verify(const Flags& flags, std::ostream& out, std::ostream& err);
int cmd_gaussian(const GaussianArgs& args, const Flags& flags, std::ostream& out, std::ostream& err);
// name is one of sensitivity, huber, brittleness, continuity, derivative.
int cmd_experiment(const std::string& name, const Flags& flags, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace poststab::cli
