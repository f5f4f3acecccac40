#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multishift/io.hpp"

namespace multishift::app {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitSchema = 3;

/// Exit code for a library error raised while running a problem.
int exit_code_for(const Error& e);

/// Command-line overrides of the problem options.
struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::vector<int> degrees;
  bool timing = true;
};

struct RunResult {
  int exit_code = kExitOk;
  io::Json report;
  std::string summary;  // human-readable, one fact per line
};

/// {N/4, N/2, 3N/4, N} without duplicates or zeros.
std::vector<int> default_degrees(int max_degree);

/// Solves the problem. Library errors propagate; a failed `validate` kind
/// returns kExitInvalidInput with its report.
RunResult run_problem(const io::ProblemFile& problem, const RunFlags& flags = {});

/// Parses and resolves every system without solving anything. Throws on
/// the first invalid input.
std::string validate_inputs(const io::ProblemFile& problem);

struct Generated {
  io::ProblemFile problem;
  std::optional<io::Json> answer;  // hidden data for a sidecar file
};

Generated gen_pochhammer(const PochhammerPair& first, const PochhammerPair& second, std::size_t d, int max_degree);
Generated gen_unitary_congruence(std::size_t d, int max_degree, std::size_t n, std::uint64_t seed);
/// Pochhammer base against its perturbation. `replace0` sets C_0 = s I;
/// `replace_degree` replaces every C_a with |a| <= k by a seeded random PD
/// matrix. The closed-form certificate is embedded.
Generated gen_perturb(const PochhammerPair& base, std::size_t d, int max_degree, std::optional<double> replace0,
                      std::optional<int> replace_degree, std::uint64_t seed);
Generated gen_random_pair(std::size_t d, int max_degree, std::size_t n, std::uint64_t seed, io::ProblemKind kind);

/// "pochhammer:1,2" -> {1, 2}.
PochhammerPair parse_pochhammer_base(const std::string& text);

}  // namespace multishift::app
