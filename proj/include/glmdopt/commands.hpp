#ifndef GLMDOPT_COMMANDS_HPP
#define GLMDOPT_COMMANDS_HPP

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "glmdopt/io.hpp"

namespace glmdopt {

/// Outcome of one CLI subcommand: a machine-readable report plus the text
/// rendering, and the exit status the process should return.
struct Report {
  nlohmann::json json;
  std::string text;
  int exit_code = 0;
};

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalFailure = 3;
inline constexpr int kNonConvergence = 4;
}  // namespace exit_code

/// Exit status for a library error: input problems map to kConfigError,
/// everything the numbers themselves rule out to kNumericalFailure.
int exit_code_for(ErrorKind kind);

/// Weights used by every optimisation command: the local weights when the
/// config carries beta, expected weights under the prior otherwise.
Vector<double> resolve_weights(const ProblemConfig& cfg);

Report cmd_weights(const ProblemConfig& cfg);
Report cmd_optimize(const ProblemConfig& cfg);
Report cmd_exact(const ProblemConfig& cfg, const std::optional<Counts>& compare = std::nullopt);
Report cmd_verify(const ProblemConfig& cfg, const Vector<double>& p);
Report cmd_efficiency(const ProblemConfig& cfg, const Vector<double>& p_test, const Vector<double>& p_ref);
Report cmd_ew(const ProblemConfig& cfg);

/// Rounds to three decimals for display.
double display_round(double x);

}  // namespace glmdopt

#endif  // GLMDOPT_COMMANDS_HPP
