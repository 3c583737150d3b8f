#ifndef GLMDOPT_IO_HPP
#define GLMDOPT_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glmdopt/ew.hpp"
#include "glmdopt/exchange.hpp"
#include "glmdopt/glm_weights.hpp"
#include "glmdopt/lift_one.hpp"

namespace glmdopt {

/// Malformed or inconsistent user input (files, JSON, flags).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EwMethodChoice { Auto, ClosedForm, MonteCarlo };

struct ProblemConfig {
  Matrix<double> design;
  GlmModel<double> model;  // beta is empty when a prior is given
  std::optional<PriorSpec<double>> prior;
  std::optional<long long> total;
  std::uint64_t seed = 0;
  LiftOneOptions lift;
  ExchangeOptions exchange;
  std::uint64_t mc_samples = 100'000;
  EwMethodChoice ew_method = EwMethodChoice::Auto;
};

/// Comma-separated numbers, one design point per line. A first line that does
/// not parse as numbers is taken as a header. Blank lines are ignored.
Matrix<double> parse_design_csv(const std::string& text);
Matrix<double> read_design_csv(const std::filesystem::path& path);

/// Design matrix from a JSON array of equal-length numeric arrays.
Matrix<double> design_from_json(const nlohmann::json& rows);

/// One number per line; blank lines and lines starting with '#' are skipped.
Vector<double> read_allocation_file(const std::filesystem::path& path);
Counts read_counts_file(const std::filesystem::path& path);

/// Relative paths inside the document (design_csv) resolve against base_dir.
ProblemConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ProblemConfig load_config(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace glmdopt

#endif  // GLMDOPT_IO_HPP
