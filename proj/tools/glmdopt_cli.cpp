// glmdopt: locally D-optimal approximate and exact designs for GLMs.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "glmdopt/commands.hpp"

namespace {

using namespace glmdopt;

int emit(const Report& r, const std::string& out) {
  if (out == "json")
    std::cout << r.json.dump(2) << "\n";
  else
    std::cout << r.text;
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally D-optimal factorial designs for generalized linear models"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "text";
  app.add_option("--config", config_path, "Problem config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed, overrides the config");
  app.add_option("--out", out, "Output format")->check(CLI::IsMember({"json", "text"}));

  auto* weights = app.add_subcommand("weights", "Per-row linear predictor and information weight");
  auto* optimize = app.add_subcommand("optimize", "Approximate D-optimal design (lift-one)");
  auto* exact = app.add_subcommand("exact", "Exact D-optimal allocation of a fixed total (exchange)");
  auto* verify = app.add_subcommand("verify", "Certify D-optimality of an allocation");
  auto* efficiency = app.add_subcommand("efficiency", "Relative D-efficiency of two allocations");
  auto* ew = app.add_subcommand("ew", "EW D-optimal design under a prior on beta");

  std::string compare_path, alloc_path, test_path, ref_path;
  exact->add_option("--compare", compare_path, "Integer allocation to compare against")
      ->check(CLI::ExistingFile);
  verify->add_option("--alloc", alloc_path, "Allocation file, one proportion per line")
      ->required()
      ->check(CLI::ExistingFile);
  efficiency->add_option("--test", test_path, "Allocation being rated")->required()->check(CLI::ExistingFile);
  efficiency->add_option("--ref", ref_path, "Reference allocation")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::kConfigError;
  }

  try {
    ProblemConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;

    if (weights->parsed()) return emit(cmd_weights(cfg), out);
    if (optimize->parsed()) return emit(cmd_optimize(cfg), out);
    if (exact->parsed()) {
      std::optional<Counts> compare;
      if (!compare_path.empty()) compare = read_counts_file(compare_path);
      return emit(cmd_exact(cfg, compare), out);
    }
    if (verify->parsed()) return emit(cmd_verify(cfg, read_allocation_file(alloc_path)), out);
    if (efficiency->parsed())
      return emit(cmd_efficiency(cfg, read_allocation_file(test_path), read_allocation_file(ref_path)), out);
    if (ew->parsed()) return emit(cmd_ew(cfg), out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::kConfigError;
  } catch (const DesignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  return exit_code::kConfigError;
}
