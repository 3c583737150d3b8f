#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = GLMDOPT_FIXTURE_DIR;
const fs::path kCli = GLMDOPT_CLI_PATH;

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = "\"" + kCli.string() + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string fixture(const std::string& name) { return "\"" + (kFixtures / name).string() + "\""; }

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "glmdopt_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("optimize output is byte-identical across runs") {
  const std::string args = "--config " + fixture("pcb_logit.json") + " --out json optimize";
  const Run a = run(args);
  const Run b = run(args);
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
  const json j = json::parse(a.out);
  CHECK(j["converged"].get<bool>());
  CHECK(j["p_display"][0].get<double>() == doctest::Approx(0.216));
}

TEST_CASE("optimize then verify round trip") {
  const Run opt = run("--config " + fixture("insurance_gamma.json") + " --out json optimize");
  REQUIRE(opt.status == 0);
  const json j = json::parse(opt.out);
  std::string lines;
  for (const auto& v : j["p"]) lines += v.dump() + "\n";
  const fs::path alloc = scratch_dir() / "gamma_opt.txt";
  write_file(alloc, lines);
  const Run ver = run("--config " + fixture("insurance_gamma.json") + " --out json verify --alloc \"" +
                      alloc.string() + "\"");
  CHECK(ver.status == 0);
  CHECK(json::parse(ver.out)["optimal"].get<bool>());

  const Run uni = run("--config " + fixture("insurance_gamma.json") + " --out json verify --alloc " +
                      fixture("uniform_8.txt"));
  CHECK(uni.status == 0);
  CHECK_FALSE(json::parse(uni.out)["optimal"].get<bool>());
}

TEST_CASE("exact with a comparison allocation") {
  const Run r = run("--config " + fixture("pcb_logit.json") + " --out json exact --compare " +
                    fixture("pcb_reference_exact.txt"));
  CHECK(r.status == 0);
  const json j = json::parse(r.out);
  CHECK(j["compare"]["dominates"].get<bool>());
  CHECK(j["n"] == json({621, 535, 569, 593, 331, 231}));
}

TEST_CASE("ew and efficiency commands") {
  const Run ew = run("--config " + fixture("harddisk_ew.json") + " --out json ew");
  CHECK(ew.status == 0);
  const json j = json::parse(ew.out);
  CHECK(j["p_display"] == json({0.0, 0.0, 0.25, 0.25, 0.25, 0.25}));

  const Run eff = run("--config " + fixture("insurance_gamma.json") + " --out json efficiency --test " +
                      fixture("uniform_8.txt") + " --ref " + fixture("insurance_reference.txt"));
  CHECK(eff.status == 0);
  CHECK(json::parse(eff.out)["relative_efficiency"].get<double>() == doctest::Approx(0.827).epsilon(0.006));

  const Run text = run("--config " + fixture("breakins_poisson.json") + " weights");
  CHECK(text.status == 0);
  CHECK(text.out.find("poisson-log") != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch_dir();

  write_file(dir / "missing_beta.json", R"({"design_csv": ")" + (kFixtures / "main_effects_2x2.csv").string() +
                                            R"(", "family": "poisson-log"})");
  CHECK(run("--config \"" + (dir / "missing_beta.json").string() + "\" weights").status == 2);

  write_file(dir / "broken.json", "{ not json");
  CHECK(run("--config \"" + (dir / "broken.json").string() + "\" weights").status == 2);

  CHECK(run("--config " + fixture("pcb_logit.json") + " frobnicate").status == 2);
  CHECK(run("--config " + fixture("harddisk_poisson.json") + " exact").status == 2);

  write_file(dir / "gamma_sign.json", R"({"design": [[1, 1], [1, -1], [1, 3]], "family": "gamma-inverse",
                                          "shape": 1, "beta": [1, -0.75]})");
  CHECK(run("--config \"" + (dir / "gamma_sign.json").string() + "\" weights").status == 3);

  write_file(dir / "singular.json", R"({"design": [[1, 2], [2, 4], [3, 6]], "family": "normal-identity",
                                        "beta": [0, 0]})");
  CHECK(run("--config \"" + (dir / "singular.json").string() + "\" optimize").status == 3);

  write_file(dir / "budget.json", R"({"design_csv": ")" + (kFixtures / "pcb_2x3.csv").string() +
                                      R"(", "family": "binary-logit", "beta": [-2.5, 0.15, 0.70, 0.10],
                                      "options": {"max_rounds": 1}})");
  CHECK(run("--config \"" + (dir / "budget.json").string() + "\" optimize").status == 4);
}

TEST_CASE("seed flag overrides the config") {
  const Run r = run("--config " + fixture("pcb_logit.json") + " --seed 7 --out json optimize");
  CHECK(r.status == 0);
  CHECK(json::parse(r.out)["seed"].get<std::uint64_t>() == 7);
}
