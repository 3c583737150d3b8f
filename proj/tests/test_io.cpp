#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "glmdopt/commands.hpp"
#include "test_support.hpp"

using namespace glmdopt;
using namespace glmdopt::testing;
using nlohmann::json;

namespace {

const std::filesystem::path kFixtures = GLMDOPT_FIXTURE_DIR;

json base_config() {
  return json::parse(R"({
    "design": [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]],
    "family": "poisson-log",
    "beta": [5.5, -0.18, -0.22],
    "seed": 1
  })");
}

void expect_config_error(const json& doc) {
  CHECK_THROWS_AS(parse_config(doc, kFixtures), ConfigError);
}

}  // namespace

TEST_CASE("CSV header detection") {
  const Matrix<double> with_header = parse_design_csv("I,A,B\n1,1,1\n1,-1,0.5\n\n1,0,2\n");
  CHECK(with_header.rows() == 3);
  CHECK(with_header.cols() == 3);
  CHECK(with_header(1, 2) == 0.5);
  const Matrix<double> bare = parse_design_csv("1, 1, 1\r\n1,-1,0.5\r\n1,0,2\r\n");
  CHECK(bare == with_header);
  CHECK_THROWS_AS(parse_design_csv("1,2\n1,x\n"), ConfigError);
  CHECK_THROWS_AS(parse_design_csv("1,2\n1,2,3\n"), ConfigError);
  CHECK_THROWS_AS(parse_design_csv("a,b,c\n1,2,3\n"), ConfigError);  // m < d
  CHECK(read_design_csv(kFixtures / "pcb_2x3.csv") == pcb_design());
}

TEST_CASE("fixture configs load") {
  const auto pcb = load_config(kFixtures / "pcb_logit.json");
  CHECK(pcb.design == pcb_design());
  CHECK(pcb.model.family_link == FamilyLink::BinaryLogit);
  REQUIRE(pcb.total.has_value());
  CHECK(*pcb.total == 2880);
  const auto ew = load_config(kFixtures / "harddisk_ew.json");
  REQUIRE(ew.prior.has_value());
  CHECK(ew.prior->size() == 4);
  CHECK(ew.mc_samples == 100000);
  const auto gamma = load_config(kFixtures / "insurance_gamma.json");
  CHECK(gamma.model.shape == doctest::Approx(1.0 / 55));
}

TEST_CASE("config validation") {
  SUBCASE("beta or prior is required") {
    json doc = base_config();
    doc.erase("beta");
    expect_config_error(doc);
  }
  SUBCASE("beta and prior together") {
    json doc = base_config();
    doc["prior"] = json::parse(R"([{"dist": "point", "params": [1]}, {"dist": "point", "params": [1]},
                                   {"dist": "point", "params": [1]}])");
    expect_config_error(doc);
  }
  SUBCASE("beta length") {
    json doc = base_config();
    doc["beta"] = {1, 2};
    expect_config_error(doc);
  }
  SUBCASE("unknown family") {
    json doc = base_config();
    doc["family"] = "poisson-identity";
    expect_config_error(doc);
  }
  SUBCASE("family of the wrong type") {
    json doc = base_config();
    doc["family"] = 3;
    expect_config_error(doc);
  }
  SUBCASE("total below d") {
    json doc = base_config();
    doc["total"] = 2;
    expect_config_error(doc);
  }
  SUBCASE("degenerate uniform prior") {
    json doc = base_config();
    doc.erase("beta");
    doc["prior"] = json::parse(R"([{"dist": "uniform", "params": [1, 1]}, {"dist": "point", "params": [1]},
                                   {"dist": "point", "params": [1]}])");
    expect_config_error(doc);
  }
  SUBCASE("unknown keys") {
    json doc = base_config();
    doc["options"] = {{"max_round", 3}};
    expect_config_error(doc);
    doc = base_config();
    doc["bta"] = 1;
    expect_config_error(doc);
  }
  SUBCASE("design given twice") {
    json doc = base_config();
    doc["design_csv"] = "main_effects_2x2.csv";
    expect_config_error(doc);
  }
  SUBCASE("gamma shape") {
    json doc = base_config();
    doc["family"] = "gamma-inverse";
    doc["shape"] = 0;
    expect_config_error(doc);
  }
}

TEST_CASE("gamma row with the wrong sign is reported with its index") {
  json doc = base_config();
  doc["family"] = "gamma-inverse";
  doc["beta"] = {0.5, 0.25, 0.5};  // eta = 1.25, 0.25, 0.75, -0.25
  const auto cfg = parse_config(doc, kFixtures);
  try {
    cmd_weights(cfg);
    FAIL("expected NonPositiveWeight");
  } catch (const DesignError& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveWeight);
    REQUIRE(e.row().has_value());
    CHECK(*e.row() == 3);
    CHECK(exit_code_for(e.kind()) == exit_code::kNumericalFailure);
  }
}

TEST_CASE("weights report for the 2x2 log-linear example") {
  const auto r = cmd_weights(load_config(kFixtures / "harddisk_poisson.json"));
  REQUIRE(r.json["weights"].size() == 4);
  const Vector<double> eta = main_effects_2x2() * vec({5.5, -0.18, -0.22});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r.json["weights"][i].get<double>() > 0);
    CHECK(rel_diff(r.json["weights"][i].get<double>(), std::exp(eta(Index(i)))) < 1e-14);
  }
}

TEST_CASE("allocation files") {
  const auto p = read_allocation_file(kFixtures / "uniform_8.txt");
  CHECK(p.size() == 8);
  CHECK(std::abs(p.sum() - 1) < 1e-12);
  const auto n = read_counts_file(kFixtures / "pcb_reference_exact.txt");
  CHECK(n == counts({621, 535, 569, 593, 331, 231}));
}

TEST_CASE("report commands") {
  const auto gamma = load_config(kFixtures / "insurance_gamma.json");
  const auto opt = cmd_optimize(gamma);
  CHECK(opt.exit_code == exit_code::kSuccess);
  CHECK(opt.json["certified_optimal"].get<bool>());
  const auto uniform = cmd_verify(gamma, uniform_allocation<double>(8));
  CHECK_FALSE(uniform.json["optimal"].get<bool>());
  const auto pub = read_allocation_file(kFixtures / "insurance_reference.txt");
  const auto eff = cmd_efficiency(gamma, uniform_allocation<double>(8), pub);
  CHECK(std::abs(eff.json["relative_efficiency"].get<double>() - 0.827) <= 0.005);

  auto no_total = load_config(kFixtures / "harddisk_poisson.json");
  CHECK_THROWS_AS(cmd_exact(no_total), ConfigError);
  CHECK_THROWS_AS(cmd_ew(no_total), ConfigError);
  CHECK_THROWS_AS(cmd_verify(no_total, vec({0.5, 0.5})), ConfigError);
}

TEST_CASE("display rounding") {
  CHECK(display_round(0.2157) == 0.216);
  CHECK(display_round(-1e-9) == 0.0);
  CHECK_FALSE(std::signbit(display_round(-1e-9)));
}
