#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace glmdopt;
using namespace glmdopt::testing;

namespace {

PriorSpec<double> harddisk_prior() {
  return {{UniformPrior<double>{-3, 3}, UniformPrior<double>{0, 2}, UniformPrior<double>{0, 1.5},
           UniformPrior<double>{0, 3}}};
}

const GlmModel<double> kPoisson{FamilyLink::PoissonLog, {}};

double sample_sd(const std::vector<double>& xs) {
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / double(xs.size() - 1));
}

}  // namespace

TEST_CASE("closed-form expected weights for the 2x3 log-linear example") {
  const Vector<double> ew = expected_weights(harddisk_2x3(), kPoisson, harddisk_prior(), ClosedFormPoisson{});
  const Vector<double> reference = vec({0.24, 3.35, 9.18, 1.75, 24.76, 67.86});
  CHECK((ew - reference).cwiseAbs().maxCoeff() <= 0.01);
}

TEST_CASE("uniform moment is exact, including a zero covariate") {
  // E exp(U x) for U ~ U(a, b) is (e^{bx} - e^{ax}) / ((b - a) x), and 1 at x = 0.
  Matrix<double> X(3, 1);
  X << 0, 1e-9, 2;
  const PriorSpec<double> prior{{UniformPrior<double>{-1, 3}}};
  const Vector<double> ew = expected_weights(X, kPoisson, prior, ClosedFormPoisson{});
  CHECK(ew(0) == 1.0);
  CHECK(rel_diff(ew(1), 1 + 1e-9) < 1e-14);
  CHECK(rel_diff(ew(2), (std::exp(6.0) - std::exp(-2.0)) / 8.0) < 1e-14);
}

TEST_CASE("point priors reproduce the local weights") {
  const Matrix<double> X = harddisk_2x3();
  const Vector<double> beta = vec({0.3, 1.2, -0.4, 0.9});
  PriorSpec<double> prior;
  for (Index j = 0; j < 4; ++j) prior.components.emplace_back(PointPrior<double>{beta(j)});

  GlmModel<double> local = kPoisson;
  local.beta = beta;
  const Vector<double> w = compute_weights(X, local);
  CHECK((expected_weights(X, kPoisson, prior, ClosedFormPoisson{}) - w).cwiseAbs().maxCoeff() <=
        1e-13 * w.maxCoeff());
  const Vector<double> mc = expected_weights(X, kPoisson, prior, MonteCarlo{1000, 3, 2});
  for (Index i = 0; i < X.rows(); ++i) CHECK(rel_diff(mc(i), w(i)) < 1e-13);

  GlmModel<double> logit{FamilyLink::BinaryLogit, beta};
  GlmModel<double> logit_family{FamilyLink::BinaryLogit, {}};
  const Vector<double> mc_logit = expected_weights(X, logit_family, prior, MonteCarlo{500, 1, 1});
  const Vector<double> w_logit = compute_weights(X, logit);
  for (Index i = 0; i < X.rows(); ++i) CHECK(rel_diff(mc_logit(i), w_logit(i)) < 1e-13);

  const auto a = ew_optimize(X, expected_weights(X, kPoisson, prior, ClosedFormPoisson{}));
  const auto b = lift_one_optimize(X, w);
  CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Monte Carlo agrees with the closed form within one percent") {
  const Matrix<double> X = harddisk_2x3();
  const Vector<double> exact = expected_weights(X, kPoisson, harddisk_prior(), ClosedFormPoisson{});
  const Vector<double> mc = expected_weights(X, kPoisson, harddisk_prior(), MonteCarlo{1'000'000, 7, 0});
  for (Index i = 0; i < X.rows(); ++i) CHECK(rel_diff(mc(i), exact(i)) < 0.01);
  CHECK((mc.array() > 0).all());
}

TEST_CASE("Monte Carlo result does not depend on the number of workers") {
  const Matrix<double> X = harddisk_2x3();
  const GlmModel<double> logit{FamilyLink::BinaryLogit, {}};
  const PriorSpec<double> prior{{UniformPrior<double>{-1, 1}, UniformPrior<double>{0, 1},
                                 UniformPrior<double>{-0.5, 0.5}, PointPrior<double>{0.2}}};
  const Vector<double> one = expected_weights(X, logit, prior, MonteCarlo{50'000, 11, 1});
  for (unsigned workers : {2u, 3u, 8u, 0u}) CHECK(expected_weights(X, logit, prior, MonteCarlo{50'000, 11, workers}) == one);
  CHECK(expected_weights(X, logit, prior, MonteCarlo{50'000, 12, 1}) != one);
}

TEST_CASE("Monte Carlo error shrinks like one over the square root of the sample size") {
  const Matrix<double> X = harddisk_2x3();
  std::vector<double> small, large;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    small.push_back(expected_weights(X, kPoisson, harddisk_prior(), MonteCarlo{4096, seed, 1})(5));
    large.push_back(expected_weights(X, kPoisson, harddisk_prior(), MonteCarlo{4 * 4096, seed + 1000, 1})(5));
  }
  const double ratio = sample_sd(small) / sample_sd(large);
  CHECK(ratio > 1.3);
  CHECK(ratio < 3.0);
}

TEST_CASE("EW design for the 2x3 log-linear example") {
  const Matrix<double> X = harddisk_2x3();
  const Vector<double> ew = expected_weights(X, kPoisson, harddisk_prior(), ClosedFormPoisson{});
  LiftOneOptions o;
  o.seed = 1;
  const auto r = ew_optimize(X, ew, o);
  REQUIRE(r.converged);
  CHECK((r.p - vec({0, 0, 0.25, 0.25, 0.25, 0.25})).cwiseAbs().maxCoeff() <= 5e-4);
  CHECK(verify_optimal(X, ew, r.p).optimal);

  const double averaged =
      prior_relative_efficiency(X, kPoisson, harddisk_prior(), uniform_allocation<double>(6), r.p, MonteCarlo{100'000, 1, 0});
  CHECK(std::abs(averaged - 0.84) <= 0.01);
}

TEST_CASE("invalid prior requests") {
  const Matrix<double> X = harddisk_2x3();
  try {
    expected_weights(X, GlmModel<double>{FamilyLink::BinaryLogit, {}}, harddisk_prior(), ClosedFormPoisson{});
    FAIL("expected UnsupportedCombination");
  } catch (const DesignError& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedCombination);
  }
  PriorSpec<double> degenerate = harddisk_prior();
  degenerate.components[1] = UniformPrior<double>{1, 1};
  CHECK_THROWS_AS(expected_weights(X, kPoisson, degenerate, ClosedFormPoisson{}), DesignError);

  PriorSpec<double> short_prior = harddisk_prior();
  short_prior.components.pop_back();
  try {
    expected_weights(X, kPoisson, short_prior, ClosedFormPoisson{});
    FAIL("expected DimensionMismatch");
  } catch (const DesignError& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}
