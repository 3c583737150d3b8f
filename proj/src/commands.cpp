#include "glmdopt/commands.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "glmdopt/certify.hpp"
#include "glmdopt/design.hpp"

namespace glmdopt {

namespace {

nlohmann::json to_json(const Vector<double>& v) {
  auto out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

nlohmann::json to_json(const Counts& n) {
  auto out = nlohmann::json::array();
  for (Index i = 0; i < n.size(); ++i) out.push_back(n(i));
  return out;
}

nlohmann::json display_json(const Vector<double>& p) {
  auto out = nlohmann::json::array();
  for (Index i = 0; i < p.size(); ++i) out.push_back(display_round(p(i)));
  return out;
}

std::string fixed3(double x) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(3) << display_round(x);
  return ss.str();
}

std::string general(double x) {
  std::ostringstream ss;
  ss << std::setprecision(10) << x;
  return ss.str();
}

std::string weight_source(const ProblemConfig& cfg) {
  return cfg.prior ? "expected" : "local";
}

void check_allocation_length(const ProblemConfig& cfg, Index size, const std::string& what) {
  if (size != cfg.design.rows())
    throw ConfigError(what + " has " + std::to_string(size) + " entries but the design has " +
                      std::to_string(cfg.design.rows()) + " rows");
}

nlohmann::json certificate_json(const OptimalityCertificate<double>& cert) {
  nlohmann::json j;
  j["optimal"] = cert.optimal;
  j["objective"] = cert.objective;
  j["tolerance"] = cert.tolerance;
  j["per_point"] = nlohmann::json::array();
  for (const auto& c : cert.per_point) {
    j["per_point"].push_back({{"index", c.index},
                              {"case", to_string(c.kind)},
                              {"lhs", c.lhs},
                              {"rhs", c.rhs},
                              {"pass", c.pass},
                              {"clamped", c.clamped}});
  }
  return j;
}

}  // namespace

double display_round(double x) {
  const double r = std::round(x * 1000.0) / 1000.0;
  return r == 0.0 ? 0.0 : r;  // no "-0.000"
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::NonFiniteInput:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::TooManySubsets:
    case ErrorKind::UnsupportedCombination:
      return exit_code::kConfigError;
    case ErrorKind::GammaZeroEta:
    case ErrorKind::NonPositiveWeight:
    case ErrorKind::SingularDesign:
    case ErrorKind::EmptyPair:
    case ErrorKind::SingularSupport:
      return exit_code::kNumericalFailure;
  }
  return exit_code::kNumericalFailure;
}

Vector<double> resolve_weights(const ProblemConfig& cfg) {
  if (!cfg.prior) return compute_weights(cfg.design, cfg.model);
  const bool poisson = cfg.model.family_link == FamilyLink::PoissonLog;
  bool closed = poisson;
  if (cfg.ew_method == EwMethodChoice::ClosedForm) closed = true;
  if (cfg.ew_method == EwMethodChoice::MonteCarlo) closed = false;
  EwMethod method = ClosedFormPoisson{};
  if (!closed) method = MonteCarlo{cfg.mc_samples, cfg.seed, 0};
  return expected_weights(cfg.design, cfg.model, *cfg.prior, method);
}

Report cmd_weights(const ProblemConfig& cfg) {
  const Vector<double> w = resolve_weights(cfg);
  Report r;
  r.json["command"] = "weights";
  r.json["family"] = to_string(cfg.model.family_link);
  r.json["weight_source"] = weight_source(cfg);
  r.json["weights"] = to_json(w);
  std::ostringstream t;
  t << "family: " << to_string(cfg.model.family_link) << " (" << weight_source(cfg) << " weights)\n";
  if (!cfg.prior) {
    const Vector<double> eta = cfg.design * cfg.model.beta;
    r.json["eta"] = to_json(eta);
    t << std::setw(5) << "row" << std::setw(16) << "eta" << std::setw(18) << "w" << "\n";
    for (Index i = 0; i < w.size(); ++i)
      t << std::setw(5) << i << std::setw(16) << general(eta(i)) << std::setw(18) << general(w(i)) << "\n";
  } else {
    t << std::setw(5) << "row" << std::setw(18) << "E(w)" << "\n";
    for (Index i = 0; i < w.size(); ++i) t << std::setw(5) << i << std::setw(18) << general(w(i)) << "\n";
  }
  r.text = t.str();
  return r;
}

Report cmd_optimize(const ProblemConfig& cfg) {
  const Vector<double> w = resolve_weights(cfg);
  LiftOneOptions opts = cfg.lift;
  opts.seed = cfg.seed;
  const auto res = lift_one_optimize(cfg.design, w, opts);
  const auto cert = verify_optimal(cfg.design, w, res.p, opts.certify_tol);
  const double eff_uniform =
      relative_efficiency(cfg.design, w, uniform_allocation<double>(cfg.design.rows()), res.p);

  Report r;
  r.json["command"] = "optimize";
  r.json["weight_source"] = weight_source(cfg);
  r.json["weights"] = to_json(w);
  r.json["p"] = to_json(res.p);
  r.json["p_display"] = display_json(res.p);
  r.json["objective"] = res.f;
  r.json["rounds"] = res.rounds;
  r.json["converged"] = res.converged;
  r.json["certified_optimal"] = cert.optimal;
  r.json["uniform_relative_efficiency"] = eff_uniform;
  r.json["seed"] = cfg.seed;

  std::ostringstream t;
  t << "approximate D-optimal design (lift-one, " << res.rounds << " rounds, "
    << (res.converged ? "converged" : "NOT converged") << ")\n";
  t << std::setw(5) << "row" << std::setw(10) << "p" << std::setw(24) << "p (full)" << "\n";
  for (Index i = 0; i < res.p.size(); ++i)
    t << std::setw(5) << i << std::setw(10) << fixed3(res.p(i)) << std::setw(24) << std::setprecision(17)
      << res.p(i) << "\n";
  t << "f(p) = " << general(res.f) << "\n";
  t << "certificate: " << (cert.optimal ? "optimal" : "NOT optimal") << "\n";
  t << "relative efficiency of the uniform design: " << fixed3(eff_uniform) << "\n";
  r.text = t.str();
  r.exit_code = res.converged ? exit_code::kSuccess : exit_code::kNonConvergence;
  return r;
}

Report cmd_exact(const ProblemConfig& cfg, const std::optional<Counts>& compare) {
  if (!cfg.total) throw ConfigError("exact designs need \"total\" in the config");
  const Vector<double> w = resolve_weights(cfg);
  ExchangeOptions eo = cfg.exchange;
  eo.seed = cfg.seed;
  const auto res = exchange_multistart(cfg.design, w, *cfg.total, eo, cfg.lift);

  Report r;
  r.json["command"] = "exact";
  r.json["total"] = *cfg.total;
  r.json["n"] = to_json(res.n);
  r.json["objective"] = res.f;
  r.json["rounds"] = res.rounds;
  r.json["converged"] = res.converged;
  r.json["best_start"] = res.start;
  r.json["starts"] = eo.starts;
  r.json["seed"] = cfg.seed;

  std::ostringstream t;
  t << "exact design, total " << *cfg.total << " (exchange, best of " << eo.starts << " starts)\n";
  t << std::setw(5) << "row" << std::setw(10) << "n" << "\n";
  for (Index i = 0; i < res.n.size(); ++i) t << std::setw(5) << i << std::setw(10) << res.n(i) << "\n";
  t << "f(n) = " << general(res.f) << "\n";

  if (compare) {
    check_allocation_length(cfg, compare->size(), "comparison allocation");
    if (compare->sum() != *cfg.total)
      throw ConfigError("comparison allocation sums to " + std::to_string(compare->sum()) + ", expected " +
                        std::to_string(*cfg.total));
    const double f_cmp = objective(cfg.design, w, compare->cast<double>());
    const bool dominates = res.f >= f_cmp * (1.0 - 1e-9);
    r.json["compare"] = {{"n", to_json(*compare)}, {"objective", f_cmp}, {"dominates", dominates}};
    t << "comparison f = " << general(f_cmp) << (dominates ? " (result is at least as good)" : " (result is WORSE)") << "\n";
  }
  r.text = t.str();
  r.exit_code = res.converged ? exit_code::kSuccess : exit_code::kNonConvergence;
  return r;
}

Report cmd_verify(const ProblemConfig& cfg, const Vector<double>& p) {
  check_allocation_length(cfg, p.size(), "allocation");
  const Vector<double> w = resolve_weights(cfg);
  const auto cert = verify_optimal(cfg.design, w, p, cfg.lift.certify_tol);
  Report r;
  r.json = certificate_json(cert);
  r.json["command"] = "verify";
  std::ostringstream t;
  t << "D-optimality certificate: " << (cert.optimal ? "OPTIMAL" : "NOT optimal") << " (tol "
    << cert.tolerance << ", f = " << general(cert.objective) << ")\n";
  t << std::setw(5) << "row" << std::setw(15) << "case" << std::setw(18) << "lhs" << std::setw(18) << "rhs"
    << std::setw(6) << "ok" << "\n";
  for (const auto& c : cert.per_point)
    t << std::setw(5) << c.index << std::setw(15) << to_string(c.kind) << std::setw(18) << general(c.lhs)
      << std::setw(18) << general(c.rhs) << std::setw(6) << (c.pass ? "yes" : "no")
      << (c.clamped ? "  (tiny mass read as 0)" : "") << "\n";
  r.text = t.str();
  return r;
}

Report cmd_efficiency(const ProblemConfig& cfg, const Vector<double>& p_test, const Vector<double>& p_ref) {
  check_allocation_length(cfg, p_test.size(), "test allocation");
  check_allocation_length(cfg, p_ref.size(), "reference allocation");
  const Vector<double> w = resolve_weights(cfg);
  const double eff = relative_efficiency(cfg.design, w, normalized_allocation(p_test), normalized_allocation(p_ref));
  Report r;
  r.json["command"] = "efficiency";
  r.json["relative_efficiency"] = eff;
  r.json["weight_source"] = weight_source(cfg);
  r.text = "relative efficiency (f(test)/f(ref))^(1/d) = " + general(eff) + "\n";
  return r;
}

Report cmd_ew(const ProblemConfig& cfg) {
  if (!cfg.prior) throw ConfigError("the ew command needs a \"prior\" in the config");
  const Vector<double> ew = resolve_weights(cfg);
  LiftOneOptions opts = cfg.lift;
  opts.seed = cfg.seed;
  const auto res = ew_optimize(cfg.design, ew, opts);
  const auto cert = verify_optimal(cfg.design, ew, res.p, opts.certify_tol);
  const Vector<double> uniform = uniform_allocation<double>(cfg.design.rows());
  const double eff_ew = relative_efficiency(cfg.design, ew, uniform, res.p);
  const double eff_prior = prior_relative_efficiency(cfg.design, cfg.model, *cfg.prior, uniform, res.p,
                                                     MonteCarlo{cfg.mc_samples, cfg.seed, 0});
  Report r;
  r.json["command"] = "ew";
  r.json["expected_weights"] = to_json(ew);
  r.json["p"] = to_json(res.p);
  r.json["p_display"] = display_json(res.p);
  r.json["objective"] = res.f;
  r.json["rounds"] = res.rounds;
  r.json["converged"] = res.converged;
  r.json["certified_optimal"] = cert.optimal;
  r.json["uniform_efficiency_expected_weights"] = eff_ew;
  r.json["uniform_efficiency_prior_averaged"] = eff_prior;
  r.json["mc_samples"] = cfg.mc_samples;
  r.json["seed"] = cfg.seed;

  std::ostringstream t;
  t << "EW D-optimal design (" << res.rounds << " rounds, " << (res.converged ? "converged" : "NOT converged")
    << ")\n";
  t << std::setw(5) << "row" << std::setw(14) << "E(w)" << std::setw(10) << "p" << "\n";
  for (Index i = 0; i < res.p.size(); ++i)
    t << std::setw(5) << i << std::setw(14) << general(ew(i)) << std::setw(10) << fixed3(res.p(i)) << "\n";
  t << "|X'E(W)X| = " << general(res.f) << "\n";
  t << "certificate: " << (cert.optimal ? "optimal" : "NOT optimal") << "\n";
  t << "uniform design efficiency, under E(W): " << fixed3(eff_ew) << "\n";
  t << "uniform design efficiency, prior-averaged: " << fixed3(eff_prior) << "\n";
  r.text = t.str();
  r.exit_code = res.converged ? exit_code::kSuccess : exit_code::kNonConvergence;
  return r;
}

}  // namespace glmdopt
