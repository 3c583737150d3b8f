#ifndef GLMDOPT_GLM_WEIGHTS_HPP
#define GLMDOPT_GLM_WEIGHTS_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "glmdopt/errors.hpp"
#include "glmdopt/types.hpp"

namespace glmdopt {

enum class FamilyLink {
  BinaryLogit,
  BinaryProbit,
  BinaryCloglog,
  BinaryLoglog,
  PoissonLog,
  GammaInverse,
  NormalIdentity,
};

inline const char* to_string(FamilyLink f) {
  switch (f) {
    case FamilyLink::BinaryLogit: return "binary-logit";
    case FamilyLink::BinaryProbit: return "binary-probit";
    case FamilyLink::BinaryCloglog: return "binary-cloglog";
    case FamilyLink::BinaryLoglog: return "binary-loglog";
    case FamilyLink::PoissonLog: return "poisson-log";
    case FamilyLink::GammaInverse: return "gamma-inverse";
    case FamilyLink::NormalIdentity: return "normal-identity";
  }
  return "unknown";
}

inline std::optional<FamilyLink> parse_family_link(std::string_view name) {
  for (auto f : {FamilyLink::BinaryLogit, FamilyLink::BinaryProbit,
                 FamilyLink::BinaryCloglog, FamilyLink::BinaryLoglog,
                 FamilyLink::PoissonLog, FamilyLink::GammaInverse,
                 FamilyLink::NormalIdentity}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

inline bool is_binary(FamilyLink f) {
  return f == FamilyLink::BinaryLogit || f == FamilyLink::BinaryProbit ||
         f == FamilyLink::BinaryCloglog || f == FamilyLink::BinaryLoglog;
}

/// Response family, link and assumed coefficients of a GLM.
///
/// `shape` is the known gamma shape k and `variance` the known normal
/// variance; each is only consulted by its own family.
template <typename Scalar = double>
struct GlmModel {
  FamilyLink family_link = FamilyLink::BinaryLogit;
  Vector<Scalar> beta;
  Scalar shape = Scalar(1);
  Scalar variance = Scalar(1);

  void validate() const {
    if (family_link == FamilyLink::GammaInverse && !(shape > Scalar(0)))
      throw DesignError(ErrorKind::InvalidArgument, "gamma shape k must be > 0");
    if (family_link == FamilyLink::NormalIdentity && !(variance > Scalar(0)))
      throw DesignError(ErrorKind::InvalidArgument, "normal variance must be > 0");
    if (!beta.allFinite())
      throw DesignError(ErrorKind::NonFiniteInput, "beta has non-finite entries");
  }
};

/// Smallest weight accepted for a design point. Anything below is treated as
/// an information-free point and rejected.
template <typename Scalar>
constexpr Scalar min_weight() {
  return Scalar(1e-300) > Scalar(0) ? Scalar(1e-300) : std::numeric_limits<Scalar>::min();
}

namespace detail {

// -expm1(-u) / u, with the u -> 0 limit.
template <typename Scalar>
Scalar one_minus_exp_neg_over(Scalar u) {
  if (u == Scalar(0)) return Scalar(1);
  return -std::expm1(-u) / u;
}

// Weight of the binary model whose success probability is 1 - exp(-e^eta),
// u^2 / (e^u - 1) with u = e^eta, evaluated in log space.
template <typename Scalar>
Scalar extreme_value_weight(Scalar eta) {
  const Scalar u = std::exp(eta);
  if (std::isinf(u)) return Scalar(0);
  // log(e^u - 1) = u + log(1 - e^-u) = u + eta + log(-expm1(-u) / u)
  const Scalar log_denominator = u + eta + std::log(one_minus_exp_neg_over(u));
  return std::exp(Scalar(2) * eta - log_denominator);
}

}  // namespace detail

/// Information weight nu(eta) = ((g^-1)'(eta))^2 / var(Y) of a single
/// replicate at linear predictor eta.
template <typename Scalar>
Scalar nu_eval(const GlmModel<Scalar>& model, Scalar eta) {
  using std::abs;
  using std::exp;
  using std::log;
  if (!std::isfinite(eta))
    throw DesignError(ErrorKind::NonFiniteInput, "linear predictor is not finite");

  switch (model.family_link) {
    case FamilyLink::BinaryLogit: {
      // 1 / (2 + e^eta + e^-eta) with the larger exponential factored out
      const Scalar t = exp(-abs(eta));
      return t / ((Scalar(1) + t) * (Scalar(1) + t));
    }
    case FamilyLink::BinaryProbit: {
      const Scalar a = abs(eta);
      const Scalar tail = Scalar(0.5) * std::erfc(a / std::numbers::sqrt2_v<Scalar>);
      if (tail == Scalar(0)) return Scalar(0);
      const Scalar body = Scalar(1) - tail;
      const Scalar log_phi =
          -Scalar(0.5) * a * a - Scalar(0.5) * log(Scalar(2) * std::numbers::pi_v<Scalar>);
      return exp(Scalar(2) * log_phi - log(tail) - log(body));
    }
    case FamilyLink::BinaryCloglog:
      return detail::extreme_value_weight(eta);
    case FamilyLink::BinaryLoglog:
      // exp(2 eta - e^eta) / (1 - exp(-e^eta)); algebraically the same
      // function as the cloglog weight because nu is invariant under
      // swapping success and failure.
      return detail::extreme_value_weight(eta);
    case FamilyLink::PoissonLog:
      return exp(eta);
    case FamilyLink::GammaInverse:
      if (eta == Scalar(0))
        throw DesignError(ErrorKind::GammaZeroEta, "gamma-inverse weight undefined at eta = 0");
      return model.shape / (eta * eta);
    case FamilyLink::NormalIdentity:
      return Scalar(1) / model.variance;
  }
  throw DesignError(ErrorKind::InvalidArgument, "unknown family/link");
}

/// Per-row weights w_i = nu(x_i' beta).
///
/// For gamma-inverse every eta_i must be nonzero and share the sign of the
/// first row: a positive predictor means eta = 1/mu, a negative one the
/// canonical-parameter form eta = -1/mu. A row that breaks the common sign
/// would imply a negative mean and is rejected.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> compute_weights(const Eigen::MatrixBase<Derived>& X, const GlmModel<Scalar>& model) {
  model.validate();
  if (X.cols() != model.beta.size())
    throw DesignError(ErrorKind::DimensionMismatch,
                      "design has " + std::to_string(X.cols()) + " columns but beta has " +
                          std::to_string(model.beta.size()) + " entries");
  if (!X.allFinite())
    throw DesignError(ErrorKind::NonFiniteInput, "design matrix has non-finite entries");

  const Vector<Scalar> eta = X * model.beta;
  Vector<Scalar> w(eta.size());
  const bool gamma = model.family_link == FamilyLink::GammaInverse;
  const Scalar orientation = eta.size() > 0 && eta(0) < Scalar(0) ? Scalar(-1) : Scalar(1);
  for (Index i = 0; i < eta.size(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    if (gamma && !(orientation * eta(i) > Scalar(0)))
      throw DesignError(ErrorKind::NonPositiveWeight,
                        "row " + std::to_string(i) + ": eta = " + std::to_string(double(eta(i))) +
                            " gives a non-positive gamma mean",
                        row);
    w(i) = nu_eval(model, eta(i));
    if (!std::isfinite(w(i)) || !(w(i) >= min_weight<Scalar>()))
      throw DesignError(ErrorKind::NonPositiveWeight,
                        "row " + std::to_string(i) + ": weight " + std::to_string(double(w(i))) +
                            " is not a usable positive number",
                        row);
  }
  return w;
}

/// Throws NonPositiveWeight unless every weight is finite and positive.
template <typename Derived>
void require_positive_weights(const Eigen::MatrixBase<Derived>& w) {
  for (Index i = 0; i < w.size(); ++i)
    if (!std::isfinite(w(i)) || !(w(i) > 0))
      throw DesignError(ErrorKind::NonPositiveWeight,
                        "weight " + std::to_string(i) + " is not positive", static_cast<std::size_t>(i));
}

}  // namespace glmdopt

#endif  // GLMDOPT_GLM_WEIGHTS_HPP
