#ifndef GLMDOPT_CERTIFY_HPP
#define GLMDOPT_CERTIFY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "glmdopt/design.hpp"
#include "glmdopt/glm_weights.hpp"

namespace glmdopt {

/// Masses below this are treated as exactly zero by verify_optimal.
inline constexpr double kZeroMassThreshold = 1e-12;

/// Default relative tolerance for the optimality conditions.
inline constexpr double kDefaultCertifyTolerance = 1e-7;

enum class PointCase {
  ZeroMass,      // p_i = 0: f_i(1/2) <= (d+1)/2^d f(p)
  PositiveMass,  // 0 < p_i <= 1/d: f_i(0) = (1 - p_i d)/(1 - p_i)^d f(p)
  ExcessMass,    // p_i > 1/d + tol: never optimal
};

inline const char* to_string(PointCase c) {
  switch (c) {
    case PointCase::ZeroMass: return "zero-mass";
    case PointCase::PositiveMass: return "positive-mass";
    case PointCase::ExcessMass: return "excess-mass";
  }
  return "unknown";
}

template <typename Scalar>
struct PointCheck {
  Index index;
  PointCase kind;
  Scalar lhs;
  Scalar rhs;
  bool pass;
  bool clamped;  // a tiny positive mass was read as zero
};

template <typename Scalar>
struct OptimalityCertificate {
  bool optimal = false;
  Scalar objective = Scalar(0);
  Scalar tolerance = Scalar(kDefaultCertifyTolerance);
  std::vector<PointCheck<Scalar>> per_point;
};

/// Checks the per-point necessary and sufficient conditions for p to
/// maximise f. Both sides of each condition are reported; the slack on each
/// comparison is tol * f(p).
template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
OptimalityCertificate<Scalar> verify_optimal(const Eigen::MatrixBase<DX>& X,
                                             const Eigen::MatrixBase<DW>& w,
                                             const Eigen::MatrixBase<DP>& p_in,
                                             Scalar tol = Scalar(kDefaultCertifyTolerance)) {
  detail::check_dimensions(X, w, p_in);
  require_positive_weights(w);
  if (!(tol > Scalar(0))) throw DesignError(ErrorKind::InvalidArgument, "tolerance must be > 0");

  Vector<Scalar> p = p_in;
  std::vector<bool> clamped(static_cast<std::size_t>(p.size()), false);
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) > Scalar(0) && p(i) < Scalar(kZeroMassThreshold)) {
      p(i) = Scalar(0);
      clamped[static_cast<std::size_t>(i)] = true;
    }
  }
  p = normalized_allocation(p);

  const Index d = X.cols();
  const Scalar f = objective(X, w, p);
  if (!(f > Scalar(0))) throw DesignError(ErrorKind::SingularDesign, "f(p) = 0");

  OptimalityCertificate<Scalar> cert;
  cert.objective = f;
  cert.tolerance = tol;
  cert.optimal = true;
  const Scalar slack = tol * f;
  const Scalar inv_d = Scalar(1) / Scalar(d);
  for (Index i = 0; i < p.size(); ++i) {
    PointCheck<Scalar> c{i, PointCase::ZeroMass, Scalar(0), Scalar(0), false,
                         clamped[static_cast<std::size_t>(i)]};
    const Scalar pi = p(i);
    if (pi == Scalar(0)) {
      c.kind = PointCase::ZeroMass;
      c.lhs = lift_value(X, w, p, i, Scalar(0.5));
      c.rhs = Scalar(d + 1) / std::pow(Scalar(2), Scalar(d)) * f;
      c.pass = c.lhs <= c.rhs + slack;
    } else if (pi <= inv_d + tol) {
      c.kind = PointCase::PositiveMass;
      // p_i == 1 (only possible for d == 1): removing the sole support point
      // leaves nothing, so both sides vanish.
      c.lhs = pi < Scalar(1) ? lift_value(X, w, p, i, Scalar(0)) : Scalar(0);
      const Scalar coef = Scalar(1) - pi * Scalar(d);
      c.rhs = pi < Scalar(1) ? coef / std::pow(Scalar(1) - pi, Scalar(d)) * f : Scalar(0);
      c.pass = std::abs(c.lhs - c.rhs) <= slack;
    } else {
      c.kind = PointCase::ExcessMass;
      c.lhs = pi;
      c.rhs = inv_d;
      c.pass = false;
    }
    cert.optimal = cert.optimal && c.pass;
    cert.per_point.push_back(c);
  }
  return cert;
}

template <typename Scalar>
struct SaturatedPointCheck {
  Index index;
  Scalar lhs;  // sum_j |X[{i} u I \ {j}]|^2 / w_j
  Scalar rhs;  // |X[I]|^2 / w_i
  bool pass;
};

template <typename Scalar>
struct SaturatedCertificate {
  bool optimal = false;
  Scalar support_determinant = Scalar(0);
  std::vector<SaturatedPointCheck<Scalar>> details;
};

/// Whether the design with mass 1/d on each row of `support` is optimal,
/// evaluated through d x d determinants of X only.
template <typename DX, typename DW, typename Scalar = typename DX::Scalar>
SaturatedCertificate<Scalar> check_saturated(const Eigen::MatrixBase<DX>& X,
                                             const Eigen::MatrixBase<DW>& w,
                                             std::vector<Index> support) {
  const Index m = X.rows();
  const Index d = X.cols();
  if (w.size() != m) throw DesignError(ErrorKind::DimensionMismatch, "weights do not match design rows");
  require_positive_weights(w);
  if (static_cast<Index>(support.size()) != d)
    throw DesignError(ErrorKind::InvalidArgument, "support must contain exactly d rows");
  std::sort(support.begin(), support.end());
  if (std::adjacent_find(support.begin(), support.end()) != support.end())
    throw DesignError(ErrorKind::InvalidArgument, "support rows must be distinct");
  for (Index r : support)
    if (r < 0 || r >= m) throw DesignError(ErrorKind::InvalidArgument, "support row out of range");

  SaturatedCertificate<Scalar> out;
  out.support_determinant = row_subset_determinant(X, support);
  const Scalar det2 = out.support_determinant * out.support_determinant;
  const Scalar scale = X.cwiseAbs().maxCoeff();
  if (det2 <= std::pow(Scalar(1e-12) * std::max(scale, Scalar(1)), Scalar(2 * d)))
    throw DesignError(ErrorKind::SingularSupport, "support rows are linearly dependent");

  out.optimal = true;
  for (Index i = 0; i < m; ++i) {
    if (std::find(support.begin(), support.end(), i) != support.end()) continue;
    Scalar lhs(0);
    for (std::size_t k = 0; k < support.size(); ++k) {
      std::vector<Index> swapped = support;
      swapped[k] = i;
      const Scalar det = row_subset_determinant(X, swapped);
      lhs += det * det / w(support[k]);
    }
    const Scalar rhs = det2 / w(i);
    const bool pass = lhs <= rhs * (Scalar(1) + Scalar(1e-12));
    out.optimal = out.optimal && pass;
    out.details.push_back({i, lhs, rhs, pass});
  }
  return out;
}

/// The allocation with mass 1/d on each support row.
template <typename Scalar>
Vector<Scalar> saturated_allocation(Index m, const std::vector<Index>& support) {
  Vector<Scalar> p = Vector<Scalar>::Zero(m);
  for (Index r : support) p(r) = Scalar(1) / Scalar(support.size());
  return p;
}

}  // namespace glmdopt

#endif  // GLMDOPT_CERTIFY_HPP
