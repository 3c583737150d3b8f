#ifndef GLMDOPT_DESIGN_HPP
#define GLMDOPT_DESIGN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "glmdopt/errors.hpp"
#include "glmdopt/types.hpp"

namespace glmdopt {

namespace detail {

template <typename DX, typename DW, typename DP>
void check_dimensions(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                      const Eigen::MatrixBase<DP>& p) {
  if (w.size() != X.rows() || p.size() != X.rows())
    throw DesignError(ErrorKind::DimensionMismatch,
                      "design has " + std::to_string(X.rows()) + " rows, weights " +
                          std::to_string(w.size()) + ", allocation " + std::to_string(p.size()));
}

}  // namespace detail

/// Relative slack accepted on `sum(p) == 1` before an allocation is rejected.
inline constexpr double kAllocationSumTolerance = 1e-12;

/// Validates a proportion vector and renormalises away floating drift.
/// Entries must be nonnegative and sum to one within 1e-12.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> normalized_allocation(const Eigen::MatrixBase<Derived>& p) {
  if (p.size() == 0) throw DesignError(ErrorKind::InvalidArgument, "empty allocation");
  if (!p.allFinite()) throw DesignError(ErrorKind::NonFiniteInput, "allocation has non-finite entries");
  if ((p.array() < Scalar(0)).any())
    throw DesignError(ErrorKind::InvalidArgument, "allocation has negative entries");
  const Scalar total = p.sum();
  if (std::abs(total - Scalar(1)) > Scalar(kAllocationSumTolerance))
    throw DesignError(ErrorKind::InvalidArgument,
                      "allocation sums to " + std::to_string(double(total)) + ", expected 1");
  return p / total;
}

template <typename Scalar>
Vector<Scalar> uniform_allocation(Index m) {
  return Vector<Scalar>::Constant(m, Scalar(1) / Scalar(m));
}

/// X' diag(p .* w) X.
template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
Matrix<Scalar> information_matrix(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                                  const Eigen::MatrixBase<DP>& p) {
  detail::check_dimensions(X, w, p);
  const Vector<Scalar> pw = p.cwiseProduct(w);
  return X.transpose() * pw.asDiagonal() * X;
}

/// D-criterion f(p) = |X' diag(p_1 w_1, ..., p_m w_m) X|.
///
/// Evaluated as prod_k R_kk^2 from a column-pivoted QR of diag(sqrt(p w)) X,
/// which is nonnegative by construction and loses only cond(X) rather than
/// cond(X)^2 digits. Numerical rank below d gives exactly 0.
///
/// `p` need not be normalised: integer replicate counts give the exact-design
/// criterion, and f(c p) = c^d f(p).
template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
Scalar objective(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                 const Eigen::MatrixBase<DP>& p) {
  detail::check_dimensions(X, w, p);
  const Vector<Scalar> pw = p.cwiseProduct(w);
  if (!pw.allFinite()) throw DesignError(ErrorKind::NonFiniteInput, "allocation or weights are not finite");
  if ((pw.array() < Scalar(0)).any())
    throw DesignError(ErrorKind::InvalidArgument, "allocation times weight must be nonnegative");
  const Index d = X.cols();
  if (d == 0) return Scalar(1);
  const Matrix<Scalar> A = pw.cwiseSqrt().asDiagonal() * X;
  const Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(A);
  if (qr.rank() < d) return Scalar(0);
  const Scalar det = qr.matrixR().diagonal().head(d).cwiseAbs().prod();
  return det * det;
}

/// Number of d-subsets of m rows, saturating at UINT64_MAX.
inline std::uint64_t subset_count(Index m, Index d) {
  if (d < 0 || d > m) return 0;
  d = std::min(d, m - d);
  std::uint64_t c = 1;
  for (Index k = 1; k <= d; ++k) {
    const auto num = static_cast<std::uint64_t>(m - d + k);
    if (c > UINT64_MAX / num) return UINT64_MAX;
    c = c * num / static_cast<std::uint64_t>(k);
  }
  return c;
}

inline constexpr std::uint64_t kMaxExpansionSubsets = 1'000'000;

/// Calls `visit(rows)` for every increasing d-subset of {0, ..., m-1}.
template <typename Visitor>
void for_each_subset(Index m, Index d, Visitor&& visit) {
  std::vector<Index> rows(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) rows[static_cast<std::size_t>(k)] = k;
  if (d > m) return;
  while (true) {
    visit(static_cast<const std::vector<Index>&>(rows));
    Index k = d - 1;
    while (k >= 0 && rows[static_cast<std::size_t>(k)] == m - d + k) --k;
    if (k < 0) return;
    ++rows[static_cast<std::size_t>(k)];
    for (Index j = k + 1; j < d; ++j)
      rows[static_cast<std::size_t>(j)] = rows[static_cast<std::size_t>(j - 1)] + 1;
  }
}

/// Determinant of the square submatrix formed by the given rows of X.
template <typename DX, typename Scalar = typename DX::Scalar>
Scalar row_subset_determinant(const Eigen::MatrixBase<DX>& X, const std::vector<Index>& rows) {
  const Matrix<Scalar> sub = X(rows, Eigen::all);
  return sub.fullPivLu().determinant();
}

/// f(p) as the sum over all d-row subsets of |X[subset]|^2 times the product
/// of p_i w_i over the subset. Exponential in m; used as a reference.
template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
Scalar objective_expansion(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                           const Eigen::MatrixBase<DP>& p) {
  detail::check_dimensions(X, w, p);
  const Index m = X.rows();
  const Index d = X.cols();
  if (subset_count(m, d) > kMaxExpansionSubsets)
    throw DesignError(ErrorKind::TooManySubsets,
                      "C(" + std::to_string(m) + "," + std::to_string(d) + ") exceeds 1e6");
  const Vector<Scalar> pw = p.cwiseProduct(w);
  Scalar total(0);
  for_each_subset(m, d, [&](const std::vector<Index>& rows) {
    Scalar mass(1);
    for (Index r : rows) mass *= pw(r);
    if (mass == Scalar(0)) return;
    const Scalar det = row_subset_determinant(X, rows);
    total += det * det * mass;
  });
  return total;
}

/// The allocation obtained by setting p_i = z and rescaling the other
/// entries by (1 - z) / (1 - p_i).
template <typename DP, typename Scalar = typename DP::Scalar>
Vector<Scalar> lifted_allocation(const Eigen::MatrixBase<DP>& p, Index i, Scalar z) {
  const Scalar rest = Scalar(1) - p(i);
  // p_i == 1 leaves nothing to rescale; the other entries are already zero
  const Scalar scale = rest > Scalar(0) ? (Scalar(1) - z) / rest : Scalar(0);
  Vector<Scalar> out = p * scale;
  out(i) = z;
  return out;
}

/// f_i(z): the objective along the lift direction of coordinate i.
template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
Scalar lift_value(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                  const Eigen::MatrixBase<DP>& p, Index i, Scalar z) {
  return objective(X, w, lifted_allocation(p, i, z));
}

/// Coefficients of f_i(z) = a z (1-z)^(d-1) + b (1-z)^d.
template <typename Scalar>
struct LiftProfile {
  Scalar a;
  Scalar b;
  Index d;

  Scalar operator()(Scalar z) const {
    return a * z * std::pow(Scalar(1) - z, Scalar(d - 1)) + b * std::pow(Scalar(1) - z, Scalar(d));
  }
};

/// Lift profile of coordinate i given the current value f = f(p) > 0.
/// Needs one extra objective evaluation: f_i(0) when p_i > 0, else f_i(1/2).
template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
LiftProfile<Scalar> lift_profile(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                                 const Eigen::MatrixBase<DP>& p, Index i, Scalar f) {
  if (!(f > Scalar(0)))
    throw DesignError(ErrorKind::SingularDesign, "lift profile requires f(p) > 0");
  if (i < 0 || i >= p.size())
    throw DesignError(ErrorKind::InvalidArgument, "coordinate index out of range");
  const Index d = X.cols();
  const Scalar pi = p(i);
  Scalar a, b;
  if (pi > Scalar(0)) {
    b = lift_value(X, w, p, i, Scalar(0));
    a = (f - b * std::pow(Scalar(1) - pi, Scalar(d))) / (pi * std::pow(Scalar(1) - pi, Scalar(d - 1)));
  } else {
    b = f;
    a = lift_value(X, w, p, i, Scalar(0.5)) * std::pow(Scalar(2), Scalar(d)) - b;
  }
  // both are nonnegative in exact arithmetic
  return {std::max(a, Scalar(0)), std::max(b, Scalar(0)), d};
}

template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
LiftProfile<Scalar> lift_profile(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                                 const Eigen::MatrixBase<DP>& p, Index i) {
  return lift_profile(X, w, p, i, objective(X, w, p));
}

/// (f(p_test) / f(p_ref))^(1/d).
template <typename DX, typename DW, typename DT, typename DR, typename Scalar = typename DX::Scalar>
Scalar relative_efficiency(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                           const Eigen::MatrixBase<DT>& p_test, const Eigen::MatrixBase<DR>& p_ref) {
  const Scalar f_ref = objective(X, w, p_ref);
  if (!(f_ref > Scalar(0)))
    throw DesignError(ErrorKind::SingularDesign, "reference design has f = 0");
  const Scalar f_test = objective(X, w, p_test);
  return std::pow(f_test / f_ref, Scalar(1) / Scalar(X.cols()));
}

/// Rows i < j with identical settings; duplicates are legal but split mass.
template <typename DX>
std::vector<std::pair<Index, Index>> duplicate_rows(const Eigen::MatrixBase<DX>& X) {
  std::vector<std::pair<Index, Index>> out;
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = i + 1; j < X.rows(); ++j)
      if (X.row(i) == X.row(j)) out.emplace_back(i, j);
  return out;
}

}  // namespace glmdopt

#endif  // GLMDOPT_DESIGN_HPP
