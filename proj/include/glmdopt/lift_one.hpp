#ifndef GLMDOPT_LIFT_ONE_HPP
#define GLMDOPT_LIFT_ONE_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "glmdopt/certify.hpp"
#include "glmdopt/design.hpp"
#include "glmdopt/glm_weights.hpp"

namespace glmdopt {

/// Relative drop in a freshly evaluated f that is attributed to rounding.
inline constexpr double kLiftOneNoiseBand = 1e-12;

struct LiftOneOptions {
  std::uint64_t seed = 0;
  int max_rounds = 1000;
  double tol = 1e-10;          // relative gain below which a pass counts as idle
  int safeguard_period = 10;   // every n-th round takes the single best coordinate step
  double certify_tol = kDefaultCertifyTolerance;

  void validate() const {
    if (max_rounds < 1) throw DesignError(ErrorKind::InvalidArgument, "max_rounds must be >= 1");
    if (!(tol > 0)) throw DesignError(ErrorKind::InvalidArgument, "tol must be > 0");
    if (safeguard_period < 1)
      throw DesignError(ErrorKind::InvalidArgument, "safeguard_period must be >= 1");
    if (!(certify_tol > 0)) throw DesignError(ErrorKind::InvalidArgument, "certify_tol must be > 0");
  }
};

template <typename Scalar>
struct LiftOneResult {
  Vector<Scalar> p;
  Scalar f = Scalar(0);
  int rounds = 0;
  bool converged = false;
  std::vector<Scalar> history;  // f after each accepted step, starting with f(p0)
};

template <typename Scalar>
struct ProfileMaximum {
  Scalar z;
  Scalar value;
};

/// Maximiser of a z (1-z)^(d-1) + b (1-z)^d over [0, 1].
/// The tie a == b d resolves to z = 0.
template <typename Scalar>
ProfileMaximum<Scalar> maximize_profile(const LiftProfile<Scalar>& prof) {
  const Scalar a = prof.a;
  const Scalar b = prof.b;
  const Index d = prof.d;
  assert(d >= 1);
  if (a > b * Scalar(d)) {
    // a > b d >= b, so a - b > 0
    const Scalar z = (a - b * Scalar(d)) / ((a - b) * Scalar(d));
    const Scalar value = d == 1 ? a
                                : std::pow(Scalar(d - 1) / (a - b), Scalar(d - 1)) *
                                      std::pow(a / Scalar(d), Scalar(d));
    return {z, value};
  }
  return {Scalar(0), b};
}

namespace detail {

// Applies the lift of coordinate i to z and renormalises. Entries at zero stay
// exactly zero.
template <typename Scalar>
void apply_lift(Vector<Scalar>& p, Index i, Scalar z) {
  p = lifted_allocation(p, i, z);
  p /= p.sum();
}

// Newton direction for log f restricted to the current support, with the
// masses kept summing to one. With v_i = sqrt(w_i) x_i and B = V M^-1 V',
// the gradient is diag(B) and the Hessian -(B .* B). Returns an empty vector
// if the direction is unusable.
template <typename DX, typename DW, typename Scalar>
Vector<Scalar> support_newton_direction(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                                        const Vector<Scalar>& p, const std::vector<Index>& support) {
  const auto k = static_cast<Index>(support.size());
  const Index d = X.cols();
  Matrix<Scalar> V(k, d);
  Vector<Scalar> ps(k);
  for (Index r = 0; r < k; ++r) {
    const Index i = support[static_cast<std::size_t>(r)];
    V.row(r) = std::sqrt(w(i)) * X.row(i);
    ps(r) = p(i);
  }
  const Matrix<Scalar> M = V.transpose() * ps.asDiagonal() * V;
  const Eigen::LLT<Matrix<Scalar>> llt(M);
  if (llt.info() != Eigen::Success) return {};
  const Matrix<Scalar> C = llt.matrixL().solve(V.transpose());
  const Matrix<Scalar> B = C.transpose() * C;

  Matrix<Scalar> K(k + 1, k + 1);
  K.topLeftCorner(k, k) = B.cwiseProduct(B);
  K.col(k).head(k).setOnes();
  K.row(k).head(k).setOnes();
  K(k, k) = Scalar(0);
  Vector<Scalar> rhs(k + 1);
  rhs.head(k) = B.diagonal();
  rhs(k) = Scalar(0);
  const Vector<Scalar> sol = K.completeOrthogonalDecomposition().solve(rhs);
  if (!sol.allFinite()) return {};
  return sol.head(k);
}

}  // namespace detail

/// Coordinate ascent over the probability simplex: each step re-optimises
/// one mass in closed form while the others are rescaled proportionally.
///
/// Rounds sweep the coordinates in a seeded random order; every
/// `safeguard_period`-th round instead applies the single best coordinate
/// step. A run is declared converged once a round yields no relative gain
/// above `tol` and the optimality certificate passes.
template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
LiftOneResult<Scalar> lift_one_optimize(const Eigen::MatrixBase<DX>& X,
                                        const Eigen::MatrixBase<DW>& w_in,
                                        const Eigen::MatrixBase<DP>& p0,
                                        const LiftOneOptions& opts = {}) {
  opts.validate();
  detail::check_dimensions(X, w_in, p0);
  require_positive_weights(w_in);
  const Index m = X.rows();

  // The argmax is invariant under w -> c w; working with w / max(w) keeps
  // the iterates free of the weight scale.
  const Scalar w_scale = w_in.maxCoeff();
  const Vector<Scalar> w = w_in / w_scale;

  Vector<Scalar> p = normalized_allocation(p0);
  Scalar f = objective(X, w, p);
  if (!(f > Scalar(0))) throw DesignError(ErrorKind::SingularDesign, "f(p0) = 0");

  std::mt19937_64 rng(opts.seed);
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index(0));

  LiftOneResult<Scalar> result;
  const Scalar f_unscale = std::pow(w_scale, Scalar(X.cols()));
  result.history.push_back(f * f_unscale);

  // Returns the relative gain of the accepted step, or 0 if rejected. A
  // closed-form step never lowers f in exact arithmetic, so a drop within the
  // evaluation noise band is accepted; near the optimum the true gains are
  // below double resolution while the step still moves p toward the optimum.
  auto try_step = [&](Index i, Scalar z) -> Scalar {
    Vector<Scalar> candidate = p;
    detail::apply_lift(candidate, i, z);
    const Scalar f_new = objective(X, w, candidate);
    if (!(f_new >= f * (Scalar(1) - Scalar(kLiftOneNoiseBand)))) return Scalar(0);
    const Scalar gain = (f_new - f) / f;
    p = std::move(candidate);
    f = f_new;
    result.history.push_back(f * f_unscale);
    return gain;
  };

  // Newton step on the current support. Coordinate steps converge only
  // linearly once the support has settled, and very slowly when log f is
  // flat along the support.
  auto try_polish = [&]() -> Scalar {
    std::vector<Index> support;
    for (Index i = 0; i < m; ++i)
      if (p(i) > Scalar(0)) support.push_back(i);
    if (support.size() < 2) return Scalar(0);
    const Vector<Scalar> dir = detail::support_newton_direction(X, w, p, support);
    if (dir.size() == 0) return Scalar(0);
    // the optimum is often on a face of the support: stop where the first
    // mass reaches zero and drop that point
    Scalar t_max(1);
    std::size_t blocking = support.size();
    for (std::size_t r = 0; r < support.size(); ++r) {
      const Scalar step = dir(static_cast<Index>(r));
      if (step < Scalar(0) && -p(support[r]) / step < t_max) {
        t_max = -p(support[r]) / step;
        blocking = r;
      }
    }
    for (Scalar t = t_max; t >= Scalar(1e-4) * t_max; t /= Scalar(2)) {
      Vector<Scalar> candidate = p;
      for (std::size_t r = 0; r < support.size(); ++r)
        candidate(support[r]) = std::max(Scalar(0), candidate(support[r]) + t * dir(static_cast<Index>(r)));
      if (t == t_max && blocking < support.size()) candidate(support[blocking]) = Scalar(0);
      candidate /= candidate.sum();
      const Scalar f_new = objective(X, w, candidate);
      if (!(f_new >= f * (Scalar(1) - Scalar(kLiftOneNoiseBand)))) continue;
      const Scalar gain = (f_new - f) / f;
      p = std::move(candidate);
      f = f_new;
      result.history.push_back(f * f_unscale);
      return gain;
    }
    return Scalar(0);
  };

  for (int round = 1; round <= opts.max_rounds; ++round) {
    result.rounds = round;
    Scalar best_gain(0);
    if (round % opts.safeguard_period == 0) {
      Index best_i = -1;
      Scalar best_z(0), best_value = f;
      for (Index i = 0; i < m; ++i) {
        const auto mx = maximize_profile(lift_profile(X, w, p, i, f));
        if (mx.value > best_value && mx.z != p(i)) {
          best_value = mx.value;
          best_z = mx.z;
          best_i = i;
        }
      }
      if (best_i >= 0 && (best_value - f) > Scalar(opts.tol) * f) best_gain = try_step(best_i, best_z);
      best_gain = std::max(best_gain, try_polish());
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      for (Index i : order) {
        const auto mx = maximize_profile(lift_profile(X, w, p, i, f));
        if (mx.z == p(i)) continue;
        best_gain = std::max(best_gain, try_step(i, mx.z));
      }
    }
    if (best_gain > Scalar(opts.tol)) continue;
    if (verify_optimal(X, w, p, Scalar(opts.certify_tol)).optimal) {
      result.converged = true;
      break;
    }
    try_polish();
  }
  result.p = p;
  result.f = objective(X, w_in, p);
  return result;
}

template <typename DX, typename DW, typename Scalar = typename DX::Scalar>
LiftOneResult<Scalar> lift_one_optimize(const Eigen::MatrixBase<DX>& X,
                                        const Eigen::MatrixBase<DW>& w,
                                        const LiftOneOptions& opts = {}) {
  return lift_one_optimize(X, w, uniform_allocation<Scalar>(X.rows()), opts);
}

}  // namespace glmdopt

#endif  // GLMDOPT_LIFT_ONE_HPP
