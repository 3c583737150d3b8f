#ifndef GLMDOPT_EXCHANGE_HPP
#define GLMDOPT_EXCHANGE_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "glmdopt/design.hpp"
#include "glmdopt/glm_weights.hpp"
#include "glmdopt/lift_one.hpp"

namespace glmdopt {

/// f_ij(z) = A z (s-z) + B z + C (s-z) + D, the exact-design criterion with
/// n_i = z and n_j = s - z.
template <typename Scalar>
struct PairProfile {
  Scalar A;
  Scalar B;
  Scalar C;
  Scalar D;
  long long s;

  Scalar operator()(Scalar z) const {
    const Scalar sz = Scalar(s) - z;
    return A * z * sz + B * z + C * sz + D;
  }
};

template <typename Scalar>
struct PairMaximum {
  long long z;
  Scalar value;
};

namespace detail {

template <typename Scalar>
Vector<Scalar> pair_allocation(const Counts& n, Index i, Index j, Scalar zi, Scalar zj) {
  Vector<Scalar> out = n.cast<Scalar>();
  out(i) = zi;
  out(j) = zj;
  return out;
}

inline void check_counts(const Counts& n) {
  if ((n.array() < 0).any())
    throw DesignError(ErrorKind::InvalidArgument, "replicate counts must be nonnegative");
}

}  // namespace detail

/// Pair profile from four criterion evaluations: both slots emptied (D) and
/// z = 0, s, s/2. f_ij(s/2) is well defined for odd s because f is a
/// polynomial in the counts.
template <typename DX, typename DW, typename Scalar = typename DX::Scalar>
PairProfile<Scalar> pair_profile(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                                 const Counts& n, Index i, Index j) {
  if (n.size() != X.rows() || w.size() != X.rows())
    throw DesignError(ErrorKind::DimensionMismatch, "counts, weights and design rows disagree");
  if (i == j || i < 0 || j < 0 || i >= n.size() || j >= n.size())
    throw DesignError(ErrorKind::InvalidArgument, "pair indices must be distinct and in range");
  detail::check_counts(n);
  const long long s = n(i) + n(j);
  if (s == 0) throw DesignError(ErrorKind::EmptyPair, "n_i + n_j = 0");

  const Scalar ss = Scalar(s);
  const Scalar d0 = objective(X, w, detail::pair_allocation(n, i, j, Scalar(0), Scalar(0)));
  const Scalar f0 = objective(X, w, detail::pair_allocation(n, i, j, Scalar(0), ss));
  const Scalar fs = objective(X, w, detail::pair_allocation(n, i, j, ss, Scalar(0)));
  const Scalar fh = objective(X, w, detail::pair_allocation(n, i, j, ss / 2, ss / 2));

  PairProfile<Scalar> prof;
  prof.s = s;
  prof.D = d0;
  prof.A = Scalar(2) / (ss * ss) * (Scalar(2) * fh - f0 - fs);
  prof.B = (fs - d0) / ss;
  prof.C = (f0 - d0) / ss;
  return prof;
}

/// Integer maximiser of the pair profile over 0..s.
///
/// The unconstrained peak (sA + B - C) / (2A) is rounded to the nearest
/// integer and clamped to [0, s]. When the peak sits exactly halfway between
/// two integers the one closer to `current` wins, then the smaller one.
template <typename Scalar>
PairMaximum<Scalar> maximize_pair(const PairProfile<Scalar>& prof,
                                  std::optional<long long> current = std::nullopt) {
  const long long s = prof.s;
  if (!(prof.A > Scalar(0))) {
    // degenerate (linear) profile: an endpoint is optimal
    const Scalar at0 = prof(Scalar(0)), atS = prof(Scalar(s));
    return atS > at0 ? PairMaximum<Scalar>{s, atS} : PairMaximum<Scalar>{0, at0};
  }
  const Scalar peak = (Scalar(s) * prof.A + prof.B - prof.C) / (Scalar(2) * prof.A);
  const Scalar lo = std::floor(peak);
  long long delta;
  if (peak - lo == Scalar(0.5)) {
    const auto a = static_cast<long long>(lo), b = a + 1;
    if (current && std::llabs(*current - b) < std::llabs(*current - a))
      delta = b;
    else
      delta = a;
  } else {
    delta = static_cast<long long>(std::llround(peak));
  }
  if (delta < 0) return {0, Scalar(s) * prof.C + prof.D};
  if (delta > s) return {s, Scalar(s) * prof.B + prof.D};
  const Scalar dz = Scalar(delta);
  const Scalar value = Scalar(s) * prof.C + prof.D + (Scalar(s) * prof.A + prof.B - prof.C) * dz -
                       prof.A * dz * dz;
  return {delta, value};
}

struct ExchangeOptions {
  std::uint64_t seed = 0;
  int max_rounds = 1000;
  int starts = 5;
  /// Relative gain an exchange must achieve to be accepted.
  double accept_tol = 1e-12;
};

template <typename Scalar>
struct ExchangeResult {
  Counts n;
  Scalar f = Scalar(0);
  int rounds = 0;
  bool converged = false;
  int start = 0;  // which start produced the result (multi-start only)
};

/// Pairwise exchange ascent on integer allocations with a fixed total.
/// Each round visits every pair (i, j) once in a seeded random order and
/// moves n_i, n_j to the integer maximiser of their pair profile.
template <typename DX, typename DW, typename Scalar = typename DX::Scalar>
ExchangeResult<Scalar> exchange_optimize(const Eigen::MatrixBase<DX>& X,
                                         const Eigen::MatrixBase<DW>& w_in, const Counts& n0,
                                         std::uint64_t seed, int max_rounds = 1000,
                                         double accept_tol = 1e-12) {
  if (n0.size() != X.rows() || w_in.size() != X.rows())
    throw DesignError(ErrorKind::DimensionMismatch, "counts, weights and design rows disagree");
  detail::check_counts(n0);
  require_positive_weights(w_in);
  const Vector<Scalar> w = w_in / w_in.maxCoeff();
  const Index m = X.rows();

  Counts n = n0;
  [[maybe_unused]] const long long total = n.sum();
  Scalar f = objective(X, w, n.cast<Scalar>());
  if (!(f > Scalar(0))) throw DesignError(ErrorKind::SingularDesign, "f(n0) = 0");

  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) pairs.emplace_back(i, j);

  std::mt19937_64 rng(seed);
  ExchangeResult<Scalar> result;
  for (int round = 1; round <= max_rounds; ++round) {
    result.rounds = round;
    std::shuffle(pairs.begin(), pairs.end(), rng);
    bool moved = false;
    for (auto [i, j] : pairs) {
      const long long s = n(i) + n(j);
      if (s == 0) continue;
      const auto mx = maximize_pair(pair_profile(X, w, n, i, j), n(i));
      if (mx.z == n(i)) continue;
      Counts candidate = n;
      candidate(i) = mx.z;
      candidate(j) = s - mx.z;
      const Scalar f_new = objective(X, w, candidate.cast<Scalar>());
      if (!(f_new > f * (Scalar(1) + Scalar(accept_tol)))) continue;
      n = std::move(candidate);
      f = f_new;
      moved = true;
      assert(n.sum() == total);
    }
    if (!moved) {
      result.converged = true;
      break;
    }
  }
  result.n = n;
  result.f = objective(X, w_in, n.cast<Scalar>());
  return result;
}

/// Rounds total * p to integers summing to total (largest remainder; ties go
/// to the lower index).
template <typename DP, typename Scalar = typename DP::Scalar>
Counts largest_remainder(const Eigen::MatrixBase<DP>& p, long long total) {
  const Index m = p.size();
  Counts n(m);
  std::vector<std::pair<Scalar, Index>> remainders;
  long long assigned = 0;
  for (Index i = 0; i < m; ++i) {
    const Scalar target = p(i) * Scalar(total);
    n(i) = static_cast<long long>(std::floor(target));
    assigned += n(i);
    remainders.emplace_back(target - std::floor(target), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) n(remainders[k % remainders.size()].second) += 1;
  return n;
}

/// Integer starting design with f(n) > 0: the rounded approximate optimum,
/// else an even spread, else units placed on a greedily chosen rank-d row set
/// first. Throws SingularDesign if X has rank < d.
template <typename DX, typename DW, typename DP, typename Scalar = typename DX::Scalar>
Counts initial_exact_allocation(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& w,
                                const Eigen::MatrixBase<DP>& p_approx, long long total) {
  const Index m = X.rows(), d = X.cols();
  if (total < d) throw DesignError(ErrorKind::InvalidArgument, "total must be at least d");
  Counts n = largest_remainder(p_approx, total);
  if (objective(X, w, n.cast<Scalar>()) > Scalar(0)) return n;

  n = largest_remainder(uniform_allocation<Scalar>(m), total);
  if (objective(X, w, n.cast<Scalar>()) > Scalar(0)) return n;

  // Greedy basis: add the row that most increases the rank of the chosen set.
  std::vector<Index> chosen;
  Matrix<Scalar> basis(0, d);
  for (Index i = 0; i < m && static_cast<Index>(chosen.size()) < d; ++i) {
    Matrix<Scalar> trial(basis.rows() + 1, d);
    trial << basis, X.row(i);
    if (trial.fullPivLu().rank() > basis.rows()) {
      basis = std::move(trial);
      chosen.push_back(i);
    }
  }
  if (static_cast<Index>(chosen.size()) < d)
    throw DesignError(ErrorKind::SingularDesign, "design matrix has rank < d");
  n.setZero();
  for (Index r : chosen) n(r) = 1;
  const Counts rest = largest_remainder(p_approx, total - d);
  n += rest;
  return n;
}

/// Multi-start exchange search for a fixed total.
///
/// The starting design rounds the lift-one optimum; even-numbered starts use
/// it directly, odd-numbered starts begin from the even spread of units.
/// Start k uses seed + k. Starts run concurrently; the best criterion wins
/// with ties going to the lower start index, so the result does not depend on
/// scheduling.
template <typename DX, typename DW, typename Scalar = typename DX::Scalar>
ExchangeResult<Scalar> exchange_multistart(const Eigen::MatrixBase<DX>& X,
                                           const Eigen::MatrixBase<DW>& w, long long total,
                                           const ExchangeOptions& opts = {},
                                           const LiftOneOptions& lift_opts = {}) {
  if (opts.starts < 1) throw DesignError(ErrorKind::InvalidArgument, "starts must be >= 1");
  const Matrix<Scalar> Xm = X;
  const Vector<Scalar> wv = w;
  LiftOneOptions lo = lift_opts;
  lo.seed = opts.seed;
  const auto approx = lift_one_optimize(Xm, wv, lo);
  const Counts rounded = initial_exact_allocation(Xm, wv, approx.p, total);
  const Counts spread = initial_exact_allocation(Xm, wv, uniform_allocation<Scalar>(Xm.rows()), total);

  std::vector<std::future<ExchangeResult<Scalar>>> runs;
  for (int k = 0; k < opts.starts; ++k) {
    const Counts& n0 = (k % 2 == 0) ? rounded : spread;
    runs.push_back(std::async(std::launch::async, [&, k, n0] {
      auto r = exchange_optimize(Xm, wv, n0, opts.seed + static_cast<std::uint64_t>(k),
                                 opts.max_rounds, opts.accept_tol);
      r.start = k;
      return r;
    }));
  }
  std::optional<ExchangeResult<Scalar>> best;
  for (auto& fut : runs) {
    auto r = fut.get();
    if (!best || r.f > best->f) best = std::move(r);
  }
  return *best;
}

}  // namespace glmdopt

#endif  // GLMDOPT_EXCHANGE_HPP
