#ifndef GLMDOPT_EW_HPP
#define GLMDOPT_EW_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <thread>
#include <variant>
#include <vector>

#include "glmdopt/glm_weights.hpp"
#include "glmdopt/lift_one.hpp"

namespace glmdopt {

template <typename Scalar>
struct UniformPrior {
  Scalar lo;
  Scalar hi;
};

template <typename Scalar>
struct PointPrior {
  Scalar value;
};

template <typename Scalar>
using PriorComponent = std::variant<UniformPrior<Scalar>, PointPrior<Scalar>>;

/// Independent prior on each regression coefficient.
template <typename Scalar = double>
struct PriorSpec {
  std::vector<PriorComponent<Scalar>> components;

  Index size() const { return static_cast<Index>(components.size()); }

  void validate() const {
    for (const auto& c : components) {
      if (const auto* u = std::get_if<UniformPrior<Scalar>>(&c)) {
        if (!std::isfinite(u->lo) || !std::isfinite(u->hi))
          throw DesignError(ErrorKind::NonFiniteInput, "uniform prior bounds must be finite");
        if (!(u->lo < u->hi))
          throw DesignError(ErrorKind::InvalidArgument,
                            "uniform prior needs lo < hi; use a point prior for a fixed value");
      } else if (!std::isfinite(std::get<PointPrior<Scalar>>(c).value)) {
        throw DesignError(ErrorKind::NonFiniteInput, "point prior value must be finite");
      }
    }
  }

  Scalar draw(Index j, std::mt19937_64& rng) const {
    const auto& c = components[static_cast<std::size_t>(j)];
    if (const auto* u = std::get_if<UniformPrior<Scalar>>(&c))
      return std::uniform_real_distribution<Scalar>(u->lo, u->hi)(rng);
    return std::get<PointPrior<Scalar>>(c).value;
  }
};

struct ClosedFormPoisson {};

struct MonteCarlo {
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: hardware concurrency
};

using EwMethod = std::variant<ClosedFormPoisson, MonteCarlo>;

/// Samples per independently seeded Monte Carlo chunk. Chunk c always draws
/// from the stream seeded by (seed, c), so the estimate does not depend on
/// how chunks are spread over workers.
inline constexpr std::uint64_t kMonteCarloChunk = 4096;

namespace detail {

// E[exp(B x)] for one prior component.
template <typename Scalar>
Scalar exp_moment(const PriorComponent<Scalar>& c, Scalar x) {
  if (const auto* u = std::get_if<UniformPrior<Scalar>>(&c)) {
    const Scalar span = (u->hi - u->lo) * x;
    if (span == Scalar(0)) return std::exp(u->lo * x);
    // (e^{hi x} - e^{lo x}) / ((hi - lo) x)
    return std::exp(u->lo * x) * std::expm1(span) / span;
  }
  return std::exp(std::get<PointPrior<Scalar>>(c).value * x);
}

// Average of fn(beta) over mc.samples prior draws, computed chunk by chunk.
// Each chunk keeps its own partial sum and the sums are merged in chunk
// order, so the result is independent of the worker count.
template <typename Scalar, typename Fn>
Vector<Scalar> prior_average(const PriorSpec<Scalar>& prior, const MonteCarlo& mc, Index out_size,
                             Fn&& fn_proto) {
  if (mc.samples == 0) throw DesignError(ErrorKind::InvalidArgument, "Monte Carlo needs samples > 0");
  const Index d = prior.size();
  const std::uint64_t chunks = (mc.samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<Vector<Scalar>> chunk_sums(chunks, Vector<Scalar>::Zero(out_size));

  auto run_chunk = [&](std::uint64_t c, auto& fn) {
    std::seed_seq seq{static_cast<std::uint32_t>(mc.seed), static_cast<std::uint32_t>(mc.seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    const std::uint64_t begin = c * kMonteCarloChunk;
    const std::uint64_t end = std::min(mc.samples, begin + kMonteCarloChunk);
    Vector<Scalar> beta(d);
    Vector<Scalar>& sum = chunk_sums[c];
    for (std::uint64_t k = begin; k < end; ++k) {
      for (Index j = 0; j < d; ++j) beta(j) = prior.draw(j, rng);
      sum += fn(beta);
    }
  };

  unsigned workers = mc.workers ? mc.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      auto fn = fn_proto;  // per-worker copy; callables may hold scratch state
      try {
        for (std::uint64_t c = t; c < chunks; c += workers) run_chunk(c, fn);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Vector<Scalar> total = Vector<Scalar>::Zero(out_size);
  for (const auto& cs : chunk_sums) total += cs;
  return total / Scalar(mc.samples);
}

}  // namespace detail

/// Expected weights E[nu(x_i' beta)] under an independent prior on beta.
///
/// ClosedFormPoisson uses E[prod_j e^{beta_j x_ij}] = prod_j E[e^{beta_j x_ij}]
/// and is only valid for poisson-log. MonteCarlo works for every family.
template <typename DX, typename Scalar = typename DX::Scalar>
Vector<Scalar> expected_weights(const Eigen::MatrixBase<DX>& X, const GlmModel<Scalar>& family,
                                const PriorSpec<Scalar>& prior, const EwMethod& method) {
  prior.validate();
  if (prior.size() != X.cols())
    throw DesignError(ErrorKind::DimensionMismatch,
                      "prior has " + std::to_string(prior.size()) + " components but design has " +
                          std::to_string(X.cols()) + " columns");
  if (!X.allFinite()) throw DesignError(ErrorKind::NonFiniteInput, "design matrix has non-finite entries");
  const Index m = X.rows(), d = X.cols();

  if (std::holds_alternative<ClosedFormPoisson>(method)) {
    if (family.family_link != FamilyLink::PoissonLog)
      throw DesignError(ErrorKind::UnsupportedCombination,
                        std::string("closed-form expected weights need poisson-log, got ") +
                            to_string(family.family_link));
    Vector<Scalar> w(m);
    for (Index i = 0; i < m; ++i) {
      Scalar e(1);
      for (Index j = 0; j < d; ++j) e *= detail::exp_moment(prior.components[static_cast<std::size_t>(j)], X(i, j));
      w(i) = e;
    }
    require_positive_weights(w);
    return w;
  }

  const auto& mc = std::get<MonteCarlo>(method);
  const Matrix<Scalar> Xm = X;
  Vector<Scalar> w = detail::prior_average(prior, mc, m, [&Xm, model = family](const Vector<Scalar>& beta) mutable {
    model.beta = beta;
    return compute_weights(Xm, model);
  });
  require_positive_weights(w);
  return w;
}

/// Prior-averaged D-efficiency exp(E[log f(p_test; beta) - log f(p_ref; beta)] / d)
/// of p_test relative to p_ref, estimated by Monte Carlo over the prior.
template <typename DX, typename DT, typename DR, typename Scalar = typename DX::Scalar>
Scalar prior_relative_efficiency(const Eigen::MatrixBase<DX>& X, const GlmModel<Scalar>& family,
                                 const PriorSpec<Scalar>& prior, const Eigen::MatrixBase<DT>& p_test,
                                 const Eigen::MatrixBase<DR>& p_ref, const MonteCarlo& mc) {
  prior.validate();
  if (prior.size() != X.cols())
    throw DesignError(ErrorKind::DimensionMismatch, "prior size does not match design columns");
  if (p_test.size() != X.rows() || p_ref.size() != X.rows())
    throw DesignError(ErrorKind::DimensionMismatch, "allocations do not match design rows");
  const Matrix<Scalar> Xm = X;
  const Vector<Scalar> pt = p_test, pr = p_ref;
  const Vector<Scalar> mean_log = detail::prior_average(prior, mc, 1, [&](const Vector<Scalar>& beta) {
    GlmModel<Scalar> model = family;
    model.beta = beta;
    const Vector<Scalar> w = compute_weights(Xm, model);
    const Scalar f_ref = objective(Xm, w, pr);
    if (!(f_ref > Scalar(0)))
      throw DesignError(ErrorKind::SingularDesign, "reference design has f = 0 under a prior draw");
    Vector<Scalar> out(1);
    out(0) = std::log(objective(Xm, w, pt)) - std::log(f_ref);
    return out;
  });
  return std::exp(mean_log(0) / Scalar(X.cols()));
}

/// EW D-optimal design: lift-one with the expected weights in place of w.
template <typename DX, typename DW, typename Scalar = typename DX::Scalar>
LiftOneResult<Scalar> ew_optimize(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& expected_w,
                                  const LiftOneOptions& opts = {}) {
  return lift_one_optimize(X, expected_w, opts);
}

}  // namespace glmdopt

#endif  // GLMDOPT_EW_HPP
