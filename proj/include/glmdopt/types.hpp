#ifndef GLMDOPT_TYPES_HPP
#define GLMDOPT_TYPES_HPP

#include <Eigen/Dense>

namespace glmdopt {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Integer replicate counts of an exact design; the total is `counts.sum()`.
using Counts = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

}  // namespace glmdopt

#endif  // GLMDOPT_TYPES_HPP
