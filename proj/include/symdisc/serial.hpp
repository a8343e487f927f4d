#pragma once

#include "symdisc/selection.hpp"
#include "symdisc/types.hpp"

#include <utility>

namespace symdisc::serial {

// Plain-loop reference implementations of the hot kernels. These stay
// deliberately naive (no GEMM, no OpenMP) so the optimized paths can be
// checked against them in tests and timed against them in the benchmark.

double kernel_value(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                    const KernelSpec& kernel);

double mmd2(const Matrix& Xa, const Matrix& Xb, const KernelSpec& kernel, bool omit_self_pairs = false,
            MmdEstimator estimator = MmdEstimator::unbiased);

// Two-pass textbook mean/covariance with divisor N-1.
std::pair<Vector, Matrix> moments(const Matrix& X);

}  // namespace symdisc::serial
