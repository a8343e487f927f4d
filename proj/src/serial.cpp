#include "symdisc/serial.hpp"

#include <cmath>
#include <stdexcept>

namespace symdisc::serial {

double kernel_value(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                    const KernelSpec& kernel) {
    const Vector diff = x - y;
    if (kernel.kind == KernelSpec::Kind::spherical)
        return std::exp(-diff.squaredNorm() / (2.0 * kernel.bandwidth));
    return std::exp(-0.5 * diff.dot(kernel.omega * diff));
}

double mmd2(const Matrix& Xa, const Matrix& Xb, const KernelSpec& kernel, bool omit_self_pairs,
            MmdEstimator estimator) {
    if (Xa.cols() != Xb.cols()) throw std::invalid_argument("serial::mmd2: dimension mismatch");
    const Index m = Xa.rows(), n = Xb.rows();
    if (estimator == MmdEstimator::unbiased && (m < 2 || n < 2))
        throw insufficient_data_error("serial::mmd2: unbiased estimator needs >= 2 points per sample");
    if (omit_self_pairs && m != n)
        throw std::invalid_argument("serial::mmd2: omit_self_pairs requires equal sizes");

    double sum_aa = 0.0, sum_bb = 0.0, sum_ab = 0.0;
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
            if (i != j || estimator == MmdEstimator::biased)
                sum_aa += kernel_value(Xa.row(i), Xa.row(j), kernel);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j || estimator == MmdEstimator::biased)
                sum_bb += kernel_value(Xb.row(i), Xb.row(j), kernel);
    const bool drop_cross_diag =
        omit_self_pairs || (estimator == MmdEstimator::unbiased && m == n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j)
            if (!(drop_cross_diag && i == j)) sum_ab += kernel_value(Xa.row(i), Xb.row(j), kernel);

    const double md = static_cast<double>(m), nd = static_cast<double>(n);
    double term_a, term_b;
    if (estimator == MmdEstimator::unbiased) {
        term_a = sum_aa / (md * (md - 1.0));
        term_b = sum_bb / (nd * (nd - 1.0));
    } else {
        term_a = sum_aa / (md * md);
        term_b = sum_bb / (nd * nd);
    }
    const double cross = drop_cross_diag ? sum_ab / (md * (md - 1.0)) : sum_ab / (md * nd);
    return term_a + term_b - 2.0 * cross;
}

std::pair<Vector, Matrix> moments(const Matrix& X) {
    const Index n = X.rows(), d = X.cols();
    if (n < 2) throw std::invalid_argument("serial::moments: N >= 2 required");
    Vector mean = Vector::Zero(d);
    for (Index i = 0; i < n; ++i) mean += X.row(i).transpose();
    mean /= static_cast<double>(n);
    Matrix cov = Matrix::Zero(d, d);
    for (Index i = 0; i < n; ++i) {
        const Vector c = X.row(i).transpose() - mean;
        cov += c * c.transpose();
    }
    cov /= static_cast<double>(n - 1);
    return {std::move(mean), std::move(cov)};
}

}  // namespace symdisc::serial
