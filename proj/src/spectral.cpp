#include "symdisc/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace symdisc {

std::pair<Vector, Matrix> moments(const Matrix& X) {
    const Index n = X.rows(), d = X.cols();
    if (n < 2) throw insufficient_data_error("moments: N >= 2 required");

    Vector mean = Vector::Zero(d);
    Matrix m2 = Matrix::Zero(d, d);
    Vector delta(d), delta2(d);
    for (Index i = 0; i < n; ++i) {
        delta = X.row(i).transpose() - mean;
        mean += delta / static_cast<double>(i + 1);
        delta2 = X.row(i).transpose() - mean;
        m2.noalias() += delta * delta2.transpose();
    }
    Matrix cov = (m2 + m2.transpose()) / (2.0 * static_cast<double>(n - 1));
    return {std::move(mean), std::move(cov)};
}

std::pair<Vector, Matrix> eig_sym(const Matrix& covariance) {
    const Index d = covariance.rows();
    if (covariance.cols() != d) throw std::invalid_argument("eig_sym: square matrix required");
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument("eig_sym: input not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> solver((covariance + covariance.transpose()) / 2.0);
    if (solver.info() != Eigen::Success) throw numeric_instability_error("eig_sym: decomposition failed");

    // Eigen returns ascending order; flip to descending.
    Vector evals = solver.eigenvalues().reverse();
    Matrix evecs = solver.eigenvectors().rowwise().reverse();

    for (Index k = 0; k < d; ++k) {
        Index arg = 0;
        double best = 0.0;
        for (Index i = 0; i < d; ++i) {
            const double a = std::abs(evecs(i, k));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (evecs(arg, k) < 0.0) evecs.col(k) = -evecs.col(k);
    }
    return {std::move(evals), std::move(evecs)};
}

SpectralModel fit_spectral(const Matrix& X) {
    SpectralModel model;
    auto [mean, cov] = moments(X);
    model.mean = std::move(mean);
    model.covariance = std::move(cov);
    auto [evals, evecs] = eig_sym(model.covariance);
    model.eigenvalues = std::move(evals);
    model.eigenvectors = std::move(evecs);
    model.sample_size = X.rows();
    return model;
}

double eigengap(const Vector& eigenvalues) {
    const Index d = eigenvalues.size();
    if (d < 2) throw std::invalid_argument("eigengap: d >= 2 required");
    double min_gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) min_gap = std::min(min_gap, std::abs(eigenvalues(i) - eigenvalues(j)));
    return min_gap / 2.0;
}

MatchResult match_eigenpairs(const Matrix& V_ref, const Matrix& V_other) {
    const Index d = V_ref.cols();
    if (V_other.cols() != d || V_other.rows() != V_ref.rows())
        throw std::invalid_argument("match_eigenpairs: dimension mismatch");

    MatchResult result;
    result.assignment.assign(static_cast<std::size_t>(d), -1);
    result.angles.resize(d);
    std::vector<bool> used(static_cast<std::size_t>(d), false);

    // Reference columns are assumed ordered by descending eigenvalue.
    for (Index k = 0; k < d; ++k) {
        Index arg = -1;
        double best = -1.0;
        for (Index j = 0; j < d; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double a = std::abs(V_ref.col(k).dot(V_other.col(j)));
            if (a > best) {
                best = a;
                arg = j;
            }
        }
        used[static_cast<std::size_t>(arg)] = true;
        result.assignment[static_cast<std::size_t>(k)] = static_cast<int>(arg);
        result.angles(k) = std::acos(std::clamp(best, 0.0, 1.0));
    }
    return result;
}

SymmetryCandidate compose_symmetry(const Matrix& V, const Vector& signs) {
    const Index d = V.cols();
    if (signs.size() != d) throw std::invalid_argument("compose_symmetry: sign count mismatch");
    for (Index i = 0; i < d; ++i)
        if (signs(i) != 1.0 && signs(i) != -1.0)
            throw std::invalid_argument("compose_symmetry: signs must be +1 or -1");
    if ((V.transpose() * V - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-6)
        throw std::invalid_argument("compose_symmetry: V not orthonormal");

    SymmetryCandidate cand;
    cand.signs = signs;
    cand.matrix = V * signs.asDiagonal() * V.transpose();
    return cand;
}

DesignMatrix whiten_by_class(const DesignMatrix& X, int reference_class) {
    if (!X.labels && reference_class != kAllClasses)
        throw std::invalid_argument("whiten_by_class: labels required");

    Matrix ref_rows;
    if (reference_class == kAllClasses) {
        ref_rows = X.values;
    } else {
        std::vector<Index> idx;
        for (Index i = 0; i < X.rows(); ++i)
            if ((*X.labels)[static_cast<std::size_t>(i)] == reference_class) idx.push_back(i);
        if (idx.size() < 2) throw insufficient_data_error("whiten_by_class: reference class too small");
        ref_rows.resize(static_cast<Index>(idx.size()), X.dim());
        for (std::size_t k = 0; k < idx.size(); ++k) ref_rows.row(static_cast<Index>(k)) = X.values.row(idx[k]);
    }

    const SpectralModel ref = fit_spectral(ref_rows);
    if (ref.eigenvalues(ref.eigenvalues.size() - 1) <= 1e-10 || eigengap(ref.eigenvalues) <= 0.0)
        throw degenerate_covariance_error("whiten_by_class: degenerate reference covariance");

    DesignMatrix out;
    out.labels = X.labels;
    const Matrix centered = X.values.rowwise() - ref.mean.transpose();
    out.values = (centered * ref.eigenvectors) * ref.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
    return out;
}

double g_correspondence(double eps2, double delta) {
    const double r = eps2 / delta;
    return std::sqrt(2.0 * (1.0 - std::sqrt(std::max(0.0, 1.0 - r * r))));
}

double perturbation_bound(double eps1_k, double eps2, double delta, double mean_norm, int dim) {
    if (!(eps2 < delta))
        throw std::invalid_argument("perturbation_bound: requires eps2 < delta (no correspondence otherwise)");
    return eps1_k + static_cast<double>(dim + 1) * mean_norm * g_correspondence(eps2, delta);
}

void save_spectral(std::ostream& out, const SpectralModel& model) {
    out << std::setprecision(17);
    out << model.sample_size << "\n";
    for (Index i = 0; i < model.mean.size(); ++i) out << (i ? "," : "") << model.mean(i);
    out << "\n";
    for (Index i = 0; i < model.eigenvalues.size(); ++i) out << (i ? "," : "") << model.eigenvalues(i);
    out << "\n";
    for (Index i = 0; i < model.eigenvectors.rows(); ++i) {
        for (Index j = 0; j < model.eigenvectors.cols(); ++j) out << (j ? "," : "") << model.eigenvectors(i, j);
        out << "\n";
    }
}

namespace {
Vector parse_row(const std::string& line) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    Vector v(static_cast<Index>(vals.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = vals[static_cast<std::size_t>(i)];
    return v;
}
}  // namespace

SpectralModel load_spectral(std::istream& in) {
    SpectralModel model;
    std::string line;
    if (!std::getline(in, line)) throw format_error("spectral cache: missing sample size");
    model.sample_size = std::stoll(line);
    if (!std::getline(in, line)) throw format_error("spectral cache: missing mean");
    model.mean = parse_row(line);
    if (!std::getline(in, line)) throw format_error("spectral cache: missing eigenvalues");
    model.eigenvalues = parse_row(line);
    const Index d = model.mean.size();
    model.eigenvectors.resize(d, d);
    for (Index i = 0; i < d; ++i) {
        if (!std::getline(in, line)) throw format_error("spectral cache: missing eigenvector row");
        model.eigenvectors.row(i) = parse_row(line).transpose();
    }
    model.covariance =
        model.eigenvectors * model.eigenvalues.asDiagonal() * model.eigenvectors.transpose();
    return model;
}

}  // namespace symdisc
