#pragma once

#include "symdisc/types.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace symdisc {

// Sample mean, covariance, and its descending orthonormal eigensystem.
struct SpectralModel {
    Vector mean;
    Matrix covariance;
    Vector eigenvalues;   // descending
    Matrix eigenvectors;  // columns, orthonormal
    Index sample_size = 0;
};

// Sign assignment over an eigenbasis and the composed matrix A = V D V^T.
struct SymmetryCandidate {
    Vector signs;
    Matrix matrix;
};

struct PerturbationBudget {
    Vector eps1;   // per-coordinate mean error bounds
    double eps2;   // covariance operator-norm bound
    double delta;  // half the minimal eigengap
};

// Sentinel for whiten_by_class: pool all rows as the reference.
inline constexpr int kAllClasses = -1;

// Single-pass (Welford) mean and covariance with divisor N-1.
std::pair<Vector, Matrix> moments(const Matrix& X);

// Descending eigendecomposition of a symmetric matrix. Sign convention:
// each eigenvector's largest-magnitude entry is positive (ties break to
// the lowest index).
std::pair<Vector, Matrix> eig_sym(const Matrix& covariance);

SpectralModel fit_spectral(const Matrix& X);

// Half the minimum pairwise absolute difference of the eigenvalues.
double eigengap(const Vector& eigenvalues);

struct MatchResult {
    std::vector<int> assignment;  // assignment[i] = column of V_other matched to column i of V_ref
    Vector angles;                // arccos of the clamped absolute inner products (radians)
};

// Greedy sign-insensitive matching of eigenvector columns, in descending
// reference-eigenvalue order without replacement.
MatchResult match_eigenpairs(const Matrix& V_ref, const Matrix& V_other);

SymmetryCandidate compose_symmetry(const Matrix& V, const Vector& signs);

// Rows expressed in the reference class's whitened eigenbasis coordinates
// v_i^T (x - mu_ref) / sqrt(lambda_i).
DesignMatrix whiten_by_class(const DesignMatrix& X, int reference_class);

// Eigenvector displacement bound sqrt(2 (1 - sqrt(1 - eps2^2/delta^2))).
double g_correspondence(double eps2, double delta);

// eps1_k + sqrt(2) (d+1) ||mu|| sqrt(1 - sqrt(1 - eps2^2/delta^2)).
// Requires eps2 < delta.
double perturbation_bound(double eps1_k, double eps2, double delta, double mean_norm, int dim);

// Flat CSV bundle: mean row, eigenvalue row, then row-major V.
void save_spectral(std::ostream& out, const SpectralModel& model);
SpectralModel load_spectral(std::istream& in);

}  // namespace symdisc
