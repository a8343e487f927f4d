#include "symdisc/selection.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace symdisc {

namespace {

// Points mapped so k(x,y) = exp(-||map(x) - map(y)||^2 / 2).
Matrix map_points(const Matrix& X, const KernelSpec& kernel) {
    if (kernel.kind == KernelSpec::Kind::spherical) return X / std::sqrt(kernel.bandwidth);
    return X * kernel.transform;
}

// Gram matrix of SE kernel values between already-mapped point sets.
Matrix kernel_matrix_mapped(const Matrix& A, const Matrix& B) {
    const Vector a2 = A.rowwise().squaredNorm();
    const Vector b2 = B.rowwise().squaredNorm();
    Matrix D = -2.0 * (A * B.transpose());
    D.colwise() += a2;
    D.rowwise() += b2.transpose();
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < D.cols(); ++j)
        D.col(j) = (-0.5 * D.col(j).cwiseMax(0.0).array()).exp();
    return D;
}

std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
        const Index j = i + static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

Matrix take_rows(const Matrix& X, const std::vector<Index>& idx) {
    Matrix out(static_cast<Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = X.row(idx[i]);
    return out;
}

double empirical_quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

Vector signs_for_top_k(const RankingReport& report, int k) {
    Vector signs = Vector::Ones(report.scores.size());
    for (int r = 0; r < k; ++r) signs(report.order[static_cast<std::size_t>(r)]) = -1.0;
    return signs;
}

}  // namespace

KernelSpec KernelSpec::spherical(double h) {
    if (h <= 0) throw std::invalid_argument("kernel bandwidth must be positive");
    KernelSpec spec;
    spec.kind = Kind::spherical;
    spec.bandwidth = h;
    return spec;
}

KernelSpec KernelSpec::weighted(double h, double alpha, const Matrix& covariance) {
    if (h <= 0) throw std::invalid_argument("kernel bandwidth must be positive");
    if (alpha < 0 || alpha > 1) throw std::invalid_argument("kernel alpha must be in [0,1]");
    KernelSpec spec;
    spec.kind = Kind::weighted;
    spec.bandwidth = h;
    spec.alpha = alpha;
    const Index d = covariance.rows();
    const Matrix reg = (1.0 - alpha) * covariance + alpha * Matrix::Identity(d, d);
    spec.omega = reg.llt().solve(Matrix::Identity(d, d)) / h;
    spec.transform = Matrix(spec.omega.llt().matrixL());
    return spec;
}

double clt_threshold(std::int64_t N) {
    if (N < 1) throw std::invalid_argument("clt_threshold: N >= 1 required");
    const double n = static_cast<double>(N);
    return std::sqrt((n + 1.0) * std::log(n + 1.0)) / n;
}

double mmd2(const Matrix& Xa, const Matrix& Xb, const KernelSpec& kernel, bool omit_self_pairs,
            MmdEstimator estimator) {
    if (Xa.cols() != Xb.cols()) throw std::invalid_argument("mmd2: dimension mismatch");
    const Index m = Xa.rows(), n = Xb.rows();
    if (estimator == MmdEstimator::unbiased && (m < 2 || n < 2))
        throw insufficient_data_error("mmd2: unbiased estimator needs >= 2 points per sample");
    if (omit_self_pairs && m != n)
        throw std::invalid_argument("mmd2: omit_self_pairs requires equal sample sizes");

    const Matrix A = map_points(Xa, kernel);
    const Matrix B = map_points(Xb, kernel);
    const Matrix Kaa = kernel_matrix_mapped(A, A);
    const Matrix Kbb = kernel_matrix_mapped(B, B);
    const Matrix Kab = kernel_matrix_mapped(A, B);

    const double md = static_cast<double>(m), nd = static_cast<double>(n);
    double term_a, term_b;
    if (estimator == MmdEstimator::unbiased) {
        term_a = (Kaa.sum() - Kaa.trace()) / (md * (md - 1.0));
        term_b = (Kbb.sum() - Kbb.trace()) / (nd * (nd - 1.0));
    } else {
        term_a = Kaa.sum() / (md * md);
        term_b = Kbb.sum() / (nd * nd);
    }
    // The unbiased U-statistic on equal-size samples pairs the rows and drops
    // the (i, i) cross terms, so X compared against itself is exactly zero.
    const bool drop_cross_diag = omit_self_pairs || (estimator == MmdEstimator::unbiased && m == n);
    const double cross = drop_cross_diag ? (Kab.sum() - Kab.trace()) / (md * (md - 1.0))
                                         : Kab.sum() / (md * nd);
    return term_a + term_b - 2.0 * cross;
}

std::pair<double, double> mmd_batched(const Matrix& Xa, const Matrix& Xb, const KernelSpec& kernel,
                                      Index batch, int repeats, Rng& rng, bool omit_self_pairs) {
    if (batch < 2) throw std::invalid_argument("mmd_batched: batch >= 2 required");
    if (batch > std::min(Xa.rows(), Xb.rows()))
        throw std::invalid_argument("mmd_batched: batch exceeds sample size");
    if (repeats < 1) throw std::invalid_argument("mmd_batched: repeats >= 1 required");

    const auto full_or_sample = [batch](Index rows, Rng& local) {
        // A full batch takes the rows in order, so it reproduces mmd2 exactly.
        if (batch == rows) {
            std::vector<Index> idx(static_cast<std::size_t>(rows));
            std::iota(idx.begin(), idx.end(), Index{0});
            return idx;
        }
        return sample_without_replacement(rows, batch, local);
    };

    std::vector<double> values(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        Rng local = rng.split(static_cast<std::uint64_t>(r));
        const auto idx_a = full_or_sample(Xa.rows(), local);
        const auto idx_b = omit_self_pairs ? idx_a : full_or_sample(Xb.rows(), local);
        values[static_cast<std::size_t>(r)] =
            mmd2(take_rows(Xa, idx_a), take_rows(Xb, idx_b), kernel, omit_self_pairs);
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / repeats;
    double se = 0.0;
    if (repeats > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / (repeats - 1)) / std::sqrt(static_cast<double>(repeats));
    }
    return {mean, se};
}

SelectionResult select_full_dataset(const Matrix& X, const SpectralModel& spectral,
                                    const RankingReport& report, const KernelSpec& kernel, Rng& rng,
                                    Index batch, int repeats) {
    const Index d = spectral.eigenvalues.size();
    const Index b = std::min(batch, X.rows());

    SelectionResult result;
    result.method = "full-mmd";
    result.mean_curve.resize(static_cast<std::size_t>(d + 1));
    result.se_curve.resize(static_cast<std::size_t>(d + 1));

    for (int k = 0; k <= d; ++k) {
        const SymmetryCandidate cand = compose_symmetry(spectral.eigenvectors, signs_for_top_k(report, k));
        const Matrix Y = X * cand.matrix;  // A is symmetric
        Rng local = rng.split(static_cast<std::uint64_t>(k));
        const auto [mean, se] = mmd_batched(X, Y, kernel, b, repeats, local, /*omit_self_pairs=*/true);
        result.mean_curve[static_cast<std::size_t>(k)] = mean;
        result.se_curve[static_cast<std::size_t>(k)] = se;
    }

    int best = 0;
    for (int k = 1; k <= d; ++k)
        if (result.mean_curve[static_cast<std::size_t>(k)] < result.mean_curve[static_cast<std::size_t>(best)])
            best = k;
    result.swap_count = best;
    result.signs = signs_for_top_k(report, best);
    return result;
}

SelectionResult select_kfold(const Matrix& X, Statistic statistic, const KernelSpec& kernel, int folds,
                             int repeats, Rng& rng, Index batch) {
    if (folds < 2) throw std::invalid_argument("select_kfold: folds >= 2 required");
    const Index n = X.rows(), d = X.cols();
    if (n / folds < 2) throw insufficient_data_error("select_kfold: fold smaller than 2 rows");

    std::vector<std::vector<double>> scores(static_cast<std::size_t>(d + 1));
    for (int r = 0; r < repeats; ++r) {
        Rng rep_rng = rng.split(static_cast<std::uint64_t>(r));
        std::vector<Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Index{0});
        shuffle_indices(perm, rep_rng);

        for (int f = 0; f < folds; ++f) {
            const Index lo = n * f / folds, hi = n * (f + 1) / folds;
            std::vector<Index> test(perm.begin() + lo, perm.begin() + hi);
            std::vector<Index> train;
            train.reserve(static_cast<std::size_t>(n - (hi - lo)));
            train.insert(train.end(), perm.begin(), perm.begin() + lo);
            train.insert(train.end(), perm.begin() + hi, perm.end());

            const Matrix Xtrain = take_rows(X, train);
            const Matrix Xtest = take_rows(X, test);
            const SpectralModel model = fit_spectral(Xtrain);
            const RankingReport report = rank(compute_statistic(statistic, Xtrain, model));

            const Index b = std::min(batch, Xtest.rows());
            for (int k = 0; k <= d; ++k) {
                const SymmetryCandidate cand =
                    compose_symmetry(model.eigenvectors, signs_for_top_k(report, k));
                const Matrix Y = Xtest * cand.matrix;
                Rng eval_rng = rep_rng.split(1000003ULL * static_cast<std::uint64_t>(f) +
                                             static_cast<std::uint64_t>(k));
                const auto [mean, se] =
                    mmd_batched(Xtest, Y, kernel, b, 1, eval_rng, /*omit_self_pairs=*/true);
                (void)se;
                scores[static_cast<std::size_t>(k)].push_back(mean);
            }
        }
    }

    SelectionResult result;
    result.method = "kfold-mmd";
    result.mean_curve.resize(static_cast<std::size_t>(d + 1));
    result.se_curve.resize(static_cast<std::size_t>(d + 1));
    for (int k = 0; k <= d; ++k) {
        const auto& v = scores[static_cast<std::size_t>(k)];
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double se = v.size() > 1
                              ? std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                                    std::sqrt(static_cast<double>(v.size()))
                              : 0.0;
        result.mean_curve[static_cast<std::size_t>(k)] = mean;
        result.se_curve[static_cast<std::size_t>(k)] = se;
    }

    int k_min = 0;
    for (int k = 1; k <= d; ++k)
        if (result.mean_curve[static_cast<std::size_t>(k)] < result.mean_curve[static_cast<std::size_t>(k_min)])
            k_min = k;
    const double band =
        result.mean_curve[static_cast<std::size_t>(k_min)] + result.se_curve[static_cast<std::size_t>(k_min)];
    int best = k_min;
    for (int k = k_min + 1; k <= d; ++k)
        if (result.mean_curve[static_cast<std::size_t>(k)] <= band) best = k;
    result.swap_count = best;

    const SpectralModel full_model = fit_spectral(X);
    const RankingReport full_report = rank(compute_statistic(statistic, X, full_model));
    result.signs = signs_for_top_k(full_report, best);
    return result;
}

SignedStatistic signed_mean_statistic() {
    return [](const Eigen::Ref<const Vector>& proj, double lambda) {
        const double sd = std::sqrt(std::max(lambda, 1e-300));
        return proj.mean() / sd;
    };
}

SignedStatistic signed_median_statistic() {
    return [](const Eigen::Ref<const Vector>& proj, double lambda) {
        Vector y = proj;
        std::sort(y.data(), y.data() + y.size());
        const Index n = y.size();
        const double med = (n % 2 == 1) ? y(n / 2) : 0.5 * (y(n / 2 - 1) + y(n / 2));
        return med / std::sqrt(std::max(lambda, 1e-300));
    };
}

std::vector<BootstrapRow> bootstrap_unfixed_test(const Matrix& X, const SignedStatistic& statistic, int m,
                                                 double alpha_sig, Rng& rng) {
    if (m < 50) throw std::invalid_argument("bootstrap_unfixed_test: m >= 50 required");
    const Index n = X.rows(), d = X.cols();
    const SpectralModel base = fit_spectral(X);

    std::vector<std::vector<double>> S(static_cast<std::size_t>(d)), Nv(static_cast<std::size_t>(d));
    for (auto& s : S) s.reserve(static_cast<std::size_t>(m));
    for (auto& a : Nv) a.reserve(static_cast<std::size_t>(m));

    Matrix resample(n, d);
    for (int i = 0; i < m; ++i) {
        Rng local = rng.split(static_cast<std::uint64_t>(i));
        for (Index r = 0; r < n; ++r)
            resample.row(r) = X.row(static_cast<Index>(local.uniform_below(static_cast<std::uint64_t>(n))));

        const SpectralModel boot = fit_spectral(resample);
        const MatchResult match = match_eigenpairs(base.eigenvectors, boot.eigenvectors);
        for (Index v = 0; v < d; ++v) {
            const int j = match.assignment[static_cast<std::size_t>(v)];
            Nv[static_cast<std::size_t>(v)].push_back(match.angles(v));
            Vector dir = boot.eigenvectors.col(j);
            if (base.eigenvectors.col(v).dot(dir) < 0) dir = -dir;
            const Vector proj = resample * dir;
            S[static_cast<std::size_t>(v)].push_back(statistic(proj, boot.eigenvalues(j)));
        }
    }

    constexpr double kMatchGuardDeg = 30.0;
    std::vector<BootstrapRow> rows(static_cast<std::size_t>(d));
    for (Index v = 0; v < d; ++v) {
        auto& row = rows[static_cast<std::size_t>(v)];
        row.median_angle_deg =
            empirical_quantile(Nv[static_cast<std::size_t>(v)], 0.5) * 180.0 / M_PI;
        row.interval_lo = empirical_quantile(S[static_cast<std::size_t>(v)], alpha_sig / 2.0);
        row.interval_hi = empirical_quantile(S[static_cast<std::size_t>(v)], 1.0 - alpha_sig / 2.0);
        if (row.median_angle_deg > kMatchGuardDeg)
            row.decision = BootstrapDecision::UNMATCHED;
        else if (row.interval_lo <= 0.0 && 0.0 <= row.interval_hi)
            row.decision = BootstrapDecision::UNFIXED;
        else
            row.decision = BootstrapDecision::FIXED;
    }
    return rows;
}

void write_selection_csv(std::ostream& out, const SelectionResult& result) {
    out << std::setprecision(17) << "k,mean_error,std_error,selected\n";
    for (std::size_t k = 0; k < result.mean_curve.size(); ++k)
        out << k << "," << result.mean_curve[k] << "," << result.se_curve[k] << ","
            << (static_cast<int>(k) == result.swap_count ? 1 : 0) << "\n";
}

void write_bootstrap_csv(std::ostream& out, const std::vector<BootstrapRow>& rows) {
    out << std::setprecision(17) << "index,decision,interval_lo,interval_hi,median_angle_deg\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const char* name = rows[i].decision == BootstrapDecision::UNFIXED  ? "UNFIXED"
                           : rows[i].decision == BootstrapDecision::FIXED ? "FIXED"
                                                                          : "UNMATCHED";
        out << i << "," << name << "," << rows[i].interval_lo << "," << rows[i].interval_hi << ","
            << rows[i].median_angle_deg << "\n";
    }
}

}  // namespace symdisc
