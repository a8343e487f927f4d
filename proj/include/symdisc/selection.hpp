#pragma once

#include "symdisc/ranking.hpp"
#include "symdisc/rng.hpp"
#include "symdisc/spectral.hpp"
#include "symdisc/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace symdisc {

// Squared-exponential kernel, either spherical with bandwidth h or with a
// regularized inverse-covariance weighting Omega' = ((1-a) Sigma + a I)^-1 / h.
struct KernelSpec {
    enum class Kind { spherical, weighted };

    Kind kind = Kind::spherical;
    double bandwidth = 3.0;
    double alpha = 0.0;
    Matrix omega;       // weighted only
    Matrix transform;   // maps points so k(x,y) = exp(-||Tx - Ty||^2 / 2)

    static KernelSpec spherical(double h);
    static KernelSpec weighted(double h, double alpha, const Matrix& covariance);
};

enum class MmdEstimator { unbiased, biased };

struct SelectionResult {
    int swap_count = 0;
    Vector signs;
    std::vector<double> mean_curve;  // d+1 entries, k = 0..d
    std::vector<double> se_curve;
    std::string method;
};

enum class BootstrapDecision { UNFIXED, FIXED, UNMATCHED };

struct BootstrapRow {
    BootstrapDecision decision;
    double interval_lo;
    double interval_hi;
    double median_angle_deg;
};

// CLT-Bayes cut-off sqrt((N+1) ln(N+1)) / N. A coordinate with
// |mean|/sqrt(lambda) below this is classified UNFIXED.
double clt_threshold(std::int64_t N);

// Squared-MMD estimate between two samples. With omit_self_pairs, row n of
// Xb is assumed to be the transform of row n of Xa and the (n,n) cross
// terms are excluded.
double mmd2(const Matrix& Xa, const Matrix& Xb, const KernelSpec& kernel, bool omit_self_pairs = false,
            MmdEstimator estimator = MmdEstimator::unbiased);

// Mean and standard error of `repeats` subsampled mmd2 evaluations. With
// omit_self_pairs the same row subset is used for both samples to keep
// the pairing.
std::pair<double, double> mmd_batched(const Matrix& Xa, const Matrix& Xb, const KernelSpec& kernel,
                                      Index batch, int repeats, Rng& rng, bool omit_self_pairs = false);

SelectionResult select_full_dataset(const Matrix& X, const SpectralModel& spectral,
                                    const RankingReport& report, const KernelSpec& kernel, Rng& rng,
                                    Index batch = 1024, int repeats = 5);

SelectionResult select_kfold(const Matrix& X, Statistic statistic, const KernelSpec& kernel, int folds,
                             int repeats, Rng& rng, Index batch = 1024);

// Signed per-projection statistic used by the bootstrap (value near 0
// under the symmetric null). Arguments: projection values, eigenvalue.
using SignedStatistic = std::function<double(const Eigen::Ref<const Vector>&, double)>;

SignedStatistic signed_mean_statistic();
SignedStatistic signed_median_statistic();

std::vector<BootstrapRow> bootstrap_unfixed_test(const Matrix& X, const SignedStatistic& statistic, int m,
                                                 double alpha_sig, Rng& rng);

// CSV: k,mean_error,std_error,selected
void write_selection_csv(std::ostream& out, const SelectionResult& result);
// CSV: index,decision,interval_lo,interval_hi,median_angle_deg
void write_bootstrap_csv(std::ostream& out, const std::vector<BootstrapRow>& rows);

}  // namespace symdisc
