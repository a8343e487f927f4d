#pragma once

#include "symdisc/spectral.hpp"
#include "symdisc/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace symdisc {

// Uncentered per-eigenvector projections Y_i = X v_i.
struct Projections {
    Matrix Y;  // N x d, column i is the 1-D dataset for eigenvector i
    Vector eigenvalues;
};

struct RankingReport {
    std::string statistic;
    Vector scores;           // >= 0, +inf for sub-floor eigenvalues
    std::vector<int> order;  // ascending scores, ties by index, +inf last
};

// Symmetric (d+1)x(d+1) similarity matrix over eigenvectors plus an
// auxiliary point built from class means.
struct LabeledSimilarity {
    Matrix matrix;
    int aux_index;
};

enum class SkewKind { moment, nonparametric, distance };

enum class Statistic { mean, median, mm_mix, sign, skew, np_skew, dskew, cov_adj };

// Eigenvalues at or below this fraction of the largest are excluded from
// negation candidates (their scores become +inf where a variance divide
// is involved).
inline constexpr double kLambdaFloorFraction = 1e-12;

Projections project(const Matrix& X, const SpectralModel& spectral);

Vector stat_mean(const Projections& proj);
Vector stat_median(const Projections& proj);
Vector stat_mm_mix(const Projections& proj);
Vector stat_sign(const Projections& proj);
Vector stat_skew(const Projections& proj, SkewKind kind);
Vector stat_cov_adjusted(const Matrix& X, const SpectralModel& spectral);

// Dispatch on a named statistic.
Vector compute_statistic(Statistic stat, const Matrix& X, const SpectralModel& spectral);
Statistic parse_statistic(const std::string& name);
std::string statistic_name(Statistic stat);

RankingReport rank(const Vector& scores, const std::string& statistic = "");

// Class-averaged absolute correlation matrix in the pooled eigenbasis
// (optionally Fisher-transformed), augmented with the auxiliary point.
LabeledSimilarity label_similarity(const DesignMatrix& X, const SpectralModel& spectral,
                                   bool use_fisher = false);

// Single-step dissimilarity selection; returns the predicted FIXED
// eigenvector indices (the aux-cluster members). max_select < 0 means
// unlimited.
std::vector<int> dissimilarity_select(const LabeledSimilarity& sim, int max_select = -1);

// CSV: index,eigenvalue,score,rank
void write_ranking_csv(std::ostream& out, const RankingReport& report, const Vector& eigenvalues);

}  // namespace symdisc
