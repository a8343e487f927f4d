#include "symdisc/ranking.hpp"

#include "symdisc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace symdisc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Index kDistanceSkewSubsample = 4096;

double lambda_floor(const Vector& eigenvalues) {
    return kLambdaFloorFraction * std::max(0.0, eigenvalues.maxCoeff());
}

double median_of(Vector y) {
    const Index n = y.size();
    std::sort(y.data(), y.data() + n);
    return (n % 2 == 1) ? y(n / 2) : 0.5 * (y(n / 2 - 1) + y(n / 2));
}

void require_scorable(const Vector& scores) {
    for (Index i = 0; i < scores.size(); ++i)
        if (std::isfinite(scores(i))) return;
    throw no_scorable_coordinates_error("all eigenvalues below the variance floor");
}

}  // namespace

Projections project(const Matrix& X, const SpectralModel& spectral) {
    if (X.cols() != spectral.eigenvectors.rows()) throw std::invalid_argument("project: dimension mismatch");
    return Projections{X * spectral.eigenvectors, spectral.eigenvalues};
}

Vector stat_mean(const Projections& proj) {
    const double floor = lambda_floor(proj.eigenvalues);
    Vector scores(proj.eigenvalues.size());
    for (Index i = 0; i < scores.size(); ++i) {
        const double lam = proj.eigenvalues(i);
        scores(i) = (lam > floor) ? std::abs(proj.Y.col(i).mean()) / std::sqrt(lam) : kInf;
    }
    require_scorable(scores);
    return scores;
}

Vector stat_median(const Projections& proj) {
    const double floor = lambda_floor(proj.eigenvalues);
    Vector scores(proj.eigenvalues.size());
    for (Index i = 0; i < scores.size(); ++i) {
        const double lam = proj.eigenvalues(i);
        scores(i) = (lam > floor) ? std::abs(median_of(proj.Y.col(i))) / std::sqrt(lam) : kInf;
    }
    require_scorable(scores);
    return scores;
}

Vector stat_mm_mix(const Projections& proj) {
    return 0.5 * (stat_mean(proj) + stat_median(proj));
}

Vector stat_sign(const Projections& proj) {
    const Index n = proj.Y.rows();
    Vector scores(proj.eigenvalues.size());
    for (Index i = 0; i < scores.size(); ++i) {
        Index pos = 0, neg = 0;
        for (Index r = 0; r < n; ++r) {
            const double y = proj.Y(r, i);
            if (y > 0)
                ++pos;
            else if (y < 0)
                ++neg;
        }
        scores(i) = std::abs(static_cast<double>(pos - neg)) / std::sqrt(static_cast<double>(n));
    }
    return scores;
}

Vector stat_skew(const Projections& proj, SkewKind kind) {
    const Index n = proj.Y.rows();
    if (n < 3) throw insufficient_data_error("stat_skew: N >= 3 required");
    const double floor = lambda_floor(proj.eigenvalues);
    Vector scores(proj.eigenvalues.size());

    for (Index i = 0; i < scores.size(); ++i) {
        const auto y = proj.Y.col(i);
        switch (kind) {
            case SkewKind::moment: {
                const double m = y.mean();
                const double m2 = (y.array() - m).square().mean();
                const double m3 = (y.array() - m).cube().mean();
                scores(i) = (m2 > 0) ? std::abs(m3) / std::pow(m2, 1.5) : 0.0;
                break;
            }
            case SkewKind::nonparametric: {
                const double lam = proj.eigenvalues(i);
                scores(i) = (lam > floor) ? std::abs(y.mean() - median_of(y)) / std::sqrt(lam) : kInf;
                break;
            }
            case SkewKind::distance: {
                Vector sub;
                if (n > kDistanceSkewSubsample) {
                    // Seeded subsample keeps the O(N^2) pair sums bounded.
                    Rng rng(0x5EEDULL, static_cast<std::uint64_t>(i));
                    sub.resize(kDistanceSkewSubsample);
                    for (Index k = 0; k < kDistanceSkewSubsample; ++k)
                        sub(k) = y(static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n))));
                } else {
                    sub = y;
                }
                double sum_diff = 0.0, sum_sum = 0.0;
                const Index m = sub.size();
                for (Index a = 0; a < m; ++a)
                    for (Index b = a + 1; b < m; ++b) {
                        sum_diff += std::abs(sub(a) - sub(b));
                        sum_sum += std::abs(sub(a) + sub(b));
                    }
                scores(i) = (sum_sum > 0) ? std::max(0.0, 1.0 - sum_diff / sum_sum) : 0.0;
                break;
            }
        }
    }
    return scores;
}

Vector stat_cov_adjusted(const Matrix& X, const SpectralModel& spectral) {
    const Index d = spectral.eigenvalues.size();
    const double floor = lambda_floor(spectral.eigenvalues);
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j)
            if (std::abs(spectral.eigenvalues(i) - spectral.eigenvalues(j)) <= floor)
                throw distinct_eigenvalue_error("stat_cov_adjusted: eigenvalue collision");

    // Squared centered projections and their pairwise correlations.
    const Matrix Z = (X.rowwise() - spectral.mean.transpose()) * spectral.eigenvectors;
    const Matrix Q = Z.array().square().matrix();
    const Vector q_mean = Q.colwise().mean().transpose();
    const Matrix Qc = Q.rowwise() - q_mean.transpose();
    Matrix corr = Qc.transpose() * Qc / static_cast<double>(X.rows());
    Vector sd = corr.diagonal().cwiseSqrt();
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            const double denom = sd(i) * sd(j);
            double c = (denom > 0) ? corr(i, j) / denom : 0.0;
            corr(i, j) = std::clamp(c, 0.0, 1.0);
        }

    const Vector mu = spectral.eigenvectors.transpose() * spectral.mean;
    Vector scores(d);
    for (Index k = 0; k < d; ++k) {
        if (spectral.eigenvalues(k) <= floor) {
            scores(k) = kInf;
            continue;
        }
        double denom = std::sqrt(spectral.eigenvalues(k));
        for (Index i = 0; i < d; ++i) {
            if (i == k) continue;
            const double excess = std::max(0.0, std::abs(mu(i)) - std::abs(mu(k)));
            denom += excess / std::abs(spectral.eigenvalues(i) - spectral.eigenvalues(k)) * corr(i, k);
        }
        scores(k) = std::abs(mu(k)) / denom;
    }
    require_scorable(scores);
    return scores;
}

Vector compute_statistic(Statistic stat, const Matrix& X, const SpectralModel& spectral) {
    if (stat == Statistic::cov_adj) return stat_cov_adjusted(X, spectral);
    const Projections proj = project(X, spectral);
    switch (stat) {
        case Statistic::mean: return stat_mean(proj);
        case Statistic::median: return stat_median(proj);
        case Statistic::mm_mix: return stat_mm_mix(proj);
        case Statistic::sign: return stat_sign(proj);
        case Statistic::skew: return stat_skew(proj, SkewKind::moment);
        case Statistic::np_skew: return stat_skew(proj, SkewKind::nonparametric);
        case Statistic::dskew: return stat_skew(proj, SkewKind::distance);
        default: throw std::invalid_argument("unknown statistic");
    }
}

Statistic parse_statistic(const std::string& name) {
    static const std::map<std::string, Statistic> table = {
        {"mean", Statistic::mean},     {"median", Statistic::median}, {"mm-mix", Statistic::mm_mix},
        {"sign", Statistic::sign},     {"skew", Statistic::skew},     {"np-skew", Statistic::np_skew},
        {"dskew", Statistic::dskew},   {"cov-adj", Statistic::cov_adj}};
    const auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown statistic: " + name);
    return it->second;
}

std::string statistic_name(Statistic stat) {
    switch (stat) {
        case Statistic::mean: return "mean";
        case Statistic::median: return "median";
        case Statistic::mm_mix: return "mm-mix";
        case Statistic::sign: return "sign";
        case Statistic::skew: return "skew";
        case Statistic::np_skew: return "np-skew";
        case Statistic::dskew: return "dskew";
        case Statistic::cov_adj: return "cov-adj";
    }
    return "?";
}

RankingReport rank(const Vector& scores, const std::string& statistic) {
    RankingReport report;
    report.statistic = statistic;
    report.scores = scores;
    report.order.resize(static_cast<std::size_t>(scores.size()));
    std::iota(report.order.begin(), report.order.end(), 0);
    std::stable_sort(report.order.begin(), report.order.end(),
                     [&](int a, int b) { return scores(a) < scores(b); });
    return report;
}

LabeledSimilarity label_similarity(const DesignMatrix& X, const SpectralModel& spectral, bool use_fisher) {
    if (!X.labels) throw std::invalid_argument("label_similarity: labels required");
    const Index d = spectral.eigenvalues.size();

    std::map<int, std::vector<Index>> classes;
    for (Index i = 0; i < X.rows(); ++i) classes[(*X.labels)[static_cast<std::size_t>(i)]].push_back(i);
    if (classes.size() < 2) throw std::invalid_argument("label_similarity: >= 2 classes required");

    const double floor = lambda_floor(spectral.eigenvalues);
    Matrix sim = Matrix::Zero(d + 1, d + 1);
    const double C = static_cast<double>(classes.size());

    for (const auto& [label, idx] : classes) {
        if (idx.size() < 2)
            throw insufficient_data_error("label_similarity: class " + std::to_string(label) +
                                          " has fewer than 2 rows");
        Matrix rows(static_cast<Index>(idx.size()), X.dim());
        for (std::size_t k = 0; k < idx.size(); ++k) rows.row(static_cast<Index>(k)) = X.values.row(idx[k]);

        // Class correlation matrix in the pooled eigenbasis.
        const Matrix Yc = rows * spectral.eigenvectors;
        const Vector mean_c = Yc.colwise().mean().transpose();
        const Matrix centered = Yc.rowwise() - mean_c.transpose();
        Matrix cov = centered.transpose() * centered / static_cast<double>(idx.size() - 1);
        const Vector sd = cov.diagonal().cwiseSqrt();

        const Vector mu_class = rows.colwise().mean().transpose();
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                const double denom = sd(i) * sd(j);
                double p = (denom > 0 && i != j) ? std::abs(cov(i, j) / denom) : (i == j ? 1.0 : 0.0);
                p = std::min(p, 1.0 - 1e-12);
                sim(i, j) += (use_fisher ? 0.5 * (std::log1p(p) - std::log1p(-p)) : p) / C;
            }
            const double lam = spectral.eigenvalues(i);
            const double aux =
                (lam > floor) ? std::abs(mu_class.dot(spectral.eigenvectors.col(i))) / std::sqrt(lam) : 0.0;
            sim(i, d) += aux / C;
            sim(d, i) += aux / C;
        }
    }
    sim.diagonal().setConstant(1.0);
    return LabeledSimilarity{std::move(sim), static_cast<int>(d)};
}

std::vector<int> dissimilarity_select(const LabeledSimilarity& sim, int max_select) {
    const Index m = sim.matrix.rows();
    const Index aux = sim.aux_index;
    const double smax = sim.matrix.maxCoeff();
    Matrix dis = Matrix::Constant(m, m, 1.0) - (smax > 0 ? sim.matrix / smax : sim.matrix);

    std::vector<Index> aux_cluster = {aux};
    std::vector<Index> swap_cluster;
    for (Index i = 0; i < m; ++i)
        if (i != aux) swap_cluster.push_back(i);

    std::vector<int> selected;
    while (!swap_cluster.empty() && (max_select < 0 || static_cast<int>(selected.size()) < max_select)) {
        // Move the point farthest (on average) from its own cluster
        // relative to the aux cluster.
        double best = 0.0;
        std::size_t arg = swap_cluster.size();
        for (std::size_t k = 0; k < swap_cluster.size(); ++k) {
            const Index p = swap_cluster[k];
            double d_swap = 0.0;
            for (Index q : swap_cluster)
                if (q != p) d_swap += dis(p, q);
            if (swap_cluster.size() > 1) d_swap /= static_cast<double>(swap_cluster.size() - 1);
            double d_aux = 0.0;
            for (Index q : aux_cluster) d_aux += dis(p, q);
            d_aux /= static_cast<double>(aux_cluster.size());
            const double gain = d_swap - d_aux;
            if (gain > best) {
                best = gain;
                arg = k;
            }
        }
        if (arg == swap_cluster.size()) break;  // all gains <= 0
        aux_cluster.push_back(swap_cluster[arg]);
        selected.push_back(static_cast<int>(swap_cluster[arg]));
        swap_cluster.erase(swap_cluster.begin() + static_cast<std::ptrdiff_t>(arg));
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

void write_ranking_csv(std::ostream& out, const RankingReport& report, const Vector& eigenvalues) {
    out << std::setprecision(17) << "index,eigenvalue,score,rank\n";
    std::vector<int> rank_of(report.order.size());
    for (std::size_t r = 0; r < report.order.size(); ++r) rank_of[static_cast<std::size_t>(report.order[r])] = static_cast<int>(r);
    for (Index i = 0; i < report.scores.size(); ++i)
        out << i << "," << eigenvalues(i) << "," << report.scores(i) << ","
            << rank_of[static_cast<std::size_t>(i)] << "\n";
}

}  // namespace symdisc
