#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symdisc/data.hpp"
#include "symdisc/ranking.hpp"
#include "symdisc/rng.hpp"
#include "symdisc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

using namespace symdisc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Projections make_proj(std::initializer_list<double> column, double lambda) {
    Projections p;
    p.Y.resize(static_cast<Index>(column.size()), 1);
    Index i = 0;
    for (double v : column) p.Y(i++, 0) = v;
    p.eigenvalues = Vector::Constant(1, lambda);
    return p;
}

// All-pairs distance skewness, the O(N^2) oracle.
double dskew_oracle(const std::vector<double>& y) {
    double num = 0, den = 0;
    for (std::size_t n = 0; n < y.size(); ++n)
        for (std::size_t m = n + 1; m < y.size(); ++m) {
            num += std::abs(y[n] - y[m]);
            den += std::abs(y[n] + y[m]);
        }
    if (den == 0) return 0.0;
    return std::max(0.0, 1.0 - num / den);
}

}  // namespace

TEST_CASE("project maps rows into the eigenbasis without centering") {
    Rng rng(3);
    Matrix X(40, 3);
    for (Index i = 0; i < X.size(); ++i) X(i) = rng.normal() + 1.0;
    SpectralModel spectral = fit_spectral(X);

    const Projections proj = project(X, spectral);
    // Naive per-element oracle.
    for (Index n = 0; n < X.rows(); ++n)
        for (Index i = 0; i < 3; ++i) {
            double dot = 0;
            for (Index j = 0; j < 3; ++j) dot += X(n, j) * spectral.eigenvectors(j, i);
            CHECK(std::abs(proj.Y(n, i) - dot) < 1e-13);
        }

    // Identity basis: projections are the raw columns.
    SpectralModel ident = spectral;
    ident.eigenvectors = Matrix::Identity(3, 3);
    const Projections pid = project(X, ident);
    CHECK((pid.Y - X).cwiseAbs().maxCoeff() == 0.0);

    // A row equal to an eigenvector projects to an indicator.
    Matrix X2(2, 3);
    X2.row(0) = spectral.eigenvectors.col(2).transpose();
    X2.row(1) = spectral.eigenvectors.col(0).transpose();
    const Projections pe = project(X2, spectral);
    CHECK(pe.Y(0, 2) == doctest::Approx(1.0));
    CHECK(std::abs(pe.Y(0, 0)) < 1e-12);
    CHECK(std::abs(pe.Y(0, 1)) < 1e-12);
}

TEST_CASE("projection variance is consistent with the eigenvalues") {
    Rng rng(5);
    Matrix X(500, 4);
    for (Index i = 0; i < X.size(); ++i) X(i) = rng.normal() * 2 - 1;
    SpectralModel spectral = fit_spectral(X);
    const Projections proj = project(X, spectral);
    for (Index i = 0; i < 4; ++i) {
        const double mean = proj.Y.col(i).mean();
        const double var = (proj.Y.col(i).array() - mean).square().sum() /
                           static_cast<double>(X.rows() - 1);
        CHECK(std::abs(var - proj.eigenvalues(i)) < 1e-6 * proj.eigenvalues(0));
    }
}

TEST_CASE("stat_mean examples") {
    CHECK(stat_mean(make_proj({-2.0, 2.0, -3.0, 3.0}, 1.0))(0) == 0.0);
    CHECK(stat_mean(make_proj({1.0, 3.0}, 2.0))(0) == doctest::Approx(2.0 / std::sqrt(2.0)));
}

TEST_CASE("sub-floor eigenvalues score +inf; all sub-floor throws") {
    Projections p;
    p.Y = Matrix::Ones(4, 2);
    p.eigenvalues.resize(2);
    p.eigenvalues << 1.0, 1e-14;
    const Vector s = stat_mean(p);
    CHECK(std::isfinite(s(0)));
    CHECK(s(1) == kInf);

    p.eigenvalues << 0.0, 0.0;
    CHECK_THROWS_AS(stat_mean(p), no_scorable_coordinates_error);
}

TEST_CASE("stat_median examples") {
    CHECK(stat_median(make_proj({-5.0, -1.0, 1.0, 5.0}, 1.0))(0) == 0.0);
    CHECK(stat_median(make_proj({1.0, 2.0, 4.0}, 1.0))(0) == doctest::Approx(2.0));
    // Even N: midpoint of the two central order statistics.
    CHECK(stat_median(make_proj({1.0, 2.0, 4.0, 9.0}, 1.0))(0) == doctest::Approx(3.0));
    // One extreme outlier moves the median by at most one order-statistic gap.
    const double before = stat_median(make_proj({-2.0, -1.0, 1.0, 2.0}, 1.0))(0);
    const double after = stat_median(make_proj({-2.0, -1.0, 1.0, 2.0, 1000.0}, 1.0))(0);
    CHECK(std::abs(after - before) <= 1.0 + 1e-12);
}

TEST_CASE("stat_mm_mix is the even average of mean and median") {
    // mean-score 2, median-score 0.
    const auto p = make_proj({-3.0, 0.0, 9.0}, 1.0);
    CHECK(stat_mean(p)(0) == doctest::Approx(2.0));
    CHECK(stat_median(p)(0) == 0.0);
    CHECK(stat_mm_mix(p)(0) == doctest::Approx(1.0));

    Rng rng(7);
    Projections q;
    q.Y.resize(30, 3);
    for (Index i = 0; i < q.Y.size(); ++i) q.Y(i) = rng.normal();
    q.eigenvalues = Vector::Constant(3, 1.5);
    const Vector mix = stat_mm_mix(q);
    const Vector avg = 0.5 * (stat_mean(q) + stat_median(q));
    CHECK((mix - avg).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("stat_sign examples") {
    CHECK(stat_sign(make_proj({1.0, -1.0, 2.0, -2.0}, 1.0))(0) == 0.0);
    CHECK(stat_sign(make_proj({1.0, 2.0, 3.0, 4.0}, 1.0))(0) == doctest::Approx(2.0));
    CHECK(stat_sign(make_proj({0.0, 0.0, 1.0, -1.0}, 1.0))(0) == 0.0);
}

TEST_CASE("stat_skew examples across kinds") {
    const auto sym = make_proj({-2.0, -1.0, 1.0, 2.0}, 1.0);
    CHECK(stat_skew(sym, SkewKind::moment)(0) == doctest::Approx(0.0));
    CHECK(stat_skew(sym, SkewKind::nonparametric)(0) == doctest::Approx(0.0));
    CHECK(stat_skew(sym, SkewKind::distance)(0) == doctest::Approx(0.0));

    const auto p = make_proj({0.0, 0.0, 1.0}, 1.0);
    CHECK(stat_skew(p, SkewKind::moment)(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));

    // {-1, 1, 2}: sum of |differences| 6, sum of |sums| 4, clamped at 0.
    CHECK(stat_skew(make_proj({-1.0, 1.0, 2.0}, 1.0), SkewKind::distance)(0) == 0.0);
    // All-zero projection: degenerate denominator gives 0.
    CHECK(stat_skew(make_proj({0.0, 0.0, 0.0}, 1.0), SkewKind::distance)(0) == 0.0);
}

TEST_CASE("distance skewness matches the all-pairs oracle") {
    Rng rng(9);
    std::vector<double> y(200);
    Projections p;
    p.Y.resize(200, 1);
    for (Index i = 0; i < 200; ++i) {
        y[static_cast<std::size_t>(i)] = rng.gumbel();
        p.Y(i, 0) = y[static_cast<std::size_t>(i)];
    }
    p.eigenvalues = Vector::Constant(1, 1.0);
    CHECK(stat_skew(p, SkewKind::distance)(0) == doctest::Approx(dskew_oracle(y)).epsilon(1e-12));
}

TEST_CASE("cov-adjusted reduces to mean when magnitudes are equal") {
    Rng rng(11);
    Matrix X(400, 3);
    for (Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
    X.col(0) *= 3.0;
    X.col(1) *= 2.0;
    SpectralModel spectral = fit_spectral(X);
    // Force equal mean magnitudes in the eigenbasis: a symmetric-about-mu
    // sample has all |mu_i| identical only if we build it so; instead use
    // the invariant on the formula directly by shifting X so projections
    // share one magnitude is brittle -- check the bound instead and the
    // independent-coordinate agreement below.
    const Vector adj = stat_cov_adjusted(X, spectral);
    const Vector mean_scores = stat_mean(project(X, spectral));
    for (Index i = 0; i < 3; ++i) CHECK(adj(i) <= mean_scores(i) + 1e-12);
}

TEST_CASE("cov-adjusted approximately equals mean for independent coordinates") {
    Rng rng(13);
    Matrix X(20000, 3);
    for (Index n = 0; n < X.rows(); ++n) {
        X(n, 0) = 3.0 * rng.normal() + 1.0;
        X(n, 1) = 2.0 * rng.normal() + 0.5;
        X(n, 2) = rng.normal() + 0.25;
    }
    SpectralModel spectral = fit_spectral(X);
    const Vector adj = stat_cov_adjusted(X, spectral);
    const Vector mean_scores = stat_mean(project(X, spectral));
    for (Index i = 0; i < 3; ++i) CHECK(std::abs(adj(i) - mean_scores(i)) < 0.05 * mean_scores(i));
}

TEST_CASE("cov-adjusted requires distinct eigenvalues") {
    Rng rng(15);
    Matrix X(100, 2);
    for (Index i = 0; i < X.rows(); ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = rng.normal();
    }
    SpectralModel spectral = fit_spectral(X);
    spectral.eigenvalues(1) = spectral.eigenvalues(0);  // forced collision
    CHECK_THROWS_AS(stat_cov_adjusted(X, spectral), distinct_eigenvalue_error);
}

TEST_CASE("rank orders ascending with index ties and +inf last") {
    Vector s(3);
    s << 0.3, 0.1, 0.2;
    CHECK(rank(s).order == std::vector<int>{1, 2, 0});

    Vector t(2);
    t << 0.1, 0.1;
    CHECK(rank(t).order == std::vector<int>{0, 1});

    Vector u(3);
    u << 0.5, kInf, 0.2;
    CHECK(rank(u).order == std::vector<int>{2, 0, 1});

    Rng rng(17);
    Vector r(8);
    for (Index i = 0; i < 8; ++i) r(i) = rng.uniform01();
    auto order = rank(r).order;
    std::sort(order.begin(), order.end());
    for (int i = 0; i < 8; ++i) CHECK(order[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("scores are row-permutation invariant") {
    Rng rng(19);
    Matrix X(60, 3);
    for (Index i = 0; i < X.size(); ++i) X(i) = rng.gumbel();
    SpectralModel spectral = fit_spectral(X);
    std::vector<Index> idx(60);
    for (Index i = 0; i < 60; ++i) idx[static_cast<std::size_t>(i)] = i;
    shuffle_indices(idx, rng);
    Matrix Xp(60, 3);
    for (Index i = 0; i < 60; ++i) Xp.row(i) = X.row(idx[static_cast<std::size_t>(i)]);

    for (Statistic stat : {Statistic::mean, Statistic::median, Statistic::mm_mix, Statistic::sign,
                           Statistic::skew, Statistic::np_skew, Statistic::cov_adj}) {
        const Vector a = compute_statistic(stat, X, spectral);
        const Vector b = compute_statistic(stat, Xp, spectral);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("stat_mean is invariant under positive rescaling of X") {
    Rng rng(21);
    Matrix X(80, 3);
    for (Index i = 0; i < X.size(); ++i) X(i) = rng.normal() + 0.3;
    const Vector a = stat_mean(project(X, fit_spectral(X)));
    const Matrix X5 = 5.0 * X;
    const Vector b = stat_mean(project(X5, fit_spectral(X5)));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exactly symmetric samples zero out the negated coordinates") {
    SynthConfig cfg;
    cfg.dim = 6;
    cfg.samples = 400;
    cfg.clusters = 2;
    cfg.seed = 23;
    cfg.planted_swaps = 3;
    cfg.exact_pairs = true;
    auto [data, truth] = gumbel_mixture(cfg);
    SpectralModel spectral = fit_spectral(data.values);
    const Projections proj = project(data.values, spectral);

    // Coordinates negated by the planted symmetry (v^T T v close to -1).
    std::vector<Index> negated;
    for (Index i = 0; i < 6; ++i) {
        const Vector v = spectral.eigenvectors.col(i);
        if (v.dot(truth.matrix * v) < -0.9) negated.push_back(i);
    }
    REQUIRE(!negated.empty());
    const Vector mean_s = stat_mean(proj);
    const Vector median_s = stat_median(proj);
    const Vector sign_s = stat_sign(proj);
    const Vector skew_s = stat_skew(proj, SkewKind::moment);
    const Vector dskew_s = stat_skew(proj, SkewKind::distance);
    for (Index i : negated) {
        CHECK(mean_s(i) < 1e-9);
        CHECK(median_s(i) < 1e-9);
        CHECK(sign_s(i) < 1e-9);
        CHECK(skew_s(i) < 1e-6);
        CHECK(dskew_s(i) < 1e-6);
    }
}

TEST_CASE("statistic names round-trip through the parser") {
    for (const char* name : {"mean", "median", "mm-mix", "sign", "skew", "np-skew", "dskew", "cov-adj"})
        CHECK(statistic_name(parse_statistic(name)) == name);
    CHECK_THROWS_AS(parse_statistic("bogus"), std::invalid_argument);
}

TEST_CASE("label_similarity with identical classes equals the per-class |P|") {
    Rng rng(25);
    Matrix block(300, 3);
    for (Index i = 0; i < block.size(); ++i) block(i) = rng.gumbel();
    block.col(1) = 0.7 * block.col(0) + 0.3 * block.col(1);  // correlated pair
    DesignMatrix X;
    X.values.resize(600, 3);
    X.values.topRows(300) = block;
    X.values.bottomRows(300) = block;
    X.labels = std::vector<int>(600);
    for (Index i = 0; i < 600; ++i) (*X.labels)[static_cast<std::size_t>(i)] = i < 300 ? 0 : 1;

    SpectralModel spectral = fit_spectral(X.values);
    const LabeledSimilarity sim = label_similarity(X, spectral);
    CHECK(sim.aux_index == 3);
    CHECK((sim.matrix - sim.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    for (Index i = 0; i <= 3; ++i) CHECK(sim.matrix(i, i) == 1.0);

    // Oracle: single-class |P| in the pooled eigenbasis.
    Matrix proj = (block.rowwise() - spectral.mean.transpose()) * spectral.eigenvectors;
    Matrix P(3, 3);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) {
            const auto a = proj.col(i).array() - proj.col(i).mean();
            const auto b = proj.col(j).array() - proj.col(j).mean();
            P(i, j) = std::abs((a * b).sum() / std::sqrt(a.square().sum() * b.square().sum()));
        }
    CHECK((sim.matrix.topLeftCorner(3, 3) - P).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("auxiliary similarity vanishes for a mean-zero coordinate") {
    DesignMatrix X;
    X.values.resize(8, 2);
    X.values << 1, 1, -1, 1, 2, 1, -2, 1, 1, 3, -1, 3, 2, 3, -2, 3;
    X.labels = std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1};
    SpectralModel spectral = fit_spectral(X.values);
    const LabeledSimilarity sim = label_similarity(X, spectral);
    // Coordinate 0 has exact zero mean within every class; its eigenvector
    // is axis-aligned because the covariance is diagonal here.
    Index zero_axis = spectral.eigenvectors.col(0).cwiseAbs()(0) > 0.9 ? 0 : 1;
    CHECK(std::abs(sim.matrix(sim.aux_index, zero_axis)) < 1e-12);
}

TEST_CASE("dissimilarity_select hand-built matrix and edge cases") {
    // Eigenvector 0 similar to aux; 1 and 2 mutually similar.
    Matrix S(4, 4);
    S << 1.0, 0.1, 0.1, 0.9,
         0.1, 1.0, 0.9, 0.1,
         0.1, 0.9, 1.0, 0.1,
         0.9, 0.1, 0.1, 1.0;
    LabeledSimilarity sim{S, 3};
    const auto fixed = dissimilarity_select(sim);
    REQUIRE(fixed.size() == 1);
    CHECK(fixed[0] == 0);

    CHECK(dissimilarity_select(sim, 0).empty());

    LabeledSimilarity flat{Matrix::Ones(4, 4), 3};
    CHECK(dissimilarity_select(flat).empty());
}

TEST_CASE("ranking CSV has the documented header") {
    Vector s(2);
    s << 0.4, 0.2;
    Vector ev(2);
    ev << 3.0, 1.0;
    std::stringstream ss;
    write_ranking_csv(ss, rank(s, "mean"), ev);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "index,eigenvalue,score,rank");
    int rows = 0;
    while (std::getline(ss, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}
