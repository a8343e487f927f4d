#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symdisc/data.hpp"
#include "symdisc/groups.hpp"
#include "symdisc/ranking.hpp"
#include "symdisc/rng.hpp"
#include "symdisc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

using namespace symdisc;

namespace {

// Expands each base point through the orbit of the group generated by the
// given sign-pattern matrices, producing an exactly invariant dataset.
Matrix orbit_dataset(const Matrix& base, const std::vector<Matrix>& group_elements) {
    Matrix X(base.rows() * static_cast<Index>(group_elements.size()), base.cols());
    Index r = 0;
    for (const Matrix& g : group_elements)
        for (Index i = 0; i < base.rows(); ++i) X.row(r++) = base.row(i) * g.transpose();
    return X;
}

Matrix skewed_base(Index n, Index d, Rng& rng, const Vector& scales) {
    Matrix base(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) base(i, j) = scales(j) * rng.gumbel();
    return base;
}

// A (Z/2Z)^2 planted on two disjoint coordinate pairs of a d=6 space:
// g1 swaps e0<->e1, g2 swaps e2<->e3, coordinates 4,5 fixed and skewed.
struct PlantedGroup {
    Matrix X;
    Matrix g1, g2;
};

PlantedGroup planted_z2z2(std::uint64_t seed, Index n_base = 800) {
    Rng rng(seed);
    const Index d = 6;
    Matrix g1 = Matrix::Identity(d, d), g2 = Matrix::Identity(d, d);
    g1(0, 0) = g1(1, 1) = 0;
    g1(0, 1) = g1(1, 0) = 1;
    g2(2, 2) = g2(3, 3) = 0;
    g2(2, 3) = g2(3, 2) = 1;
    Vector scales(d);
    scales << 6.0, 3.0, 2.0, 1.4, 1.0, 0.7;
    Matrix base = skewed_base(n_base, d, rng, scales);
    // Shift the fixed coordinates away from 0 so they are decisively fixed.
    base.col(4).array() += 4.0;
    base.col(5).array() += 3.0;
    const std::vector<Matrix> group = {Matrix::Identity(d, d), g1, g2, (g1 * g2).eval()};
    return {orbit_dataset(base, group), g1, g2};
}

}  // namespace

TEST_CASE("halfspace_restrict basics and composition") {
    Rng rng(3);
    Matrix X(400, 2);
    for (Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
    // Pair each row with its negation so projections split exactly in half.
    Matrix paired(800, 2);
    paired.topRows(400) = X;
    paired.bottomRows(400) = -X;
    SpectralModel spectral = fit_spectral(paired);

    CHECK((halfspace_restrict(paired, spectral, {}) - paired).norm() == 0.0);

    const Matrix half = halfspace_restrict(paired, spectral, {0});
    CHECK(half.rows() == 400);

    const Matrix nested = halfspace_restrict(half, spectral, {1});
    const Matrix joint = halfspace_restrict(paired, spectral, {0, 1});
    CHECK(nested.rows() == joint.rows());
    CHECK((nested - joint).norm() == 0.0);

    CHECK_THROWS_AS(halfspace_restrict(paired, spectral, {0, 0}), std::invalid_argument);
}

TEST_CASE("halfspace_restrict raises on empty results") {
    Matrix X(4, 1);
    X << -1, -2, -3, -4;
    SpectralModel spectral = fit_spectral(X);
    // All projections share one sign; one of the two half-spaces is empty.
    const bool pos_empty = (X * spectral.eigenvectors.col(0)).maxCoeff() <= 0;
    if (pos_empty)
        CHECK_THROWS_AS(halfspace_restrict(X, spectral, {0}), empty_restriction_error);
    else
        CHECK(halfspace_restrict(X, spectral, {0}).rows() == 4);
}

TEST_CASE("unfixed_vectors finds exactly the planted swap coordinates") {
    SynthConfig cfg;
    cfg.dim = 6;
    cfg.samples = 4000;
    cfg.clusters = 2;
    cfg.seed = 7;
    cfg.planted_swaps = 2;
    cfg.exact_pairs = true;
    auto [data, truth] = gumbel_mixture(cfg);
    SpectralModel spectral = fit_spectral(data.values);

    std::set<int> expected;
    for (Index i = 0; i < 6; ++i) {
        const Vector v = spectral.eigenvectors.col(i);
        if (v.dot(truth.matrix * v) < 0) expected.insert(static_cast<int>(i));
    }
    const auto unfixed = unfixed_vectors(data.values, spectral, Statistic::mean);
    CHECK(std::set<int>(unfixed.begin(), unfixed.end()) == expected);

    CHECK(unfixed_vectors(data.values, spectral, Statistic::mean, 0.0).empty());
}

TEST_CASE("unfixed_vectors is empty for strongly shifted data") {
    Rng rng(9);
    Matrix X(3000, 3);
    for (Index i = 0; i < X.rows(); ++i)
        for (Index j = 0; j < 3; ++j) X(i, j) = rng.gumbel() * (j + 1) + 15.0 * (j + 1);
    SpectralModel spectral = fit_spectral(X);
    CHECK(unfixed_vectors(X, spectral, Statistic::mean).empty());
}

TEST_CASE("recover_group on a single planted symmetry gives n=1 and A0 = planted") {
    Rng rng(11);
    const Index d = 6;
    Matrix g1 = Matrix::Identity(d, d);
    g1(0, 0) = g1(1, 1) = 0;
    g1(0, 1) = g1(1, 0) = 1;
    Vector scales(d);
    scales << 6.0, 3.0, 2.0, 1.4, 1.0, 0.7;
    Matrix base = skewed_base(1200, d, rng, scales);
    // Decisively nonzero means on all the fixed coordinates.
    base.col(2).array() += 6.0;
    base.col(3).array() += 5.0;
    base.col(4).array() += 4.0;
    base.col(5).array() += 3.0;
    const Matrix X = orbit_dataset(base, {Matrix::Identity(d, d), g1});
    SpectralModel spectral = fit_spectral(X);
    GroupModel model = recover_group(X, spectral, Statistic::mean);
    CHECK(model.order_log2 == 1);
    CHECK_FALSE(model.truncated);
    auto gens = generators(X, spectral, model, Statistic::mean);
    REQUIRE(gens.size() == 1);
    CHECK((gens[0].matrix - g1).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("recover_group on planted (Z/2Z)^2 returns n=2 with correct generators") {
    const PlantedGroup planted = planted_z2z2(13);
    SpectralModel spectral = fit_spectral(planted.X);
    GroupModel model = recover_group(planted.X, spectral, Statistic::mean);
    CHECK(model.order_log2 == 2);
    CHECK_FALSE(model.truncated);
    REQUIRE(model.level_unfixed.size() >= 1);
    // S-sets strictly decrease while the loop continues.
    for (std::size_t l = 1; l < model.level_unfixed.size(); ++l)
        CHECK(model.level_unfixed[l].size() < model.level_unfixed[l - 1].size());

    auto gens = generators(planted.X, spectral, model, Statistic::mean);
    REQUIRE(gens.size() == 2);
    std::set<Matrix*> matched;
    for (auto& g : gens) {
        const bool is_g1 = (g.matrix - planted.g1).cwiseAbs().maxCoeff() < 1e-6;
        const bool is_g2 = (g.matrix - planted.g2).cwiseAbs().maxCoeff() < 1e-6;
        CHECK((is_g1 || is_g2));
    }
    CHECK((gens[0].matrix - gens[1].matrix).cwiseAbs().maxCoeff() > 1e-3);

    // The product negates the union of the two swap sets.
    const Matrix prod = gens[0].matrix * gens[1].matrix;
    CHECK((prod - planted.g1 * planted.g2).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("generator invariants hold on planted data") {
    const PlantedGroup planted = planted_z2z2(17);
    SpectralModel spectral = fit_spectral(planted.X);
    GroupModel model = recover_group(planted.X, spectral, Statistic::mean);
    auto gens = generators(planted.X, spectral, model, Statistic::mean);
    const Index d = planted.X.cols();
    std::set<std::vector<int>> element_signs;
    for (const auto& g : gens) {
        CHECK((g.matrix * g.matrix - Matrix::Identity(d, d)).norm() < 1e-8);
        CHECK((g.matrix * spectral.covariance * g.matrix.transpose() - spectral.covariance).norm() <
              1e-6 * spectral.covariance.norm());
        CHECK((g.matrix - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-6);  // not identity
    }
    // The generated group has 2^n distinct sign patterns.
    const int n = static_cast<int>(gens.size());
    for (int mask = 0; mask < (1 << n); ++mask) {
        Vector s = Vector::Ones(d);
        for (int j = 0; j < n; ++j)
            if (mask & (1 << j)) s = s.cwiseProduct(gens[static_cast<std::size_t>(j)].signs);
        std::vector<int> key(static_cast<std::size_t>(d));
        for (Index i = 0; i < d; ++i) key[static_cast<std::size_t>(i)] = s(i) > 0 ? 1 : -1;
        element_signs.insert(key);
    }
    CHECK(element_signs.size() == (1u << n));
}

TEST_CASE("asymmetric data gives the trivial group") {
    Rng rng(19);
    Matrix X(2000, 4);
    for (Index i = 0; i < X.rows(); ++i)
        for (Index j = 0; j < 4; ++j) X(i, j) = rng.gumbel() * (j + 1) + 10.0;
    SpectralModel spectral = fit_spectral(X);
    GroupModel model = recover_group(X, spectral, Statistic::mean);
    CHECK(model.order_log2 == 0);
    CHECK(model.fixed_sequence.empty());
}

TEST_CASE("row exhaustion truncates the recursion") {
    const PlantedGroup planted = planted_z2z2(23, 60);  // only 240 rows total
    SpectralModel spectral = fit_spectral(planted.X);
    GroupModel model = recover_group(planted.X, spectral, Statistic::mean, -1.0, 200);
    CHECK(model.truncated);
    CHECK(!model.level_rows.empty());
}

TEST_CASE("group CSV and JSON sidecar") {
    const PlantedGroup planted = planted_z2z2(29);
    SpectralModel spectral = fit_spectral(planted.X);
    GroupModel model = recover_group(planted.X, spectral, Statistic::mean);
    model.generators = generators(planted.X, spectral, model, Statistic::mean);
    std::stringstream csv;
    write_group_csv(csv, model);
    std::string line;
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(model.generators.size()) + 1);  // header + one per generator

    std::stringstream js;
    write_group_meta_json(js, model);
    const std::string s = js.str();
    CHECK(s.find("\"order_log2\": 2") != std::string::npos);
    CHECK(s.find("\"truncated\": false") != std::string::npos);
}
