#include "symdisc/groups.hpp"

#include "symdisc/selection.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace symdisc {

namespace {

std::vector<int> intersect_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

Vector signs_from_set(Index d, const std::vector<int>& negated) {
    Vector signs = Vector::Ones(d);
    for (int i : negated) signs(i) = -1.0;
    return signs;
}

}  // namespace

Matrix halfspace_restrict(const Matrix& X, const SpectralModel& spectral, const std::vector<int>& F) {
    std::set<int> unique(F.begin(), F.end());
    if (unique.size() != F.size()) throw std::invalid_argument("halfspace_restrict: F must be distinct");
    if (F.empty()) return X;

    std::vector<Index> keep;
    for (Index r = 0; r < X.rows(); ++r) {
        bool ok = true;
        for (int f : F)
            if (!(X.row(r) * spectral.eigenvectors.col(f) > 0.0)) {
                ok = false;
                break;
            }
        if (ok) keep.push_back(r);
    }
    if (keep.empty())
        throw empty_restriction_error("halfspace_restrict: empty result at |F| = " +
                                      std::to_string(F.size()));
    Matrix out(static_cast<Index>(keep.size()), X.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Index>(i)) = X.row(keep[i]);
    return out;
}

std::vector<int> unfixed_vectors(const Matrix& X, const SpectralModel& spectral, Statistic statistic,
                                 double threshold) {
    if (threshold < 0) threshold = clt_threshold(X.rows());
    // Projections are always measured against the top-level eigenbasis;
    // restricted subsets are projected, never re-decomposed.
    const Projections proj = project(X, spectral);
    Vector scores;
    switch (statistic) {
        case Statistic::mean: scores = stat_mean(proj); break;
        case Statistic::median: scores = stat_median(proj); break;
        case Statistic::mm_mix: scores = stat_mm_mix(proj); break;
        case Statistic::sign: scores = stat_sign(proj); break;
        default: scores = compute_statistic(statistic, X, spectral); break;
    }
    std::vector<int> out;
    for (Index i = 0; i < scores.size(); ++i)
        if (scores(i) < threshold) out.push_back(static_cast<int>(i));
    return out;
}

GroupModel recover_group(const Matrix& X, const SpectralModel& spectral, Statistic statistic,
                         double threshold, Index min_rows) {
    GroupModel model;
    std::vector<int> S = unfixed_vectors(X, spectral, statistic, threshold);
    model.level_unfixed.push_back(S);
    model.level_rows.push_back(X.rows());

    while (!S.empty()) {
        // Largest eigenvalue first; eigenvalues are descending so that is
        // the smallest index in S.
        const int pick = *std::min_element(S.begin(), S.end());
        model.fixed_sequence.push_back(pick);

        Matrix restricted;
        try {
            restricted = halfspace_restrict(X, spectral, model.fixed_sequence);
        } catch (const empty_restriction_error&) {
            model.truncated = true;
            break;
        }
        if (restricted.rows() < min_rows) {
            model.truncated = true;
            model.level_rows.push_back(restricted.rows());
            break;
        }
        S = intersect_sorted(unfixed_vectors(restricted, spectral, statistic, threshold),
                             model.level_unfixed.front());
        model.level_unfixed.push_back(S);
        model.level_rows.push_back(restricted.rows());
    }

    model.order_log2 = static_cast<int>(model.fixed_sequence.size());
    return model;
}

std::vector<SymmetryCandidate> generators(const Matrix& X, const SpectralModel& spectral,
                                          const GroupModel& model, Statistic statistic,
                                          double threshold) {
    if (model.truncated)
        throw inconsistent_group_error("generators: recovery was truncated");
    const Index d = spectral.eigenvalues.size();
    const std::vector<int>& top = model.level_unfixed.front();

    std::vector<SymmetryCandidate> out;
    for (std::size_t j = 0; j < model.fixed_sequence.size(); ++j) {
        std::vector<int> F_minus;
        for (std::size_t i = 0; i < model.fixed_sequence.size(); ++i)
            if (i != j) F_minus.push_back(model.fixed_sequence[i]);

        const Matrix restricted = halfspace_restrict(X, spectral, F_minus);
        const std::vector<int> negated =
            intersect_sorted(unfixed_vectors(restricted, spectral, statistic, threshold), top);
        if (negated.empty())
            throw inconsistent_group_error("generators: identity generator at j = " + std::to_string(j));
        out.push_back(compose_symmetry(spectral.eigenvectors, signs_from_set(d, negated)));
    }
    return out;
}

void write_group_csv(std::ostream& out, const GroupModel& model) {
    if (!model.generators.empty()) {
        const Index d = model.generators.front().signs.size();
        for (Index i = 0; i < d; ++i) out << (i ? "," : "") << "sign_" << i;
        out << "\n";
    }
    for (const auto& gen : model.generators) {
        for (Index i = 0; i < gen.signs.size(); ++i) out << (i ? "," : "") << static_cast<int>(gen.signs(i));
        out << "\n";
    }
}

void write_group_meta_json(std::ostream& out, const GroupModel& model) {
    out << "{\n  \"order_log2\": " << model.order_log2 << ",\n  \"truncated\": "
        << (model.truncated ? "true" : "false") << ",\n  \"fixed_sequence\": [";
    for (std::size_t i = 0; i < model.fixed_sequence.size(); ++i)
        out << (i ? ", " : "") << model.fixed_sequence[i];
    out << "],\n  \"level_rows\": [";
    for (std::size_t i = 0; i < model.level_rows.size(); ++i) out << (i ? ", " : "") << model.level_rows[i];
    out << "]\n}\n";
}

}  // namespace symdisc
