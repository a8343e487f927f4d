#pragma once

#include "symdisc/ranking.hpp"
#include "symdisc/spectral.hpp"
#include "symdisc/types.hpp"

#include <iosfwd>
#include <vector>

namespace symdisc {

// Recovered generating set for a (Z/2Z)^n symmetry group.
struct GroupModel {
    std::vector<int> fixed_sequence;                // F, in recursion order
    std::vector<std::vector<int>> level_unfixed;    // S_0, S_1, ... (S_0 is the top level)
    std::vector<Index> level_rows;                  // sample size at each level
    std::vector<SymmetryCandidate> generators;      // filled by generators()
    int order_log2 = 0;                             // n, |G| = 2^n
    bool truncated = false;
};

inline constexpr Index kDefaultGroupMinRows = 200;

// Rows with strictly positive projection on every eigenvector in F
// (rows with an exactly-zero projection are dropped).
Matrix halfspace_restrict(const Matrix& X, const SpectralModel& spectral, const std::vector<int>& F);

// Indices whose statistic score over the TOP-LEVEL eigenbasis falls below
// the threshold. threshold < 0 selects the CLT cut-off for the given rows.
std::vector<int> unfixed_vectors(const Matrix& X, const SpectralModel& spectral, Statistic statistic,
                                 double threshold = -1.0);

GroupModel recover_group(const Matrix& X, const SpectralModel& spectral, Statistic statistic,
                         double threshold = -1.0, Index min_rows = kDefaultGroupMinRows);

// One generator per element of F, from the unfixed vectors of the
// restriction that omits that element.
std::vector<SymmetryCandidate> generators(const Matrix& X, const SpectralModel& spectral,
                                          const GroupModel& model, Statistic statistic,
                                          double threshold = -1.0);

// CSV of generator sign patterns plus a JSON metadata sidecar.
void write_group_csv(std::ostream& out, const GroupModel& model);
void write_group_meta_json(std::ostream& out, const GroupModel& model);

}  // namespace symdisc
