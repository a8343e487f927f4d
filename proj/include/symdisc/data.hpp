#pragma once

#include "symdisc/rng.hpp"
#include "symdisc/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace symdisc {

struct SynthConfig {
    int dim = 10;
    int samples = 10000;
    int clusters = 2;
    std::uint64_t seed = 0;
    int planted_swaps = 5;
    // When set, the symmetric half reuses the sampled points instead of
    // drawing fresh ones, making the sample exactly invariant (as a
    // multiset) under the planted transformation.
    bool exact_pairs = false;
};

// A signed permutation that is its own inverse.
struct PlantedSymmetry {
    Matrix matrix;
    std::vector<std::pair<int, int>> swapped_pairs;
};

// The coordinate-pair swap e0<->e1, e2<->e3, ... (identity past 2*swaps).
Matrix planted_swap_matrix(int dim, int swaps);

// L*U with unit-diagonal L, standard-normal strictly-lower/upper entries,
// and a diagonal of permuted prefix sums of truncated-normal draws so all
// diagonal entries are > 0.1 and pairwise >= 0.1 apart.
Matrix random_invertible(int dim, Rng& rng);

// Mixture of affinely transformed Gumbel clusters with a planted swap
// symmetry; the whole dataset is divided by its scalar standard deviation.
std::pair<DesignMatrix, PlantedSymmetry> gumbel_mixture(const SynthConfig& config);

// IDX ingestion. Rank-3 files fill `values` (pixels scaled to [0,1]);
// rank-1 files fill `labels` and leave `values` empty.
DesignMatrix idx_read(const std::string& path);

// IDX writers (round-trip counterparts of idx_read; used by tests and for
// staging fixtures). Images are quantized with std::lround(v * 255).
void idx_write_images(const std::string& path, const Matrix& values, int height, int width);
void idx_write_labels(const std::string& path, const std::vector<int>& labels);

// Merge a label file into an image DesignMatrix.
DesignMatrix with_labels(DesignMatrix images, const DesignMatrix& label_file);

// Block-average pooling onto a to_side x to_side grid, with fractional-area
// weighting when from_side is not a multiple of to_side.
DesignMatrix downsample(const DesignMatrix& X, int from_side, int to_side);

// Horizontally mirrors a uniformly random half of the rows; returns the
// augmented dataset and the exact flip permutation.
std::pair<DesignMatrix, PlantedSymmetry> flip_augment(const DesignMatrix& X, int side, Rng& rng);

// CSV with header x0,...,x{d-1}[,label].
void write_design_csv(std::ostream& out, const DesignMatrix& X);
DesignMatrix read_design_csv(std::istream& in);
void write_matrix_csv(std::ostream& out, const Matrix& M);
Matrix read_matrix_csv(std::istream& in);

}  // namespace symdisc
