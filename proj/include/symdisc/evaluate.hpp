#pragma once

#include "symdisc/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace symdisc {

enum class Bucket { PLUS, MINUS, ERROR };

struct Histogram {
    std::vector<double> edges;  // bins+1 entries
    std::vector<int> counts;
    double near_global_fraction = 0.0;
};

struct EvalRecord {
    std::uint64_t seed = 0;
    std::string method;
    int dim = 0;
    Index samples = 0;
    double error = 0.0;
    int k_pred = 0;
    int k_true = 0;
    double accuracy = 0.0;
    double runtime_s = 0.0;
};

// Frobenius norm of the difference of the two transformations.
double ground_truth_error(const Matrix& A_pred, const Matrix& A_true);

// Angle between v and T_flip v: < 60 degrees -> PLUS, > 120 -> MINUS,
// otherwise ERROR.
std::vector<Bucket> eigenvector_buckets(const Matrix& V, const Matrix& T_flip);

// Fraction of non-ERROR vectors whose predicted fixed/unfixed status
// matches the bucket.
double selection_accuracy(const std::vector<Bucket>& buckets, const std::vector<int>& predicted_unfixed);

// Equal-width histogram over [0, max] plus the share of errors below the
// 2-means mode-separation cut (fallback cut 0.5 when unimodal).
Histogram error_histogram(const std::vector<double>& errors, int bins);

// CSV: seed,method,d,N,error,k_pred,k_true,acc,runtime_s
void write_records_csv(std::ostream& out, const std::vector<EvalRecord>& records);
// CSV: bin_lo,bin_hi,count
void write_histogram_csv(std::ostream& out, const Histogram& hist);

// Binary PGM (P5, maxval 255). Values are clamped to [0,1].
void write_pgm(const std::string& path, const Matrix& image);

// One row of side x side images concatenated horizontally.
Matrix image_row(const Matrix& rows, int side);

}  // namespace symdisc
