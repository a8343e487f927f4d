#include "symdisc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>

namespace symdisc {

double ground_truth_error(const Matrix& A_pred, const Matrix& A_true) {
    if (A_pred.rows() != A_true.rows() || A_pred.cols() != A_true.cols())
        throw std::invalid_argument("ground_truth_error: shape mismatch");
    return (A_pred - A_true).norm();
}

std::vector<Bucket> eigenvector_buckets(const Matrix& V, const Matrix& T_flip) {
    if (V.rows() != T_flip.rows()) throw std::invalid_argument("eigenvector_buckets: shape mismatch");
    std::vector<Bucket> buckets(static_cast<std::size_t>(V.cols()));
    for (Index k = 0; k < V.cols(); ++k) {
        const Vector v = V.col(k);
        const double c = std::clamp(v.dot(T_flip * v) / v.squaredNorm(), -1.0, 1.0);
        const double deg = std::acos(c) * 180.0 / M_PI;
        buckets[static_cast<std::size_t>(k)] =
            deg < 60.0 ? Bucket::PLUS : (deg > 120.0 ? Bucket::MINUS : Bucket::ERROR);
    }
    return buckets;
}

double selection_accuracy(const std::vector<Bucket>& buckets, const std::vector<int>& predicted_unfixed) {
    const std::set<int> unfixed(predicted_unfixed.begin(), predicted_unfixed.end());
    int correct = 0, total = 0;
    for (std::size_t k = 0; k < buckets.size(); ++k) {
        if (buckets[k] == Bucket::ERROR) continue;
        ++total;
        const bool predicted = unfixed.count(static_cast<int>(k)) > 0;
        if ((buckets[k] == Bucket::MINUS && predicted) || (buckets[k] == Bucket::PLUS && !predicted))
            ++correct;
    }
    if (total == 0) throw undefined_accuracy_error("selection_accuracy: no non-ERROR vectors");
    return static_cast<double>(correct) / total;
}

Histogram error_histogram(const std::vector<double>& errors, int bins) {
    if (errors.empty()) throw std::invalid_argument("error_histogram: empty input");
    if (bins < 2) throw std::invalid_argument("error_histogram: bins >= 2 required");

    Histogram hist;
    const double hi = std::max(*std::max_element(errors.begin(), errors.end()), 1e-300);
    hist.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) hist.edges[static_cast<std::size_t>(b)] = hi * b / bins;
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double e : errors) {
        int b = std::min(bins - 1, static_cast<int>(e / hi * bins));
        ++hist.counts[static_cast<std::size_t>(std::max(0, b))];
    }

    // 1-D 2-means to find the mode-separation cut.
    std::vector<double> sorted(errors);
    std::sort(sorted.begin(), sorted.end());
    if (sorted.back() - sorted.front() < 1e-12) {
        hist.near_global_fraction = 1.0;  // single mode by construction
        return hist;
    }
    double c_lo = sorted.front(), c_hi = sorted.back();
    for (int iter = 0; iter < 100; ++iter) {
        double sum_lo = 0, sum_hi = 0;
        int n_lo = 0, n_hi = 0;
        const double mid = 0.5 * (c_lo + c_hi);
        for (double e : sorted)
            (e < mid ? (sum_lo += e, ++n_lo) : (sum_hi += e, ++n_hi));
        if (n_lo == 0 || n_hi == 0) break;
        const double new_lo = sum_lo / n_lo, new_hi = sum_hi / n_hi;
        if (new_lo == c_lo && new_hi == c_hi) break;
        c_lo = new_lo;
        c_hi = new_hi;
    }

    // Cut at the largest inter-point gap between the two centers.
    double cut = 0.5;
    double best_gap = 0.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const double a = sorted[i], b = sorted[i + 1];
        if (a < c_lo || b > c_hi) continue;
        if (b - a > best_gap) {
            best_gap = b - a;
            cut = 0.5 * (a + b);
        }
    }
    if (best_gap <= 0.0) cut = 0.5;  // unimodal fallback

    int below = 0;
    for (double e : errors)
        if (e < cut) ++below;
    hist.near_global_fraction = static_cast<double>(below) / static_cast<double>(errors.size());
    return hist;
}

void write_records_csv(std::ostream& out, const std::vector<EvalRecord>& records) {
    out << std::setprecision(17) << "seed,method,d,N,error,k_pred,k_true,acc,runtime_s\n";
    for (const auto& r : records)
        out << r.seed << "," << r.method << "," << r.dim << "," << r.samples << "," << r.error << ","
            << r.k_pred << "," << r.k_true << "," << r.accuracy << "," << r.runtime_s << "\n";
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
    out << std::setprecision(17) << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
        out << hist.edges[b] << "," << hist.edges[b + 1] << "," << hist.counts[b] << "\n";
}

void write_pgm(const std::string& path, const Matrix& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error(path + ": cannot open for writing");
    out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
    for (Index r = 0; r < image.rows(); ++r)
        for (Index c = 0; c < image.cols(); ++c) {
            const unsigned char b =
                static_cast<unsigned char>(std::lround(std::clamp(image(r, c), 0.0, 1.0) * 255.0));
            out.write(reinterpret_cast<const char*>(&b), 1);
        }
}

Matrix image_row(const Matrix& rows, int side) {
    if (rows.cols() != static_cast<Index>(side) * side)
        throw std::invalid_argument("image_row: d != side^2");
    Matrix out(side, side * rows.rows());
    for (Index n = 0; n < rows.rows(); ++n)
        for (int r = 0; r < side; ++r)
            for (int c = 0; c < side; ++c) out(r, n * side + c) = rows(n, r * side + c);
    return out;
}

}  // namespace symdisc
