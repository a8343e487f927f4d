#include "symdisc/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace symdisc {

void DesignMatrix::validate() const {
    if (rows() < 2) throw insufficient_data_error("DesignMatrix requires N >= 2");
    if (dim() < 1) throw std::invalid_argument("DesignMatrix requires d >= 1");
    if (!values.allFinite()) throw std::invalid_argument("DesignMatrix contains non-finite values");
    if (labels && static_cast<Index>(labels->size()) != rows())
        throw std::invalid_argument("label count does not match row count");
}

Matrix planted_swap_matrix(int dim, int swaps) {
    if (swaps < 0 || 2 * swaps > dim) throw std::invalid_argument("planted_swaps exceeds floor(d/2)");
    Matrix T = Matrix::Identity(dim, dim);
    for (int p = 0; p < swaps; ++p) {
        const int a = 2 * p, b = 2 * p + 1;
        T(a, a) = 0.0;
        T(b, b) = 0.0;
        T(a, b) = 1.0;
        T(b, a) = 1.0;
    }
    return T;
}

Matrix random_invertible(int dim, Rng& rng) {
    if (dim < 1) throw std::invalid_argument("random_invertible: dim must be >= 1");

    Matrix L = Matrix::Identity(dim, dim);
    for (int i = 1; i < dim; ++i)
        for (int j = 0; j < i; ++j) L(i, j) = rng.normal();

    Matrix U = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) U(i, j) = rng.normal();

    // Diagonal: permuted prefix sums of truncated normals in [0.4, 2] / 4,
    // so entries stay > 0.1 and pairwise >= 0.1 apart.
    std::vector<double> draws(dim);
    for (int i = 0; i < dim; ++i) draws[i] = rng.truncated_normal(0.4, 2.0) / 4.0;
    std::vector<double> prefix(dim);
    std::partial_sum(draws.begin(), draws.end(), prefix.begin());
    shuffle_indices(prefix, rng);
    for (int i = 0; i < dim; ++i) U(i, i) = prefix[i];

    return L * U;
}

std::pair<DesignMatrix, PlantedSymmetry> gumbel_mixture(const SynthConfig& config) {
    const int d = config.dim;
    const int N = config.samples;
    if (d < 1 || config.clusters < 1) throw std::invalid_argument("gumbel_mixture: bad dimensions");
    if (N % (2 * config.clusters) != 0)
        throw std::invalid_argument("gumbel_mixture: samples must be divisible by 2*clusters");
    if (2 * config.planted_swaps > d)
        throw std::invalid_argument("gumbel_mixture: planted_swaps exceeds floor(d/2)");

    Rng rng(config.seed);
    const Matrix T = planted_swap_matrix(d, config.planted_swaps);
    const int half = N / (2 * config.clusters);

    Matrix X(N, d);
    Index row = 0;
    Vector g(d);
    for (int c = 0; c < config.clusters; ++c) {
        const Matrix M = random_invertible(d, rng);
        Vector shift(d);
        for (int i = 0; i < d; ++i) shift(i) = rng.truncated_normal(-2.0, 2.0);

        const Index base = row;
        for (int n = 0; n < half; ++n) {
            for (int i = 0; i < d; ++i) g(i) = rng.gumbel();
            X.row(row++) = (M * g + shift).transpose();
        }
        if (config.exact_pairs) {
            for (int n = 0; n < half; ++n) X.row(row + n) = (T * X.row(base + n).transpose()).transpose();
            row += half;
        } else {
            for (int n = 0; n < half; ++n) {
                for (int i = 0; i < d; ++i) g(i) = rng.gumbel();
                X.row(row++) = (T * (M * g + shift)).transpose();
            }
        }
    }

    const double mean_all = X.mean();
    const double sd = std::sqrt((X.array() - mean_all).square().sum() / static_cast<double>(X.size()));
    X /= sd;

    PlantedSymmetry planted{T, {}};
    for (int p = 0; p < config.planted_swaps; ++p) planted.swapped_pairs.emplace_back(2 * p, 2 * p + 1);
    return {DesignMatrix{std::move(X), std::nullopt}, std::move(planted)};
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path, std::size_t offset) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw format_error(path + ": truncated header at offset " + std::to_string(offset));
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

DesignMatrix idx_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error(path + ": cannot open file");

    const std::uint32_t magic = read_be32(in, path, 0);
    if ((magic & 0xFFFF0000u) != 0) throw format_error(path + ": bad magic at offset 0");
    const unsigned type = (magic >> 8) & 0xFF;
    const unsigned rank = magic & 0xFF;
    if (type != 0x08) throw format_error(path + ": unsupported type byte at offset 2");
    if (rank != 1 && rank != 3) throw format_error(path + ": unsupported rank at offset 3");

    std::vector<std::uint32_t> dims(rank);
    for (unsigned r = 0; r < rank; ++r) dims[r] = read_be32(in, path, 4 + 4 * r);

    std::size_t count = 1;
    for (auto s : dims) count *= s;
    std::vector<unsigned char> payload(count);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw format_error(path + ": truncated payload at offset " +
                           std::to_string(4 + 4 * rank + static_cast<std::size_t>(in.gcount())));

    DesignMatrix out;
    if (rank == 1) {
        out.values.resize(static_cast<Index>(dims[0]), 0);
        std::vector<int> labels(payload.begin(), payload.end());
        out.labels = std::move(labels);
    } else {
        const Index n = static_cast<Index>(dims[0]);
        const Index d = static_cast<Index>(dims[1]) * static_cast<Index>(dims[2]);
        out.values.resize(n, d);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < d; ++j)
                out.values(i, j) = static_cast<double>(payload[static_cast<std::size_t>(i * d + j)]) / 255.0;
    }
    return out;
}

void idx_write_images(const std::string& path, const Matrix& values, int height, int width) {
    if (values.cols() != static_cast<Index>(height) * width)
        throw std::invalid_argument("idx_write_images: d != height*width");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error(path + ": cannot open for writing");
    write_be32(out, 0x00000803u);
    write_be32(out, static_cast<std::uint32_t>(values.rows()));
    write_be32(out, static_cast<std::uint32_t>(height));
    write_be32(out, static_cast<std::uint32_t>(width));
    for (Index i = 0; i < values.rows(); ++i)
        for (Index j = 0; j < values.cols(); ++j) {
            const long v = std::lround(std::clamp(values(i, j), 0.0, 1.0) * 255.0);
            const unsigned char b = static_cast<unsigned char>(v);
            out.write(reinterpret_cast<const char*>(&b), 1);
        }
}

void idx_write_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error(path + ": cannot open for writing");
    write_be32(out, 0x00000801u);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int v : labels) {
        const unsigned char b = static_cast<unsigned char>(v);
        out.write(reinterpret_cast<const char*>(&b), 1);
    }
}

DesignMatrix with_labels(DesignMatrix images, const DesignMatrix& label_file) {
    if (!label_file.labels) throw std::invalid_argument("with_labels: not a label file");
    if (static_cast<Index>(label_file.labels->size()) != images.rows())
        throw std::invalid_argument("with_labels: label count mismatch");
    images.labels = label_file.labels;
    return images;
}

DesignMatrix downsample(const DesignMatrix& X, int from_side, int to_side) {
    if (X.dim() != static_cast<Index>(from_side) * from_side)
        throw std::invalid_argument("downsample: d != from_side^2");
    if (to_side < 1 || to_side > from_side) throw std::invalid_argument("downsample: bad to_side");

    const double scale = static_cast<double>(from_side) / to_side;
    // Per-axis fractional overlap weights of output cell o against input cell i.
    Matrix W = Matrix::Zero(to_side, from_side);
    for (int o = 0; o < to_side; ++o) {
        const double lo = o * scale, hi = (o + 1) * scale;
        for (int i = static_cast<int>(std::floor(lo)); i < from_side && i < hi; ++i) {
            const double overlap = std::min(hi, double(i + 1)) - std::max(lo, double(i));
            if (overlap > 0) W(o, i) = overlap;
        }
        W.row(o) /= scale;
    }

    DesignMatrix out;
    out.labels = X.labels;
    out.values.resize(X.rows(), static_cast<Index>(to_side) * to_side);
    Matrix img(from_side, from_side);
    for (Index n = 0; n < X.rows(); ++n) {
        for (int r = 0; r < from_side; ++r)
            for (int c = 0; c < from_side; ++c) img(r, c) = X.values(n, r * from_side + c);
        const Matrix small = W * img * W.transpose();
        for (int r = 0; r < to_side; ++r)
            for (int c = 0; c < to_side; ++c) out.values(n, r * to_side + c) = small(r, c);
    }
    return out;
}

std::pair<DesignMatrix, PlantedSymmetry> flip_augment(const DesignMatrix& X, int side, Rng& rng) {
    const Index d = static_cast<Index>(side) * side;
    if (X.dim() != d) throw std::invalid_argument("flip_augment: d != side^2");

    Matrix T = Matrix::Zero(d, d);
    PlantedSymmetry planted;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const int mc = side - 1 - c;
            T(r * side + c, r * side + mc) = 1.0;
            if (c < mc) planted.swapped_pairs.emplace_back(r * side + c, r * side + mc);
        }
    planted.matrix = T;

    std::vector<Index> idx(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), Index{0});
    shuffle_indices(idx, rng);
    const std::size_t half = idx.size() / 2;

    DesignMatrix out;
    out.values = X.values;
    out.labels = X.labels;
    for (std::size_t k = 0; k < half; ++k) {
        const Index n = idx[k];
        for (int r = 0; r < side; ++r)
            for (int c = 0; c < side; ++c) out.values(n, r * side + c) = X.values(n, r * side + (side - 1 - c));
    }
    return {std::move(out), std::move(planted)};
}

void write_design_csv(std::ostream& out, const DesignMatrix& X) {
    out << std::setprecision(17);
    for (Index j = 0; j < X.dim(); ++j) out << (j ? "," : "") << "x" << j;
    if (X.labels) out << ",label";
    out << "\n";
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.dim(); ++j) out << (j ? "," : "") << X.values(i, j);
        if (X.labels) out << "," << (*X.labels)[static_cast<std::size_t>(i)];
        out << "\n";
    }
}

DesignMatrix read_design_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw format_error("empty CSV");
    bool has_label = line.size() >= 5 && line.substr(line.size() - 5) == "label";
    Index d = static_cast<Index>(std::count(line.begin(), line.end(), ',')) + 1;
    if (has_label) --d;

    std::vector<double> vals;
    std::vector<int> labels;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (Index j = 0; j < d; ++j) {
            if (!std::getline(ss, cell, ',')) throw format_error("short CSV row");
            vals.push_back(std::stod(cell));
        }
        if (has_label) {
            if (!std::getline(ss, cell, ',')) throw format_error("missing label cell");
            labels.push_back(std::stoi(cell));
        }
        ++rows;
    }
    DesignMatrix X;
    X.values.resize(rows, d);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < d; ++j) X.values(i, j) = vals[static_cast<std::size_t>(i * d + j)];
    if (has_label) X.labels = std::move(labels);
    return X;
}

void write_matrix_csv(std::ostream& out, const Matrix& M) {
    out << std::setprecision(17);
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << M(i, j);
        out << "\n";
    }
}

Matrix read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw format_error("empty matrix CSV");
    Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
    for (Index i = 0; i < M.rows(); ++i) {
        if (rows[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(M.cols()))
            throw format_error("ragged matrix CSV");
        for (Index j = 0; j < M.cols(); ++j) M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return M;
}

}  // namespace symdisc
