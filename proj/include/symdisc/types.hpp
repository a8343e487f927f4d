#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace symdisc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// N x d sample of real vectors with optional integer class labels.
struct DesignMatrix {
    Matrix values;
    std::optional<std::vector<int>> labels;

    Index rows() const { return values.rows(); }
    Index dim() const { return values.cols(); }

    // Enforces the data-model invariants: N >= 2, d >= 1, finite values,
    // label count matches N.
    void validate() const;
};

struct insufficient_data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct degenerate_covariance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct distinct_eigenvalue_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct empty_restriction_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct inconsistent_group_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct no_scorable_coordinates_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct undefined_accuracy_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace symdisc
