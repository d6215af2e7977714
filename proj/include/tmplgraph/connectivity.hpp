/**
 * @file connectivity.hpp
 * @brief Connectivity matrices: construction from ROI time series, validation,
 * and the global-template augmentation primitive.
 */
#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace tmplgraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// T x M table of ROI signals (rows are timepoints).
struct TimeSeriesTable {
    Matrix values;
    std::vector<std::string> roi_names;  ///< empty or exactly M entries
};

/// Symmetric M x M weighted graph of one subject.
struct ConnectivityMatrix {
    Matrix weights;

    ConnectivityMatrix() = default;
    explicit ConnectivityMatrix(Matrix w) : weights(std::move(w)) {}

    Eigen::Index num_rois() const { return weights.rows(); }
};

/// Entrywise sum of all group templates.
struct GlobalTemplate {
    Matrix weights;
};

/// Pairwise Pearson correlations between the columns of `series`.
/// The result is symmetrized by averaging (i,j) and (j,i) and has a unit diagonal.
/// Throws TooFewTimepoints if T < 3 and ConstantColumn for a zero-variance column.
ConnectivityMatrix pearson_connectivity(const TimeSeriesTable& series);

enum class ValidationMode { strict_correlation, symmetric_only };

struct Violation {
    enum class Kind { not_square, asymmetric, diagonal_not_one, out_of_range, non_finite };
    Kind kind;
    Eigen::Index row;
    Eigen::Index col;
    double value;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Lists every invariant violation. Asymmetry is reported once per (i<j) pair.
ValidationReport validate_connectivity(const ConnectivityMatrix& m, ValidationMode mode);

GlobalTemplate global_template(std::span<const Matrix> templates);

/// Hadamard product W ⊙ G.
Matrix augment(const ConnectivityMatrix& w, const GlobalTemplate& g);

std::string to_string(Violation::Kind kind);

}  // namespace tmplgraph
