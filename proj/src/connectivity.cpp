#include "tmplgraph/connectivity.hpp"

#include "tmplgraph/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tmplgraph {

ConnectivityMatrix pearson_connectivity(const TimeSeriesTable& series) {
    const Matrix& x = series.values;
    const Eigen::Index t = x.rows();
    const Eigen::Index m = x.cols();
    if (t < 3) {
        throw TooFewTimepoints(static_cast<std::size_t>(t));
    }

    Matrix centered = x.rowwise() - x.colwise().mean();
    Vector norms = centered.colwise().norm();
    for (Eigen::Index j = 0; j < m; ++j) {
        // exact max == min also catches constants whose mean rounds off the value
        const bool constant = x.col(j).maxCoeff() == x.col(j).minCoeff();
        if (constant || !(norms(j) > 0.0) || !std::isfinite(norms(j))) {
            throw ConstantColumn(static_cast<std::size_t>(j));
        }
        centered.col(j) /= norms(j);
    }

    Matrix r = centered.transpose() * centered;
    Matrix sym = 0.5 * (r + r.transpose());
    for (Eigen::Index i = 0; i < m; ++i) {
        sym(i, i) = 1.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            // rounding can push |r| a hair past 1
            sym(i, j) = std::clamp(sym(i, j), -1.0, 1.0);
        }
    }
    return ConnectivityMatrix(std::move(sym));
}

ValidationReport validate_connectivity(const ConnectivityMatrix& cm, ValidationMode mode) {
    ValidationReport report;
    const Matrix& w = cm.weights;
    if (w.rows() != w.cols()) {
        report.violations.push_back({Violation::Kind::not_square, w.rows(), w.cols(), 0.0});
        return report;
    }
    const Eigen::Index m = w.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double v = w(i, j);
            if (!std::isfinite(v)) {
                report.violations.push_back({Violation::Kind::non_finite, i, j, v});
                continue;
            }
            if (i < j && v != w(j, i)) {
                report.violations.push_back({Violation::Kind::asymmetric, i, j, v - w(j, i)});
            }
            if (i == j && v != 1.0) {
                report.violations.push_back({Violation::Kind::diagonal_not_one, i, i, v});
            }
            if (mode == ValidationMode::strict_correlation && (v < -1.0 || v > 1.0)) {
                report.violations.push_back({Violation::Kind::out_of_range, i, j, v});
            }
        }
    }
    return report;
}

GlobalTemplate global_template(std::span<const Matrix> templates) {
    if (templates.empty()) {
        throw DimensionMismatch("global_template needs at least one template");
    }
    const Eigen::Index m = templates.front().rows();
    Matrix sum = Matrix::Zero(m, m);
    for (const Matrix& g : templates) {
        if (g.rows() != m || g.cols() != m) {
            throw DimensionMismatch("templates differ in ROI count");
        }
        sum += g;
    }
    return GlobalTemplate{std::move(sum)};
}

Matrix augment(const ConnectivityMatrix& w, const GlobalTemplate& g) {
    if (w.weights.rows() != g.weights.rows() || w.weights.cols() != g.weights.cols()) {
        throw DimensionMismatch("augment: matrix is " + std::to_string(w.weights.rows()) +
                                " ROIs, global template is " + std::to_string(g.weights.rows()));
    }
    return w.weights.cwiseProduct(g.weights);
}

std::string to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::not_square: return "not_square";
        case Violation::Kind::asymmetric: return "asymmetric";
        case Violation::Kind::diagonal_not_one: return "diagonal_not_one";
        case Violation::Kind::out_of_range: return "out_of_range";
        case Violation::Kind::non_finite: return "non_finite";
    }
    return "unknown";
}

}  // namespace tmplgraph
