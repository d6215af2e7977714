/**
 * @file templates.hpp
 * @brief Per-group sparse template graphs fitted by block coordinate descent.
 *
 * The fitted objective is
 *
 *   J(G) = sum_c sum_{k in I_c} alpha(c,k) ||G_c - W_k||_F^2
 *        + lambda1 sum_c |G_c|_1
 *        + lambda2 sum_{c1 != c2} sum_{i,j} hinge(G_c1(i,j), G_c2(i,j))
 *
 * with alpha(c,k) = 1 / sqrt(||G_c - W_k||_F) refreshed every outer iteration.
 * That reweighting is a majorize-minimize scheme for the "induced" objective in
 * which the weighted squared residual is replaced by (4/3) ||G_c - W_k||_F^{3/2};
 * the induced objective is what fit_templates traces and what decreases
 * monotonically.
 *
 * All sums run over every (i,j), so the inter-group term counts each ordered
 * group pair and each symmetric entry separately. Diagonals are pinned to 1.
 */
#pragma once

#include "tmplgraph/connectivity.hpp"
#include "tmplgraph/dataset.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tmplgraph {

/// `literal` penalizes |a-b| > gamma (the hinge as usually printed);
/// `separation` penalizes |a-b| < gamma, pushing templates apart.
enum class HingeDirection { literal, separation };

std::string to_string(HingeDirection d);
HingeDirection parse_hinge_direction(const std::string& s);

struct TemplateHyperParams {
    double lambda1 = 0.1;
    double lambda2 = 0.005;
    double gamma = 0.05;
    HingeDirection hinge_direction = HingeDirection::separation;
    double epsilon = 1e-8;
    int max_iter = 50;
    double tol = 1e-6;

    /// Throws InvalidSpec when a field is non-finite or out of range.
    void validate() const;
};

struct TemplateSet {
    std::vector<Matrix> templates;
    TemplateHyperParams hyper;
    /// Induced objective: entry 0 is the initialization, entry t is after outer iteration t.
    std::vector<double> objective_trace;
    int iterations_run = 0;
    bool converged = false;

    int num_groups() const { return static_cast<int>(templates.size()); }
    Eigen::Index num_rois() const { return templates.empty() ? 0 : templates.front().rows(); }
};

/// alpha[c][t] is the weight of subject data.group(c)[t] in group c's fit.
struct WeightTable {
    std::vector<std::vector<double>> alpha;
};

GlobalTemplate global_template(const TemplateSet& templates);

double adaptive_weight(const Matrix& g, const ConnectivityMatrix& w, double epsilon);

double hinge_penalty(double a, double b, double gamma, HingeDirection direction);

/// Weights refreshed from the current templates.
WeightTable compute_weights(std::span<const Matrix> templates, const LabeledDataset& data, double epsilon);

/// The reweighted objective J at fixed weights.
double objective(std::span<const Matrix> templates, const LabeledDataset& data, const WeightTable& weights,
                 const TemplateHyperParams& hyper);
double objective(const TemplateSet& templates, const LabeledDataset& data, const WeightTable& weights);

/// The objective the alternating scheme provably descends.
double induced_objective(std::span<const Matrix> templates, const LabeledDataset& data,
                         const TemplateHyperParams& hyper);

struct EntryTarget {
    double value;
    double weight;
};

struct HingeTerm {
    double other;
    double gamma;
};

/// Exact global minimizer of
///   f(x) = sum_k weight_k (x - value_k)^2 + lambda1 |x| + lambda2 sum_h hinge(x, other_h, gamma_h)
/// found by minimizing the quadratic on every segment between kinks.
/// Ties go to the smallest |x|, then the smallest x. Throws EmptyTargets.
double solve_entry(std::span<const EntryTarget> targets, double lambda1, double lambda2,
                   std::span<const HingeTerm> hinge_terms, HingeDirection direction);

/// Value of the scalar objective minimized by solve_entry.
double entry_objective(double x, std::span<const EntryTarget> targets, double lambda1, double lambda2,
                       std::span<const HingeTerm> hinge_terms, HingeDirection direction);

/// Exact minimizer of J over G_c with every other template and the weights fixed.
/// Each strict-upper entry is solved independently and mirrored; the diagonal is 1.
Matrix update_template(int c, std::span<const Matrix> templates, const LabeledDataset& data,
                       const WeightTable& weights, const TemplateHyperParams& hyper);

/// Group means with a unit diagonal.
std::vector<Matrix> initial_templates(const LabeledDataset& data);

/// Alternates weight refreshes and per-group exact block updates (ascending group
/// order) until the relative change of the induced objective drops below `tol`.
/// Throws NonFinite if the objective stops being finite.
TemplateSet fit_templates(const LabeledDataset& data, const TemplateHyperParams& hyper);

/// Off-diagonal Frobenius inner product of `w` with every template.
std::vector<double> similarity_scores(const ConnectivityMatrix& w, const TemplateSet& templates);

/// Strict-upper (i<j) index pair.
using Edge = std::pair<int, int>;

struct SupportScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

SupportScore support_f1(const std::vector<Edge>& predicted, const std::vector<Edge>& truth);

/// Off-diagonal entries (i<j) where some pair of templates differs by more than `threshold`.
std::vector<Edge> differentiated_edges(std::span<const Matrix> templates, double threshold);

/// Off-diagonal entries (i<j) that are nonzero in `m`.
std::vector<Edge> nonzero_edges(const Matrix& m);

}  // namespace tmplgraph
