#include "tmplgraph/templates.hpp"

#include "tmplgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace tmplgraph {

std::string to_string(HingeDirection d) {
    return d == HingeDirection::literal ? "literal" : "separation";
}

HingeDirection parse_hinge_direction(const std::string& s) {
    if (s == "literal") {
        return HingeDirection::literal;
    }
    if (s == "separation") {
        return HingeDirection::separation;
    }
    throw UsageError("hinge direction must be 'literal' or 'separation', got '" + s + "'");
}

void TemplateHyperParams::validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(lambda1) || !finite_nonneg(lambda2) || !finite_nonneg(gamma)) {
        throw InvalidSpec("lambda1, lambda2 and gamma must be finite and nonnegative");
    }
    if (!(std::isfinite(epsilon) && epsilon > 0.0) || !(std::isfinite(tol) && tol > 0.0)) {
        throw InvalidSpec("epsilon and tol must be finite and positive");
    }
    if (max_iter < 1) {
        throw InvalidSpec("max_iter must be positive");
    }
}

GlobalTemplate global_template(const TemplateSet& templates) {
    return global_template(std::span<const Matrix>(templates.templates));
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
    }
}

void require_compatible(std::span<const Matrix> templates, const LabeledDataset& data) {
    if (static_cast<int>(templates.size()) != data.num_groups()) {
        throw DimensionMismatch("got " + std::to_string(templates.size()) + " templates for " +
                                std::to_string(data.num_groups()) + " groups");
    }
    for (const Matrix& g : templates) {
        if (g.rows() != data.num_rois() || g.cols() != data.num_rois()) {
            throw DimensionMismatch("template size does not match dataset ROI count");
        }
    }
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double hinge_slope(double x, double b, double gamma, HingeDirection direction) {
    const double d = std::abs(x - b);
    if (direction == HingeDirection::literal) {
        return d > gamma ? sign(x - b) : 0.0;
    }
    return d < gamma ? -sign(x - b) : 0.0;
}

double penalty_terms(std::span<const Matrix> templates, const TemplateHyperParams& hyper) {
    double l1 = 0.0;
    for (const Matrix& g : templates) {
        l1 += g.cwiseAbs().sum();
    }
    double inter = 0.0;
    const std::size_t groups = templates.size();
    for (std::size_t a = 0; a < groups; ++a) {
        for (std::size_t b = 0; b < groups; ++b) {
            if (a == b) {
                continue;
            }
            const Matrix& ga = templates[a];
            const Matrix& gb = templates[b];
            for (Eigen::Index j = 0; j < ga.cols(); ++j) {
                for (Eigen::Index i = 0; i < ga.rows(); ++i) {
                    inter += hinge_penalty(ga(i, j), gb(i, j), hyper.gamma, hyper.hinge_direction);
                }
            }
        }
    }
    return hyper.lambda1 * l1 + hyper.lambda2 * inter;
}

}  // namespace

double adaptive_weight(const Matrix& g, const ConnectivityMatrix& w, double epsilon) {
    require_same_shape(g, w.weights, "adaptive_weight");
    const double dist = (g - w.weights).norm();
    return 1.0 / std::sqrt(std::max(dist, epsilon));
}

double hinge_penalty(double a, double b, double gamma, HingeDirection direction) {
    const double d = std::abs(a - b);
    return direction == HingeDirection::literal ? std::max(d - gamma, 0.0) : std::max(gamma - d, 0.0);
}

WeightTable compute_weights(std::span<const Matrix> templates, const LabeledDataset& data, double epsilon) {
    require_compatible(templates, data);
    WeightTable table;
    table.alpha.resize(static_cast<std::size_t>(data.num_groups()));
    for (int c = 0; c < data.num_groups(); ++c) {
        for (std::size_t k : data.group(c)) {
            table.alpha[static_cast<std::size_t>(c)].push_back(
                adaptive_weight(templates[static_cast<std::size_t>(c)], data.subject(k).matrix, epsilon));
        }
    }
    return table;
}

double objective(std::span<const Matrix> templates, const LabeledDataset& data, const WeightTable& weights,
                 const TemplateHyperParams& hyper) {
    require_compatible(templates, data);
    double intra = 0.0;
    for (int c = 0; c < data.num_groups(); ++c) {
        const auto& idx = data.group(c);
        const auto& alpha = weights.alpha.at(static_cast<std::size_t>(c));
        if (alpha.size() != idx.size()) {
            throw DimensionMismatch("weight table does not cover group " + std::to_string(c));
        }
        for (std::size_t t = 0; t < idx.size(); ++t) {
            intra += alpha[t] * (templates[static_cast<std::size_t>(c)] - data.subject(idx[t]).matrix.weights)
                                    .squaredNorm();
        }
    }
    return intra + penalty_terms(templates, hyper);
}

double objective(const TemplateSet& templates, const LabeledDataset& data, const WeightTable& weights) {
    return objective(templates.templates, data, weights, templates.hyper);
}

double induced_objective(std::span<const Matrix> templates, const LabeledDataset& data,
                         const TemplateHyperParams& hyper) {
    require_compatible(templates, data);
    double intra = 0.0;
    for (int c = 0; c < data.num_groups(); ++c) {
        for (std::size_t k : data.group(c)) {
            const double r = (templates[static_cast<std::size_t>(c)] - data.subject(k).matrix.weights).norm();
            intra += r * std::sqrt(r);
        }
    }
    return (4.0 / 3.0) * intra + penalty_terms(templates, hyper);
}

double entry_objective(double x, std::span<const EntryTarget> targets, double lambda1, double lambda2,
                       std::span<const HingeTerm> hinge_terms, HingeDirection direction) {
    double f = 0.0;
    for (const auto& t : targets) {
        f += t.weight * (x - t.value) * (x - t.value);
    }
    f += lambda1 * std::abs(x);
    double h = 0.0;
    for (const auto& term : hinge_terms) {
        h += hinge_penalty(x, term.other, term.gamma, direction);
    }
    return f + lambda2 * h;
}

double solve_entry(std::span<const EntryTarget> targets, double lambda1, double lambda2,
                   std::span<const HingeTerm> hinge_terms, HingeDirection direction) {
    if (targets.empty()) {
        throw EmptyTargets();
    }
    double curvature = 0.0;  // sum of weights
    double pull = 0.0;       // sum of weight * value
    for (const auto& t : targets) {
        curvature += t.weight;
        pull += t.weight * t.value;
    }

    // Kinks of the piecewise-linear part. Between consecutive kinks f is a
    // single quadratic, so its minimizer there is a clamped stationary point.
    std::vector<double> kinks{0.0};
    for (const auto& h : hinge_terms) {
        kinks.push_back(h.other - h.gamma);
        kinks.push_back(h.other);
        kinks.push_back(h.other + h.gamma);
    }
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

    auto linear_slope = [&](double x) {
        double s = lambda1 * sign(x);
        for (const auto& h : hinge_terms) {
            s += lambda2 * hinge_slope(x, h.other, h.gamma, direction);
        }
        return s;
    };
    auto stationary = [&](double probe) { return (2.0 * pull - linear_slope(probe)) / (2.0 * curvature); };

    std::vector<double> candidates = kinks;
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= kinks.size(); ++s) {
        const double lo = s == 0 ? -inf : kinks[s - 1];
        const double hi = s == kinks.size() ? inf : kinks[s];
        double probe;
        if (s == 0) {
            probe = hi - 1.0;
        } else if (s == kinks.size()) {
            probe = lo + 1.0;
        } else {
            probe = 0.5 * (lo + hi);
        }
        candidates.push_back(std::clamp(stationary(probe), lo, hi));
    }

    double best = candidates.front();
    double best_f = entry_objective(best, targets, lambda1, lambda2, hinge_terms, direction);
    for (double x : candidates) {
        const double f = entry_objective(x, targets, lambda1, lambda2, hinge_terms, direction);
        const bool better = f < best_f ||
                            (f == best_f && (std::abs(x) < std::abs(best) ||
                                             (std::abs(x) == std::abs(best) && x < best)));
        if (better) {
            best = x;
            best_f = f;
        }
    }
    return best;
}

Matrix update_template(int c, std::span<const Matrix> templates, const LabeledDataset& data,
                       const WeightTable& weights, const TemplateHyperParams& hyper) {
    require_compatible(templates, data);
    const auto& idx = data.group(c);
    const auto& alpha = weights.alpha.at(static_cast<std::size_t>(c));
    if (alpha.size() != idx.size()) {
        throw DimensionMismatch("weight table does not cover group " + std::to_string(c));
    }
    const Eigen::Index m = data.num_rois();
    // G_c enters the ordered-pair hinge sum as both (c, c') and (c', c).
    const double block_lambda2 = 2.0 * hyper.lambda2;

    Matrix out = Matrix::Identity(m, m);
    std::vector<EntryTarget> targets(idx.size());
    std::vector<HingeTerm> hinges;
    hinges.reserve(templates.size());
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            for (std::size_t t = 0; t < idx.size(); ++t) {
                targets[t] = {data.subject(idx[t]).matrix.weights(i, j), alpha[t]};
            }
            hinges.clear();
            for (std::size_t other = 0; other < templates.size(); ++other) {
                if (static_cast<int>(other) != c) {
                    hinges.push_back({templates[other](i, j), hyper.gamma});
                }
            }
            const double v = solve_entry(targets, hyper.lambda1, block_lambda2, hinges, hyper.hinge_direction);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

std::vector<Matrix> initial_templates(const LabeledDataset& data) {
    const Eigen::Index m = data.num_rois();
    std::vector<Matrix> out;
    for (int c = 0; c < data.num_groups(); ++c) {
        Matrix mean = Matrix::Zero(m, m);
        for (std::size_t k : data.group(c)) {
            mean += data.subject(k).matrix.weights;
        }
        mean /= static_cast<double>(data.group(c).size());
        mean.diagonal().setOnes();
        // symmetrize so the invariant holds even for slightly asymmetric inputs
        out.push_back(0.5 * (mean + mean.transpose()));
    }
    return out;
}

TemplateSet fit_templates(const LabeledDataset& data, const TemplateHyperParams& hyper) {
    hyper.validate();
    TemplateSet result;
    result.hyper = hyper;
    result.templates = initial_templates(data);

    double prev = induced_objective(result.templates, data, hyper);
    if (!std::isfinite(prev)) {
        throw NonFinite("template objective is not finite at initialization");
    }
    result.objective_trace.push_back(prev);

    for (int iter = 1; iter <= hyper.max_iter; ++iter) {
        const WeightTable weights = compute_weights(result.templates, data, hyper.epsilon);
        for (int c = 0; c < data.num_groups(); ++c) {
            result.templates[static_cast<std::size_t>(c)] =
                update_template(c, result.templates, data, weights, hyper);
        }
        const double current = induced_objective(result.templates, data, hyper);
        if (!std::isfinite(current)) {
            throw NonFinite("template objective became non-finite at iteration " + std::to_string(iter));
        }
        result.objective_trace.push_back(current);
        result.iterations_run = iter;
        if (std::abs(current - prev) / std::max(std::abs(prev), 1.0) < hyper.tol) {
            result.converged = true;
            break;
        }
        prev = current;
    }
    return result;
}

std::vector<double> similarity_scores(const ConnectivityMatrix& w, const TemplateSet& templates) {
    std::vector<double> scores;
    for (const Matrix& g : templates.templates) {
        require_same_shape(g, w.weights, "similarity_scores");
        double s = 0.0;
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            for (Eigen::Index i = 0; i < g.rows(); ++i) {
                if (i != j) {
                    s += w.weights(i, j) * g(i, j);
                }
            }
        }
        scores.push_back(s);
    }
    return scores;
}

SupportScore support_f1(const std::vector<Edge>& predicted, const std::vector<Edge>& truth) {
    const std::set<Edge> p(predicted.begin(), predicted.end());
    const std::set<Edge> t(truth.begin(), truth.end());
    std::size_t hits = 0;
    for (const auto& e : p) {
        hits += t.count(e);
    }
    SupportScore s;
    if (p.empty() && t.empty()) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    s.precision = p.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(p.size());
    s.recall = t.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(t.size());
    s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

std::vector<Edge> differentiated_edges(std::span<const Matrix> templates, double threshold) {
    std::vector<Edge> out;
    if (templates.empty()) {
        return out;
    }
    const Eigen::Index m = templates.front().rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            double spread = 0.0;
            for (std::size_t a = 0; a < templates.size(); ++a) {
                for (std::size_t b = a + 1; b < templates.size(); ++b) {
                    spread = std::max(spread, std::abs(templates[a](i, j) - templates[b](i, j)));
                }
            }
            if (spread > threshold) {
                out.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    return out;
}

std::vector<Edge> nonzero_edges(const Matrix& m) {
    std::vector<Edge> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            if (m(i, j) != 0.0) {
                out.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    return out;
}

}  // namespace tmplgraph
