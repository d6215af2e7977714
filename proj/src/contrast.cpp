#include "tmplgraph/contrast.hpp"

#include "tmplgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tmplgraph {

namespace {

void check_nodes(const std::vector<int>& nodes, Eigen::Index m) {
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (int v : nodes) {
        if (v < 0 || v >= m) {
            throw IndexOutOfRange("node " + std::to_string(v) + " outside 0.." + std::to_string(m - 1));
        }
        if (seen[static_cast<std::size_t>(v)]) {
            throw IndexOutOfRange("node " + std::to_string(v) + " listed twice");
        }
        seen[static_cast<std::size_t>(v)] = true;
    }
}

double score_unchecked(const Matrix& d, const std::vector<int>& nodes, double eta) {
    double mass = 0.0;
    for (int i : nodes) {
        for (int j : nodes) {
            mass += d(i, j);
        }
    }
    const double k = static_cast<double>(nodes.size());
    return mass - eta * k * k;
}

std::vector<int> members(const std::vector<char>& in) {
    std::vector<int> out;
    for (std::size_t v = 0; v < in.size(); ++v) {
        if (in[v]) {
            out.push_back(static_cast<int>(v));
        }
    }
    return out;
}

/// Hill-climb from `in` until no add / remove / swap improves by kMinImprovement.
/// Gains are evaluated from row sums s(i) = sum_{j in S} d(i,j).
void climb(const Matrix& d, double eta, std::vector<char>& in) {
    const int m = static_cast<int>(d.rows());
    Vector s = Vector::Zero(m);
    int k = 0;
    for (int v = 0; v < m; ++v) {
        if (in[static_cast<std::size_t>(v)]) {
            s += d.col(v);
            ++k;
        }
    }
    enum class Move { none, add, remove, swap };
    while (true) {
        Move move = Move::none;
        int move_out = -1, move_in = -1;
        double best_gain = kMinImprovement;
        // single-node moves, lowest index first
        for (int v = 0; v < m; ++v) {
            double gain;
            if (in[static_cast<std::size_t>(v)]) {
                gain = -(2.0 * s(v) - d(v, v)) + eta * (2.0 * k - 1.0);
            } else {
                gain = 2.0 * s(v) + d(v, v) - eta * (2.0 * k + 1.0);
            }
            if (gain > best_gain) {
                best_gain = gain;
                move = in[static_cast<std::size_t>(v)] ? Move::remove : Move::add;
                move_out = move == Move::remove ? v : -1;
                move_in = move == Move::add ? v : -1;
            }
        }
        // swaps, ordered by (removed, added)
        for (int u = 0; u < m; ++u) {
            if (!in[static_cast<std::size_t>(u)]) {
                continue;
            }
            const double loss = 2.0 * s(u) - d(u, u);
            for (int v = 0; v < m; ++v) {
                if (in[static_cast<std::size_t>(v)]) {
                    continue;
                }
                const double gain = -loss + 2.0 * (s(v) - d(v, u)) + d(v, v);
                if (gain > best_gain) {
                    best_gain = gain;
                    move = Move::swap;
                    move_out = u;
                    move_in = v;
                }
            }
        }
        if (move == Move::none) {
            return;
        }
        if (move_out >= 0) {
            in[static_cast<std::size_t>(move_out)] = 0;
            s -= d.col(move_out);
            --k;
        }
        if (move_in >= 0) {
            in[static_cast<std::size_t>(move_in)] = 1;
            s += d.col(move_in);
            ++k;
        }
    }
}

}  // namespace

Matrix contrast_matrix(const Matrix& g_a, const Matrix& g_b) {
    if (g_a.rows() != g_b.rows() || g_a.cols() != g_b.cols() || g_a.rows() != g_a.cols()) {
        throw DimensionMismatch("contrast_matrix needs two square templates of equal size");
    }
    Matrix d = g_a - g_b;
    d.diagonal().setZero();
    return d;
}

double subgraph_score(const Matrix& d, const std::vector<int>& nodes, double eta) {
    check_nodes(nodes, d.rows());
    return score_unchecked(d, nodes, eta);
}

bool better_selection(double score_a, const std::vector<int>& a, double score_b, const std::vector<int>& b) {
    if (score_a != score_b) {
        return score_a > score_b;
    }
    if (a.size() != b.size()) {
        return a.size() < b.size();
    }
    return a < b;
}

std::vector<int> local_search(const ContrastProblem& problem, int restarts, std::uint64_t seed) {
    if (restarts < 1) {
        throw UsageError("local_search needs at least one restart");
    }
    const Matrix& d = problem.d;
    const auto m = static_cast<std::size_t>(d.rows());
    std::mt19937_64 gen(seed);
    std::vector<int> best;
    double best_score = 0.0;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        std::vector<char> in(m);
        for (auto& bit : in) {
            bit = static_cast<char>(gen() >> 63);
        }
        climb(d, problem.eta, in);
        std::vector<int> nodes = members(in);
        const double score = score_unchecked(d, nodes, problem.eta);
        if (!have_best || better_selection(score, nodes, best_score, best)) {
            best = std::move(nodes);
            best_score = score;
            have_best = true;
        }
    }
    return best;
}

std::vector<int> brute_force(const ContrastProblem& problem) {
    const Eigen::Index m = problem.d.rows();
    if (m > 20) {
        throw TooLarge("brute_force supports at most 20 ROIs, got " + std::to_string(m));
    }
    std::vector<int> best;
    double best_score = 0.0;  // empty set
    std::vector<int> nodes;
    const std::uint32_t total = 1u << m;
    for (std::uint32_t mask = 1; mask < total; ++mask) {
        nodes.clear();
        for (int v = 0; v < m; ++v) {
            if (mask & (1u << v)) {
                nodes.push_back(v);
            }
        }
        const double score = score_unchecked(problem.d, nodes, problem.eta);
        if (better_selection(score, nodes, best_score, best)) {
            best = nodes;
            best_score = score;
        }
    }
    return best;
}

ContrastSubgraph extract_subgraph(const std::vector<int>& nodes, const Matrix& g_a, const Matrix& g_b, double tau,
                                  double eta) {
    const Matrix d = contrast_matrix(g_a, g_b);
    check_nodes(nodes, d.rows());
    ContrastSubgraph out;
    out.nodes = nodes;
    std::sort(out.nodes.begin(), out.nodes.end());
    out.eta = eta;
    for (std::size_t a = 0; a < out.nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < out.nodes.size(); ++b) {
            const int i = out.nodes[a];
            const int j = out.nodes[b];
            const double w = std::abs(g_a(i, j) - g_b(i, j));
            if (w > tau) {
                out.edges.push_back({i, j, w});
            }
        }
    }
    out.score = score_unchecked(d, out.nodes, eta);
    return out;
}

}  // namespace tmplgraph
