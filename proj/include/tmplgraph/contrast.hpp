/**
 * @file contrast.hpp
 * @brief Contrast subgraph between two group templates.
 *
 * A node set S is scored by
 *
 *   score(S) = sum_{i,j in S} d(i,j) - eta |S|^2,     d = G_a - G_b (zero diagonal)
 *
 * and maximized, so S collects ROIs that are jointly more connected in group a
 * than in group b. Swapping the templates gives the opposite contrast.
 */
#pragma once

#include "tmplgraph/connectivity.hpp"

#include <cstdint>
#include <tuple>
#include <vector>

namespace tmplgraph {

struct ContrastProblem {
    Matrix d;
    double eta = 0.02;
    int group_a = 0;  ///< dense side
    int group_b = 1;
};

struct ContrastEdge {
    int i;
    int j;
    double weight;  ///< |G_a(i,j) - G_b(i,j)|
};

struct ContrastSubgraph {
    std::vector<int> nodes;  ///< sorted
    std::vector<ContrastEdge> edges;
    double score = 0.0;
    double eta = 0.0;
};

/// g_a - g_b with the diagonal forced to 0.
Matrix contrast_matrix(const Matrix& g_a, const Matrix& g_b);

/// Throws IndexOutOfRange for bad or duplicate indices.
double subgraph_score(const Matrix& d, const std::vector<int>& nodes, double eta);

/// Multi-start 1-move local search (add / remove / swap). Each restart begins
/// from a seeded random subset and takes the best strictly improving move until
/// none is left. The best final set over restarts is returned.
std::vector<int> local_search(const ContrastProblem& problem, int restarts, std::uint64_t seed);

/// Exhaustive maximizer over all 2^M subsets. Throws TooLarge when M > 20.
std::vector<int> brute_force(const ContrastProblem& problem);

/// Moves are accepted only when they raise the score by more than this.
inline constexpr double kMinImprovement = 1e-12;

/// Edges (i<j) between selected nodes with |g_a - g_b| > tau.
ContrastSubgraph extract_subgraph(const std::vector<int>& nodes, const Matrix& g_a, const Matrix& g_b,
                                  double tau, double eta);

/// (score desc, size asc, lexicographic asc) ordering used to break ties.
bool better_selection(double score_a, const std::vector<int>& a, double score_b, const std::vector<int>& b);

}  // namespace tmplgraph
