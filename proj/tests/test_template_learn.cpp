#include "oracles.hpp"

#include "tmplgraph/errors.hpp"
#include "tmplgraph/synth.hpp"
#include "tmplgraph/templates.hpp"

#include <gtest/gtest.h>

using namespace tmplgraph;

namespace {

LabeledDataset make_dataset(const std::vector<Matrix>& mats, const std::vector<int>& labels, int groups) {
    std::vector<Subject> subjects;
    for (std::size_t k = 0; k < mats.size(); ++k) {
        subjects.push_back({"s" + std::to_string(k), ConnectivityMatrix{mats[k]}, labels[k]});
    }
    return LabeledDataset(std::move(subjects), groups);
}

LabeledDataset random_dataset(std::uint64_t seed, int m, int per_group, int groups) {
    std::mt19937_64 gen(seed);
    std::vector<Matrix> mats;
    std::vector<int> labels;
    for (int c = 0; c < groups; ++c)
        for (int k = 0; k < per_group; ++k) {
            mats.push_back(oracle::random_symmetric(gen, m, -1, 1, 1));
            labels.push_back(c);
        }
    return make_dataset(mats, labels, groups);
}

std::vector<std::vector<Matrix>> by_group(const LabeledDataset& d) {
    std::vector<std::vector<Matrix>> out(static_cast<std::size_t>(d.num_groups()));
    for (const auto& s : d.subjects()) out[static_cast<std::size_t>(s.label)].push_back(s.matrix.weights);
    return out;
}

/// J at fixed weights, summed entry by entry.
double direct_objective(const std::vector<Matrix>& g, const LabeledDataset& d, const WeightTable& w,
                        const TemplateHyperParams& h) {
    const auto groups = by_group(d);
    const int m = static_cast<int>(g[0].rows());
    double total = 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        for (std::size_t k = 0; k < groups[c].size(); ++k) {
            double sq = 0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) sq += std::pow(g[c](i, j) - groups[c][k](i, j), 2);
            total += w.alpha[c][k] * sq;
        }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) total += h.lambda1 * std::abs(g[c](i, j));
    }
    for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = 0; b < g.size(); ++b)
            if (a != b)
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        total += h.lambda2 * oracle::hinge(g[a](i, j), g[b](i, j), h.gamma, h.hinge_direction);
    return total;
}

}  // namespace

// ============================================================================
// scalar pieces
// ============================================================================

TEST(AdaptiveWeight, FloorAndClosedForms) {
    const Matrix w = Matrix::Identity(3, 3);
    EXPECT_NEAR(adaptive_weight(w, ConnectivityMatrix{w}, 1e-8), 1e4, 1e-6);
    Matrix g = w;
    g(0, 1) = 1.0;
    EXPECT_DOUBLE_EQ(adaptive_weight(g, ConnectivityMatrix{w}, 1e-8), 1.0);
    g(0, 1) = g(1, 0) = std::sqrt(8.0);
    EXPECT_NEAR(adaptive_weight(g, ConnectivityMatrix{w}, 1e-8), 0.5, 1e-15);
}

TEST(HingePenalty, Examples) {
    EXPECT_DOUBLE_EQ(hinge_penalty(0.3, 0.2, 0.1, HingeDirection::literal), 0.0);
    EXPECT_NEAR(hinge_penalty(0.3, 0.2, 0.1, HingeDirection::separation), 0.0, 1e-15);
    EXPECT_NEAR(hinge_penalty(0.5, 0.2, 0.1, HingeDirection::literal), 0.2, 1e-15);
    EXPECT_NEAR(hinge_penalty(0.5, 0.45, 0.1, HingeDirection::separation), 0.05, 1e-15);
}

TEST(HingeDirectionNames, RoundTrip) {
    for (auto d : {HingeDirection::literal, HingeDirection::separation}) {
        EXPECT_EQ(parse_hinge_direction(to_string(d)), d);
    }
    EXPECT_THROW(parse_hinge_direction("sideways"), UsageError);
}

// ============================================================================
// objective / induced_objective
// ============================================================================

TEST(Objective, ZeroWhenTemplateIsTheSubject) {
    std::mt19937_64 gen(1);
    const Matrix w = oracle::random_symmetric(gen, 4, -1, 1, 1);
    const auto d = make_dataset({w}, {0}, 1);
    TemplateHyperParams h;
    h.lambda1 = h.lambda2 = 0;
    const std::vector<Matrix> g{w};
    EXPECT_DOUBLE_EQ(objective(g, d, compute_weights(g, d, h.epsilon), h), 0.0);
    EXPECT_DOUBLE_EQ(induced_objective(g, d, h), 0.0);
}

TEST(Objective, HingeBoundaryContributesNothing) {
    Matrix a(1, 1), b(1, 1);
    a << 0.30;
    b << 0.25;
    const auto d = make_dataset({a, b}, {0, 1}, 2);
    TemplateHyperParams h;
    h.lambda1 = 0;
    h.lambda2 = 1.0;
    h.gamma = 0.05;
    const std::vector<Matrix> g{a, b};
    // residuals are zero, so only the inter term could be nonzero
    EXPECT_NEAR(objective(g, d, compute_weights(g, d, h.epsilon), h), 0.0, 1e-15);
}

TEST(Objective, MatchesDirectSummation) {
    const auto d = random_dataset(3, 3, 4, 2);
    std::mt19937_64 gen(33);
    const std::vector<Matrix> g{oracle::random_symmetric(gen, 3, -1, 1, 1), oracle::random_symmetric(gen, 3, -1, 1, 1)};
    for (auto dir : {HingeDirection::literal, HingeDirection::separation}) {
        TemplateHyperParams h;
        h.lambda2 = 0.3;
        h.gamma = 0.4;
        h.hinge_direction = dir;
        const WeightTable w = compute_weights(g, d, h.epsilon);
        EXPECT_NEAR(objective(g, d, w, h), direct_objective(g, d, w, h), 1e-10);
    }
}

TEST(InducedObjective, UnitResidualGivesFourThirds) {
    Matrix w = Matrix::Identity(2, 2), g = w;
    g(0, 1) = 1.0;  // ||g - w||_F = 1
    TemplateHyperParams h;
    h.lambda1 = h.lambda2 = 0;
    EXPECT_NEAR(induced_objective(std::vector<Matrix>{g}, make_dataset({w}, {0}, 1), h), 4.0 / 3.0, 1e-15);
}

TEST(InducedObjective, MatchesDirectSummation) {
    const auto d = random_dataset(5, 5, 3, 2);
    std::mt19937_64 gen(55);
    const std::vector<Matrix> g{oracle::random_symmetric(gen, 5, -1, 1, 1), oracle::random_symmetric(gen, 5, -1, 1, 1)};
    TemplateHyperParams h;
    h.lambda2 = 0.2;
    EXPECT_NEAR(induced_objective(g, d, h), oracle::induced_objective(g, by_group(d), h), 1e-10);
}

// ============================================================================
// solve_entry
// ============================================================================

TEST(SolveEntry, LeastSquaresWithoutPenalties) {
    const std::vector<EntryTarget> t{{0.5, 1.0}};
    EXPECT_DOUBLE_EQ(solve_entry(t, 0, 0, {}, HingeDirection::separation), 0.5);
}

TEST(SolveEntry, SoftThresholdToZero) {
    const std::vector<EntryTarget> t{{0.3, 1.0}};
    EXPECT_DOUBLE_EQ(solve_entry(t, 0.6, 0, {}, HingeDirection::separation), 0.0);
}

TEST(SolveEntry, SoftThresholdShrinks) {
    const std::vector<EntryTarget> t{{0.5, 2.0}};
    EXPECT_NEAR(solve_entry(t, 0.4, 0, {}, HingeDirection::separation), 0.4, 1e-15);
}

TEST(SolveEntry, MatchesGridWithHinge) {
    const std::vector<EntryTarget> t{{0.5, 1.0}};
    const std::vector<HingeTerm> hinge{{0.2, 0.1}};
    const double x = solve_entry(t, 0.1, 0.3, hinge, HingeDirection::separation);
    const auto f = [&](double v) { return oracle::entry_objective(v, t, 0.1, 0.3, hinge, HingeDirection::separation); };
    // brute-force argmin on the same grid
    double best_x = -3, best_f = f(-3);
    for (long k = 1; k <= 600000; ++k) {
        const double v = -3 + static_cast<double>(k) * 1e-5;
        if (f(v) < best_f) {
            best_f = f(v);
            best_x = v;
        }
    }
    EXPECT_NEAR(x, best_x, 1e-4);
    EXPECT_LE(f(x), best_f + 1e-8);
}

TEST(SolveEntry, RandomInstancesBeatGrid) {
    std::mt19937_64 gen(77);
    for (int inst = 0; inst < 200; ++inst) {
        std::vector<EntryTarget> t(1 + gen() % 4);
        for (auto& e : t) e = {oracle::uniform(gen, -1, 1), oracle::uniform(gen, 0.1, 2)};
        std::vector<HingeTerm> hinge(gen() % 3);
        for (auto& e : hinge) e = {oracle::uniform(gen, -1, 1), oracle::uniform(gen, 0, 0.3)};
        const double l1 = oracle::uniform(gen, 0, 0.5), l2 = oracle::uniform(gen, 0, 0.5);
        const auto dir = inst % 2 ? HingeDirection::literal : HingeDirection::separation;
        const double x = solve_entry(t, l1, l2, hinge, dir);
        const auto f = [&](double v) { return oracle::entry_objective(v, t, l1, l2, hinge, dir); };
        EXPECT_LE(f(x), oracle::grid_min(f, -3, 3, 1e-4) + 1e-8) << inst;
        EXPECT_NEAR(entry_objective(x, t, l1, l2, hinge, dir), f(x), 1e-12);
    }
}

TEST(SolveEntry, EmptyTargetsThrow) {
    EXPECT_THROW(solve_entry({}, 0.1, 0, {}, HingeDirection::separation), EmptyTargets);
}

// ============================================================================
// update_template
// ============================================================================

TEST(UpdateTemplate, UnpenalizedEqualWeightsGiveGroupMean) {
    const auto d = random_dataset(8, 5, 4, 1);
    TemplateHyperParams h;
    h.lambda1 = h.lambda2 = 0;
    const std::vector<Matrix> g{Matrix::Identity(5, 5)};
    WeightTable w;
    w.alpha = {{0.7, 0.7, 0.7, 0.7}};
    const Matrix u = update_template(0, g, d, w, h);
    Matrix mean = Matrix::Zero(5, 5);
    for (const auto& s : d.subjects()) mean += s.matrix.weights / 4.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) EXPECT_NEAR(u(i, j), i == j ? 1.0 : mean(i, j), 1e-14);
}

TEST(UpdateTemplate, LargeLambda1ZeroesOffDiagonal) {
    const auto d = random_dataset(9, 4, 3, 1);
    const std::vector<Matrix> g = initial_templates(d);
    const WeightTable w = compute_weights(g, d, 1e-8);
    double sum_alpha = 0;
    for (double a : w.alpha[0]) sum_alpha += a;
    TemplateHyperParams h;
    h.lambda1 = 2 * sum_alpha * 1.0;
    const Matrix u = update_template(0, g, d, w, h);
    EXPECT_EQ(u, Matrix::Identity(4, 4));
}

TEST(UpdateTemplate, EveryEntryMinimizesItsScalarProblem) {
    const auto d = random_dataset(10, 4, 3, 2);
    for (auto dir : {HingeDirection::literal, HingeDirection::separation}) {
        TemplateHyperParams h;
        h.lambda2 = 0.4;
        h.gamma = 0.3;
        h.hinge_direction = dir;
        const std::vector<Matrix> g = initial_templates(d);
        const WeightTable w = compute_weights(g, d, h.epsilon);
        const auto groups = by_group(d);
        for (int c = 0; c < 2; ++c) {
            const Matrix u = update_template(c, g, d, w, h);
            EXPECT_EQ(u, u.transpose());
            for (int i = 0; i < 4; ++i) {
                EXPECT_EQ(u(i, i), 1.0);
                for (int j = i + 1; j < 4; ++j) {
                    // entries (i,j) and (j,i) share a value; J restricted to it is twice this
                    std::vector<EntryTarget> t;
                    for (std::size_t k = 0; k < groups[c].size(); ++k) t.push_back({groups[c][k](i, j), w.alpha[c][k]});
                    const std::vector<HingeTerm> hinge{{g[1 - c](i, j), h.gamma}, {g[1 - c](i, j), h.gamma}};
                    const auto f = [&](double v) { return oracle::entry_objective(v, t, h.lambda1, h.lambda2, hinge, dir); };
                    EXPECT_LE(f(u(i, j)), oracle::grid_min(f, -3, 3, 1e-5) + 1e-8) << c << " " << i << "," << j;
                }
            }
        }
    }
}

TEST(UpdateTemplate, NeverIncreasesObjectiveAtFixedWeights) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto d = random_dataset(seed, 6, 4, 3);
        TemplateHyperParams h;
        h.lambda2 = 0.2;
        h.gamma = 0.2;
        std::vector<Matrix> g = initial_templates(d);
        const WeightTable w = compute_weights(g, d, h.epsilon);
        for (int c = 0; c < 3; ++c) {
            const double before = objective(g, d, w, h);
            g[static_cast<std::size_t>(c)] = update_template(c, g, d, w, h);
            EXPECT_LE(objective(g, d, w, h), before * (1 + 1e-12)) << seed << " group " << c;
        }
    }
}

// ============================================================================
// fit_templates
// ============================================================================

TEST(FitTemplates, SingleSubjectIsAFixedPoint) {
    std::mt19937_64 gen(4);
    const Matrix w = oracle::random_symmetric(gen, 5, -1, 1, 1);
    TemplateHyperParams h;
    h.lambda1 = 0;
    const TemplateSet t = fit_templates(make_dataset({w}, {0}, 1), h);
    EXPECT_TRUE(t.converged);
    EXPECT_EQ(t.iterations_run, 1);
    EXPECT_LE((t.templates[0] - w).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FitTemplates, TraceIsNonIncreasingAndSymmetric) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        for (auto dir : {HingeDirection::literal, HingeDirection::separation}) {
            SynthSpec spec;
            spec.seed = seed;
            spec.groups = 3;
            spec.effect_size = 0.4;
            const auto syn = synth_generate(spec);
            TemplateHyperParams h;
            h.hinge_direction = dir;
            h.lambda2 = 0.05;
            const TemplateSet t = fit_templates(syn.data, h);
            ASSERT_EQ(t.objective_trace.size(), static_cast<std::size_t>(t.iterations_run) + 1);
            for (std::size_t k = 1; k < t.objective_trace.size(); ++k) {
                EXPECT_LE(t.objective_trace[k], t.objective_trace[k - 1] * (1 + 1e-8)) << seed << " step " << k;
            }
            for (const auto& g : t.templates) {
                EXPECT_EQ(g, g.transpose());
                EXPECT_TRUE((g.diagonal().array() == 1.0).all());
            }
        }
    }
}

TEST(FitTemplates, IterationCapReportsNonConvergence) {
    SynthSpec spec;
    spec.seed = 2;
    TemplateHyperParams h;
    h.max_iter = 1;
    h.tol = 1e-300;
    const TemplateSet t = fit_templates(synth_generate(spec).data, h);
    EXPECT_FALSE(t.converged);
    EXPECT_EQ(t.iterations_run, 1);
}

TEST(FitTemplates, SparsityIsMonotoneInLambda1) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        SynthSpec spec;
        spec.seed = seed;
        const auto data = synth_generate(spec).data;
        std::size_t previous = std::numeric_limits<std::size_t>::max();
        for (double l1 : {0.0, 0.05, 0.1, 0.2}) {
            TemplateHyperParams h;
            h.lambda1 = l1;
            h.lambda2 = 0;
            const TemplateSet t = fit_templates(data, h);
            std::size_t nz = 0;
            for (const auto& g : t.templates) nz += nonzero_edges(g).size();
            EXPECT_LE(nz, previous) << "seed " << seed << " lambda1 " << l1;
            previous = nz;
        }
    }
}

TEST(FitTemplates, RecoversDifferentiatedSupport) {
    SynthSpec spec;
    spec.seed = 7;
    const auto syn = synth_generate(spec);
    const TemplateSet t = fit_templates(syn.data, TemplateHyperParams{});
    const auto found = differentiated_edges(t.templates, spec.effect_size / 2);
    EXPECT_GE(oracle::precision_recall_f1(found, syn.differentiated_support), 0.9);
}

// At lambda1 = 0.1 the soft threshold is far below the noise in the group
// means, so nonzero support only matches the planted base at a stronger penalty.
TEST(FitTemplates, RecoversNonzeroSupportUnderStrongerSparsity) {
    SynthSpec spec;
    spec.seed = 7;
    const auto syn = synth_generate(spec);
    TemplateHyperParams h;
    h.lambda1 = 1.5;
    const TemplateSet t = fit_templates(syn.data, h);
    for (const auto& g : t.templates) {
        EXPECT_GE(oracle::precision_recall_f1(nonzero_edges(g), syn.base_support), 0.9);
    }
}

TEST(FitTemplates, SubjectsScoreHighestAgainstTheirOwnGroup) {
    SynthSpec spec;
    spec.seed = 7;
    const auto syn = synth_generate(spec);
    const TemplateSet t = fit_templates(syn.data, TemplateHyperParams{});
    int hits = 0;
    for (const auto& s : syn.data.subjects()) {
        const auto scores = similarity_scores(s.matrix, t);
        hits += std::max_element(scores.begin(), scores.end()) - scores.begin() == s.label;
    }
    EXPECT_GE(hits, static_cast<int>(0.9 * static_cast<double>(syn.data.size())));
}

TEST(FitTemplates, RejectsInvalidHyperparameters) {
    TemplateHyperParams h;
    h.lambda1 = -1;
    EXPECT_THROW(fit_templates(random_dataset(1, 3, 2, 2), h), UsageError);
}

// ============================================================================
// similarity_scores / support metrics
// ============================================================================

TEST(SimilarityScores, DisjointSupportScoresZero) {
    Matrix w = Matrix::Identity(3, 3), g = Matrix::Identity(3, 3);
    w(0, 1) = w(1, 0) = 0.7;
    g(1, 2) = g(2, 1) = 0.4;
    TemplateSet t;
    t.templates = {g};
    EXPECT_DOUBLE_EQ(similarity_scores(ConnectivityMatrix{w}, t)[0], 0.0);
}

TEST(SimilarityScores, BinaryTemplateCountsItsEdges) {
    Matrix g = Matrix::Identity(4, 4);
    g(0, 1) = g(1, 0) = g(2, 3) = g(3, 2) = g(0, 3) = g(3, 0) = 1;
    TemplateSet t;
    t.templates = {g};
    EXPECT_DOUBLE_EQ(similarity_scores(ConnectivityMatrix{g}, t)[0], 6.0);
}

TEST(SimilarityScores, MatchesDoubleSum) {
    std::mt19937_64 gen(6);
    const Matrix w = oracle::random_symmetric(gen, 7, -1, 1, 1);
    TemplateSet t;
    t.templates = {oracle::random_symmetric(gen, 7, -1, 1, 1), oracle::random_symmetric(gen, 7, -1, 1, 1)};
    const auto s = similarity_scores(ConnectivityMatrix{w}, t);
    for (std::size_t c = 0; c < 2; ++c) {
        double direct = 0;
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j)
                if (i != j) direct += w(i, j) * t.templates[c](i, j);
        EXPECT_NEAR(s[c], direct, 1e-12);
    }
}

TEST(SupportF1, PrecisionRecallArithmetic) {
    const std::vector<Edge> truth{{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    const std::vector<Edge> pred{{0, 1}, {0, 2}, {1, 2}};
    const auto s = support_f1(pred, truth);
    EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.recall, 0.5);
    EXPECT_NEAR(s.f1, oracle::precision_recall_f1(pred, truth), 1e-15);
}
