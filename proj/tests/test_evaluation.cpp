#include "oracles.hpp"

#include "tmplgraph/errors.hpp"
#include "tmplgraph/evaluation.hpp"
#include "tmplgraph/synth.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace tmplgraph;

namespace {

SynthSpec spec_with(std::uint64_t seed, int per_group, int groups = 2) {
    SynthSpec s;
    s.seed = seed;
    s.subjects_per_group = per_group;
    s.groups = groups;
    return s;
}

}  // namespace

// ============================================================================
// synth_generate
// ============================================================================

TEST(SynthGenerate, NoiselessSubjectsEqualTheirTemplate) {
    SynthSpec s = spec_with(3, 4);
    s.noise_sigma = 0;
    const auto syn = synth_generate(s);
    for (const auto& subj : syn.data.subjects()) {
        EXPECT_EQ(subj.matrix.weights, syn.planted_templates[static_cast<std::size_t>(subj.label)]);
    }
}

TEST(SynthGenerate, ZeroEffectGivesIdenticalTemplates) {
    SynthSpec s = spec_with(4, 3, 3);
    s.effect_size = 0;
    const auto syn = synth_generate(s);
    EXPECT_EQ(syn.planted_templates[0], syn.planted_templates[1]);
    EXPECT_EQ(syn.planted_templates[1], syn.planted_templates[2]);
}

TEST(SynthGenerate, DifferentiatedEdgesSeparateByEffect) {
    for (int groups : {2, 3}) {
        SynthSpec s = spec_with(5, 2, groups);
        s.effect_size = 0.5;
        const auto syn = synth_generate(s);
        ASSERT_FALSE(syn.differentiated_support.empty());
        for (const auto& [i, j] : syn.differentiated_support) {
            EXPECT_NE(std::find(syn.base_support.begin(), syn.base_support.end(), Edge{i, j}), syn.base_support.end());
            for (int a = 0; a < groups; ++a)
                for (int b = a + 1; b < groups; ++b)
                    EXPECT_GE(std::abs(syn.planted_templates[a](i, j) - syn.planted_templates[b](i, j)), 0.5 - 1e-12);
        }
    }
}

TEST(SynthGenerate, SubjectsAreValidCorrelationMatrices) {
    SynthSpec s = spec_with(6, 5);
    s.noise_sigma = 0.8;
    const auto syn = synth_generate(s);
    for (const auto& subj : syn.data.subjects()) {
        EXPECT_TRUE(validate_connectivity(subj.matrix, ValidationMode::strict_correlation).ok()) << subj.id;
    }
    EXPECT_EQ(syn.data.subject(0).id, "g0_s000");
}

TEST(SynthGenerate, SeededAndSensitiveToSeed) {
    const auto a = synth_generate(spec_with(9, 3));
    const auto b = synth_generate(spec_with(9, 3));
    const auto c = synth_generate(spec_with(10, 3));
    EXPECT_EQ(a.data.subject(4).matrix.weights, b.data.subject(4).matrix.weights);
    EXPECT_NE(a.data.subject(4).matrix.weights, c.data.subject(4).matrix.weights);
}

TEST(SynthGenerate, RejectsInvalidSpecs) {
    SynthSpec s;
    s.noise_sigma = -0.1;
    EXPECT_THROW(synth_generate(s), InvalidSpec);
    s = SynthSpec{};
    s.support_density = 0;
    EXPECT_THROW(synth_generate(s), InvalidSpec);
    s = SynthSpec{};
    s.groups = 3;
    s.effect_size = 1.5;  // offsets would leave [-1, 1]
    EXPECT_THROW(synth_generate(s), InvalidSpec);
}

// ============================================================================
// split
// ============================================================================

TEST(Split, SeventyTenTwentyOnTenPerGroup) {
    const auto syn = synth_generate(spec_with(1, 10));
    const auto s = split(syn.data, SplitFractions{0.7, 0.1, 0.2}, 3);
    EXPECT_EQ(s.train.size(), 14u);
    EXPECT_EQ(s.validation.size(), 2u);
    EXPECT_EQ(s.test.size(), 4u);
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
        int group0 = 0;
        for (auto k : *part) group0 += syn.data.subject(k).label == 0;
        EXPECT_EQ(static_cast<std::size_t>(group0) * 2, part->size());
    }
}

TEST(Split, DisjointExhaustiveAndDeterministic) {
    const auto syn = synth_generate(spec_with(2, 13, 3));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = split(syn.data, SplitFractions{}, seed);
        std::multiset<std::size_t> all(s.train.begin(), s.train.end());
        all.insert(s.validation.begin(), s.validation.end());
        all.insert(s.test.begin(), s.test.end());
        ASSERT_EQ(all.size(), syn.data.size());
        for (std::size_t k = 0; k < syn.data.size(); ++k) EXPECT_EQ(all.count(k), 1u);
        const auto again = split(syn.data, SplitFractions{}, seed);
        EXPECT_EQ(again.train, s.train);
        EXPECT_EQ(again.test, s.test);
        // per-group proportions within one subject of the request
        for (int c = 0; c < 3; ++c) {
            std::size_t n = 0;
            for (auto k : s.train) n += syn.data.subject(k).label == c;
            EXPECT_LE(std::abs(static_cast<double>(n) - 0.7 * 13), 1.0);
        }
    }
}

TEST(Split, ErrorPaths) {
    const auto small = synth_generate(spec_with(1, 2));
    EXPECT_THROW(split(small.data, SplitFractions{}, 1), GroupTooSmall);
    const auto ok = synth_generate(spec_with(1, 5));
    EXPECT_THROW(split(ok.data, SplitFractions{0.7, 0.2, 0.2}, 1), UsageError);
    EXPECT_THROW(split(ok.data, SplitFractions{0.9, 0.1, 0.0}, 1), UsageError);
}

// ============================================================================
// AUC / metrics
// ============================================================================

TEST(AucBinary, Examples) {
    EXPECT_EQ(auc_binary({0.9, 0.8}, {0.1, 0.2}), 1.0);
    EXPECT_EQ(auc_binary({0.3, 0.3}, {0.3, 0.3, 0.3}), 0.5);
    EXPECT_EQ(auc_binary({0.1}, {0.9}), 0.0);
    EXPECT_THROW(auc_binary({}, {0.5}), SingleClassSlice);
}

TEST(AucBinary, MatchesPairCountOnThirtySubjects) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 gen(seed);
        std::vector<double> pos, neg;
        for (int k = 0; k < 30; ++k) {
            const double score = std::round(oracle::uniform(gen, 0, 1) * 10) / 10;
            ((gen() >> 63) ? pos : neg).push_back(score);
        }
        if (pos.empty() || neg.empty()) continue;
        const double auc = auc_binary(pos, neg);
        EXPECT_EQ(auc, oracle::auc_pairs(pos, neg));
        EXPECT_GE(auc, 0.0);
        EXPECT_LE(auc, 1.0);
        // swapping the classes complements the statistic
        EXPECT_NEAR(auc_binary(neg, pos), 1.0 - auc, 1e-15);
    }
}

TEST(EvaluateProbabilities, CountsAndBinaryAuc) {
    auto row = [](double p1) {
        Vector v(2);
        v << 1 - p1, p1;
        return v;
    };
    const std::vector<Vector> probs{row(0.9), row(0.2), row(0.6), row(0.4), row(0.5)};
    const std::vector<int> labels{1, 0, 0, 1, 1};
    const auto r = evaluate_probabilities(probs, labels, 2);
    // predictions: 1, 0, 1, 0, 0 (0.5 tie goes to class 0)
    EXPECT_EQ(r.correct, 2u);
    EXPECT_EQ(r.total, 5u);
    EXPECT_DOUBLE_EQ(r.accuracy, 2.0 / 5.0);
    EXPECT_EQ(r.per_class_counts, (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(r.per_class_correct, (std::vector<std::size_t>{1, 1}));
    ASSERT_TRUE(r.auc);
    EXPECT_EQ(*r.auc, oracle::auc_pairs({0.9, 0.4, 0.5}, {0.2, 0.6}));
}

TEST(EvaluateProbabilities, MultiClassAveragesOneVsRest) {
    std::mt19937_64 gen(4);
    std::vector<Vector> probs;
    std::vector<int> labels;
    for (int k = 0; k < 24; ++k) {
        Vector v(3);
        for (int c = 0; c < 3; ++c) v(c) = oracle::uniform(gen, 0.1, 1);
        probs.push_back(v / v.sum());
        labels.push_back(k % 3);
    }
    const auto r = evaluate_probabilities(probs, labels, 3);
    double mean = 0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> pos, neg;
        for (std::size_t k = 0; k < probs.size(); ++k) (labels[k] == c ? pos : neg).push_back(probs[k](c));
        mean += oracle::auc_pairs(pos, neg) / 3;
    }
    ASSERT_TRUE(r.auc);
    EXPECT_NEAR(*r.auc, mean, 1e-15);
}

TEST(EvaluateProbabilities, SingleClassSliceHasNoAuc) {
    Vector v(2);
    v << 0.3, 0.7;
    const auto r = evaluate_probabilities({v, v}, {1, 1}, 2);
    EXPECT_FALSE(r.auc);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}
