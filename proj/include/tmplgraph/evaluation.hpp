#pragma once

#include "tmplgraph/dataset.hpp"
#include "tmplgraph/training.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tmplgraph {

struct SplitFractions {
    double train = 0.7;
    double validation = 0.1;
    double test = 0.2;
};

/// Stratified split: within each group, shuffle by seed and cut by fractions
/// (train and validation take floors, test takes the remainder). Each list is
/// returned in ascending order. Throws GroupTooSmall for a group under 3 subjects.
SplitIndices split(const LabeledDataset& data, const SplitFractions& fractions, std::uint64_t seed);

/// Mann-Whitney AUC: P(pos > neg) + 0.5 P(pos == neg) by exact pair counting.
/// Throws SingleClassSlice when either side is empty.
double auc_binary(const std::vector<double>& positive_scores, const std::vector<double>& negative_scores);

struct EvalReport {
    double accuracy = 0.0;
    std::optional<double> auc;  ///< absent for a single-class slice
    std::vector<std::size_t> per_class_counts;
    std::vector<std::size_t> per_class_correct;
    std::size_t correct = 0;
    std::size_t total = 0;
    std::uint64_t split_seed = 0;
};

/// Accuracy from argmax of predict_proba (ties to the lowest class). AUC uses
/// the positive-class probability for C = 2 and the unweighted one-vs-rest mean
/// over classes present in the slice for C > 2.
EvalReport evaluate(const TrainedModel& model, const TemplateSet& templates, const LabeledDataset& data,
                    const std::vector<std::size_t>& indices, std::uint64_t split_seed = 0);

/// Same metrics from precomputed class probabilities (one row per subject).
EvalReport evaluate_probabilities(const std::vector<Vector>& probabilities, const std::vector<int>& labels,
                                  int num_classes);

}  // namespace tmplgraph
