#include "tmplgraph/evaluation.hpp"

#include "tmplgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tmplgraph {

SplitIndices split(const LabeledDataset& data, const SplitFractions& f, std::uint64_t seed) {
    if (!(f.train > 0.0 && f.validation > 0.0 && f.test > 0.0) ||
        std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) {
        throw UsageError("split fractions must be positive and sum to 1");
    }
    SplitIndices out;
    std::mt19937_64 gen(seed);
    for (int c = 0; c < data.num_groups(); ++c) {
        std::vector<std::size_t> idx = data.group(c);
        if (idx.size() < 3) {
            throw GroupTooSmall("group " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                                " subjects; splitting needs at least 3");
        }
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::swap(idx[i - 1], idx[static_cast<std::size_t>(gen() % i)]);
        }
        const double n = static_cast<double>(idx.size());
        // the 1e-9 nudge keeps products like 0.7 * 30 from flooring to 20
        const auto n_train = static_cast<std::size_t>(std::floor(f.train * n + 1e-9));
        const auto n_val = static_cast<std::size_t>(std::floor(f.validation * n + 1e-9));
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.validation.insert(out.validation.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                              idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

double auc_binary(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() || neg.empty()) {
        throw SingleClassSlice("AUC needs both positive and negative samples");
    }
    // sort-based count: for each positive, negatives strictly below plus half the ties
    std::vector<double> sorted_neg = neg;
    std::sort(sorted_neg.begin(), sorted_neg.end());
    double wins = 0.0;
    for (double p : pos) {
        const auto lo = std::lower_bound(sorted_neg.begin(), sorted_neg.end(), p);
        const auto hi = std::upper_bound(sorted_neg.begin(), sorted_neg.end(), p);
        wins += static_cast<double>(lo - sorted_neg.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

EvalReport evaluate_probabilities(const std::vector<Vector>& probs, const std::vector<int>& labels, int num_classes) {
    if (probs.size() != labels.size()) {
        throw DimensionMismatch("one probability vector per label expected");
    }
    EvalReport r;
    r.per_class_counts.assign(static_cast<std::size_t>(num_classes), 0);
    r.per_class_correct.assign(static_cast<std::size_t>(num_classes), 0);
    r.total = labels.size();
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const int y = labels[k];
        if (y < 0 || y >= num_classes) {
            throw IndexOutOfRange("label " + std::to_string(y) + " out of range");
        }
        ++r.per_class_counts[static_cast<std::size_t>(y)];
        if (argmax(probs[k]) == y) {
            ++r.correct;
            ++r.per_class_correct[static_cast<std::size_t>(y)];
        }
    }
    r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;

    auto one_vs_rest = [&](int positive) -> std::optional<double> {
        std::vector<double> pos, neg;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            (labels[k] == positive ? pos : neg).push_back(probs[k](positive));
        }
        if (pos.empty() || neg.empty()) {
            return std::nullopt;
        }
        return auc_binary(pos, neg);
    };
    if (num_classes == 2) {
        r.auc = one_vs_rest(1);
    } else {
        double sum = 0.0;
        int used = 0;
        for (int c = 0; c < num_classes; ++c) {
            if (const auto a = one_vs_rest(c)) {
                sum += *a;
                ++used;
            }
        }
        if (used > 0) {
            r.auc = sum / used;
        }
    }
    return r;
}

EvalReport evaluate(const TrainedModel& model, const TemplateSet& templates, const LabeledDataset& data,
                    const std::vector<std::size_t>& indices, std::uint64_t split_seed) {
    std::vector<Vector> probs;
    std::vector<int> labels;
    for (std::size_t k : indices) {
        if (k >= data.size()) {
            throw IndexOutOfRange("evaluation index " + std::to_string(k) + " out of range");
        }
        probs.push_back(predict_proba(model, data.subject(k).matrix, templates));
        labels.push_back(data.subject(k).label);
    }
    EvalReport r = evaluate_probabilities(probs, labels, data.num_groups());
    r.split_seed = split_seed;
    return r;
}

}  // namespace tmplgraph
