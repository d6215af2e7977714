#pragma once

#include "tmplgraph/dataset.hpp"
#include "tmplgraph/network.hpp"
#include "tmplgraph/templates.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tmplgraph {

struct EpochRecord {
    double train_loss = 0.0;                     ///< mean over the epoch's samples
    std::optional<double> validation_accuracy;   ///< absent when there is no validation slice
};

struct TrainedModel {
    NetworkParameters params;
    std::string templates_fingerprint;
    std::vector<EpochRecord> training_history;
    NetworkHyperParams hyper;
    int best_epoch = 0;  ///< 1-based epoch whose parameters were kept
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// 64-bit FNV-1a over the template shapes and entries, as 16 hex digits.
std::string templates_fingerprint(const TemplateSet& templates);

/// Mini-batch SGD with momentum on the template-augmented inputs. Batches are
/// drawn from a seeded shuffle of split.train; gradients are averaged in batch
/// order. Keeps the parameters of the epoch with the best validation accuracy
/// (ties go to the later epoch; without a validation slice, the last epoch).
/// Throws NonFinite if the loss stops being finite.
TrainedModel train(const LabeledDataset& data, const TemplateSet& templates, const NetworkHyperParams& hyper,
                   const SplitIndices& split);

Vector predict_proba(const TrainedModel& model, const ConnectivityMatrix& w, const TemplateSet& templates);

/// Index of the largest entry; ties go to the lowest index.
int argmax(const Vector& v);

}  // namespace tmplgraph
