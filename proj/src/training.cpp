#include "tmplgraph/training.hpp"

#include "tmplgraph/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>

namespace tmplgraph {

namespace {

void check_split(const SplitIndices& split, std::size_t n) {
    std::set<std::size_t> seen;
    for (const auto* list : {&split.train, &split.validation, &split.test}) {
        for (std::size_t k : *list) {
            if (k >= n) {
                throw IndexOutOfRange("split index " + std::to_string(k) + " out of range");
            }
            if (!seen.insert(k).second) {
                throw DataError("split index " + std::to_string(k) + " appears twice");
            }
        }
    }
    if (split.train.empty()) {
        throw DataError("training split is empty");
    }
}

double accuracy(const NetworkParameters& params, const std::vector<Matrix>& inputs, const LabeledDataset& data,
                const std::vector<std::size_t>& indices, double slope) {
    std::size_t correct = 0;
    for (std::size_t k : indices) {
        if (argmax(infer(params, inputs[k], slope)) == data.subject(k).label) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(indices.size());
}

}  // namespace

std::string templates_fingerprint(const TemplateSet& templates) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    const std::int64_t groups = templates.num_groups();
    const std::int64_t rois = templates.num_rois();
    mix(&groups, sizeof groups);
    mix(&rois, sizeof rois);
    for (const Matrix& g : templates.templates) {
        // column-major walk; the matrices are symmetric so the order is immaterial for equality
        mix(g.data(), static_cast<std::size_t>(g.size()) * sizeof(double));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int argmax(const Vector& v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

TrainedModel train(const LabeledDataset& data, const TemplateSet& templates, const NetworkHyperParams& hyper,
                   const SplitIndices& split) {
    hyper.validate();
    check_split(split, data.size());
    if (templates.num_groups() != data.num_groups() || templates.num_rois() != data.num_rois()) {
        throw DimensionMismatch("templates do not match the dataset");
    }

    const GlobalTemplate global = global_template(templates);
    std::vector<Matrix> inputs;
    inputs.reserve(data.size());
    for (const auto& s : data.subjects()) {
        inputs.push_back(augment(s.matrix, global));
    }

    TrainedModel model;
    model.hyper = hyper;
    model.templates_fingerprint = templates_fingerprint(templates);
    model.params = init_network(static_cast<int>(data.num_rois()), data.num_groups(), hyper);

    NetworkParameters velocity = model.params.zeros_like();
    NetworkParameters best = model.params;
    double best_acc = -1.0;
    std::mt19937_64 shuffler(hyper.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order = split.train;
    const double slope = hyper.leaky_slope;

    for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
        // Fisher-Yates with explicit draws so the order is library-independent
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffler() % i)]);
        }
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
            NetworkParameters batch_grad = model.params.zeros_like();
            auto acc = tensors(batch_grad);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t k = order[b];
                const int label = data.subject(k).label;
                const ForwardResult fr = forward(model.params, inputs[k], slope);
                const double loss = cross_entropy(fr.logits, label);
                if (!std::isfinite(loss)) {
                    throw NonFinite("training loss is not finite at epoch " + std::to_string(epoch) +
                                    " (subject " + data.subject(k).id + ")");
                }
                loss_sum += loss;
                const NetworkParameters g = backward(model.params, fr.cache, label, slope);
                const auto gt = tensors(g);
                for (std::size_t t = 0; t < acc.size(); ++t) {
                    for (std::size_t i = 0; i < acc[t].data.size(); ++i) {
                        acc[t].data[i] += gt[t].data[i];
                    }
                }
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            for (auto& t : acc) {
                for (double& v : t.data) {
                    v *= scale;
                }
            }
            sgd_step(model.params, batch_grad, velocity, hyper.learning_rate, hyper.momentum);
        }

        EpochRecord rec;
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        if (!split.validation.empty()) {
            rec.validation_accuracy = accuracy(model.params, inputs, data, split.validation, slope);
        }
        const double sel = rec.validation_accuracy.value_or(0.0);
        if (sel >= best_acc) {
            best_acc = sel;
            best = model.params;
            model.best_epoch = epoch;
        }
        model.training_history.push_back(rec);
    }
    model.params = std::move(best);
    return model;
}

Vector predict_proba(const TrainedModel& model, const ConnectivityMatrix& w, const TemplateSet& templates) {
    if (w.num_rois() != model.params.m) {
        throw DimensionMismatch("model expects " + std::to_string(model.params.m) + " ROIs, got " +
                                std::to_string(w.num_rois()));
    }
    const GlobalTemplate global = global_template(templates);
    return softmax(infer(model.params, augment(w, global), model.hyper.leaky_slope));
}

}  // namespace tmplgraph
