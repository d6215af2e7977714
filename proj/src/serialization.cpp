#include "tmplgraph/serialization.hpp"

#include "tmplgraph/errors.hpp"
#include "tmplgraph/matrix_io.hpp"

#include <fstream>

namespace tmplgraph {

namespace fs = std::filesystem;

namespace {

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw DataError(std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw DataError(std::string("field '") + key + "': " + ex.what());
    }
}

}  // namespace

json to_json(const TemplateHyperParams& h) {
    return json{{"lambda1", h.lambda1},
                {"lambda2", h.lambda2},
                {"gamma", h.gamma},
                {"hinge_direction", to_string(h.hinge_direction)},
                {"epsilon", h.epsilon},
                {"max_iter", h.max_iter},
                {"tol", h.tol}};
}

TemplateHyperParams template_hyper_from_json(const json& j) {
    TemplateHyperParams h;
    h.lambda1 = field<double>(j, "lambda1");
    h.lambda2 = field<double>(j, "lambda2");
    h.gamma = field<double>(j, "gamma");
    h.hinge_direction = parse_hinge_direction(field<std::string>(j, "hinge_direction"));
    if (j.contains("epsilon")) h.epsilon = field<double>(j, "epsilon");
    if (j.contains("max_iter")) h.max_iter = field<int>(j, "max_iter");
    if (j.contains("tol")) h.tol = field<double>(j, "tol");
    return h;
}

json to_json(const NetworkHyperParams& h) {
    return json{{"f1", h.f1},
                {"f2", h.f2},
                {"f3", h.f3},
                {"leaky_slope", h.leaky_slope},
                {"learning_rate", h.learning_rate},
                {"momentum", h.momentum},
                {"batch_size", h.batch_size},
                {"epochs", h.epochs},
                {"seed", h.seed},
                {"encoder_kind", to_string(h.encoder_kind)}};
}

NetworkHyperParams network_hyper_from_json(const json& j) {
    NetworkHyperParams h;
    h.f1 = field<int>(j, "f1");
    h.f2 = field<int>(j, "f2");
    h.f3 = field<int>(j, "f3");
    h.leaky_slope = field<double>(j, "leaky_slope");
    h.learning_rate = field<double>(j, "learning_rate");
    h.momentum = field<double>(j, "momentum");
    h.batch_size = field<int>(j, "batch_size");
    h.epochs = field<int>(j, "epochs");
    h.seed = field<std::uint64_t>(j, "seed");
    h.encoder_kind = parse_encoder_kind(field<std::string>(j, "encoder_kind"));
    return h;
}

void save_templates(const fs::path& dir, const TemplateSet& t) {
    fs::create_directories(dir);
    json j{{"num_groups", t.num_groups()}, {"num_rois", t.num_rois()}};
    const json hyper = to_json(t.hyper);
    for (auto& [k, v] : hyper.items()) {
        j[k] = v;
    }
    j["iterations_run"] = t.iterations_run;
    j["converged"] = t.converged;
    j["objective_trace"] = t.objective_trace;
    write_json(dir / "templates.json", j);
    for (int c = 0; c < t.num_groups(); ++c) {
        write_matrix_csv(dir / ("template_" + std::to_string(c) + ".csv"), t.templates[static_cast<std::size_t>(c)]);
    }
}

TemplateSet load_templates(const fs::path& dir) {
    const json j = read_json(dir / "templates.json");
    TemplateSet t;
    t.hyper = template_hyper_from_json(j);
    t.iterations_run = field<int>(j, "iterations_run");
    t.converged = field<bool>(j, "converged");
    t.objective_trace = field<std::vector<double>>(j, "objective_trace");
    const int groups = field<int>(j, "num_groups");
    const auto rois = field<Eigen::Index>(j, "num_rois");
    for (int c = 0; c < groups; ++c) {
        const fs::path p = dir / ("template_" + std::to_string(c) + ".csv");
        if (!fs::exists(p)) {
            throw DataError("missing template file " + p.string());
        }
        Matrix g = read_matrix_csv(p);
        if (g.rows() != rois) {
            throw DataError(p.string() + ": expected " + std::to_string(rois) + " ROIs");
        }
        t.templates.push_back(std::move(g));
    }
    return t;
}

json to_json(const TrainedModel& model) {
    json tensors_json = json::object();
    for (const auto& t : tensors(model.params)) {
        tensors_json[t.name] = json{{"shape", t.shape}, {"data", std::vector<double>(t.data.begin(), t.data.end())}};
    }
    json history = json::array();
    for (const auto& e : model.training_history) {
        history.push_back(json{{"train_loss", e.train_loss},
                               {"validation_accuracy",
                                e.validation_accuracy ? json(*e.validation_accuracy) : json(nullptr)}});
    }
    return json{{"hyper", to_json(model.hyper)},
                {"num_rois", model.params.m},
                {"num_classes", model.params.c},
                {"templates_fingerprint", model.templates_fingerprint},
                {"best_epoch", model.best_epoch},
                {"training_history", history},
                {"tensors", tensors_json}};
}

TrainedModel model_from_json(const json& j) {
    TrainedModel model;
    model.hyper = network_hyper_from_json(field<json>(j, "hyper"));
    model.templates_fingerprint = field<std::string>(j, "templates_fingerprint");
    model.best_epoch = field<int>(j, "best_epoch");
    const int m = field<int>(j, "num_rois");
    const int c = field<int>(j, "num_classes");
    model.params = init_network(m, c, model.hyper);
    const json& tj = field<json>(j, "tensors");
    for (auto& t : tensors(model.params)) {
        if (!tj.contains(t.name)) {
            throw DataError("model file lacks tensor '" + t.name + "'");
        }
        const auto shape = field<std::vector<std::size_t>>(tj.at(t.name), "shape");
        const auto data = field<std::vector<double>>(tj.at(t.name), "data");
        if (shape != t.shape || data.size() != t.data.size()) {
            throw DataError("tensor '" + t.name + "' has the wrong shape");
        }
        std::copy(data.begin(), data.end(), t.data.begin());
    }
    for (const auto& e : field<json>(j, "training_history")) {
        EpochRecord rec;
        rec.train_loss = field<double>(e, "train_loss");
        if (!e.at("validation_accuracy").is_null()) {
            rec.validation_accuracy = field<double>(e, "validation_accuracy");
        }
        model.training_history.push_back(rec);
    }
    return model;
}

void save_model(const fs::path& path, const TrainedModel& model) { write_json(path, to_json(model)); }

TrainedModel load_model(const fs::path& path) { return model_from_json(read_json(path)); }

json to_json(const SubgraphReport& r) {
    json edges = json::array();
    for (const auto& e : r.subgraph.edges) {
        edges.push_back(json::array({e.i, e.j, e.weight}));
    }
    json j{{"group_a", r.group_a},
           {"group_b", r.group_b},
           {"eta", r.subgraph.eta},
           {"tau", r.tau},
           {"restarts", r.restarts},
           {"seed", r.seed},
           {"nodes", r.subgraph.nodes}};
    if (!r.node_names.empty()) {
        j["node_names"] = r.node_names;
    }
    j["edges"] = edges;
    j["score"] = r.subgraph.score;
    return j;
}

SubgraphReport subgraph_report_from_json(const json& j) {
    SubgraphReport r;
    r.group_a = field<int>(j, "group_a");
    r.group_b = field<int>(j, "group_b");
    r.tau = field<double>(j, "tau");
    r.restarts = field<int>(j, "restarts");
    r.seed = field<std::uint64_t>(j, "seed");
    r.subgraph.eta = field<double>(j, "eta");
    r.subgraph.nodes = field<std::vector<int>>(j, "nodes");
    if (j.contains("node_names")) {
        r.node_names = field<std::vector<std::string>>(j, "node_names");
    }
    for (const auto& e : field<json>(j, "edges")) {
        if (!e.is_array() || e.size() != 3) {
            throw DataError("edge entries must be [i, j, weight]");
        }
        r.subgraph.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    r.subgraph.score = field<double>(j, "score");
    return r;
}

void save_subgraph(const fs::path& path, const SubgraphReport& report) { write_json(path, to_json(report)); }

SubgraphReport load_subgraph(const fs::path& path) { return subgraph_report_from_json(read_json(path)); }

json to_json(const EvalReport& r) {
    return json{{"accuracy", r.accuracy},
                {"auc", r.auc ? json(*r.auc) : json(nullptr)},
                {"correct", r.correct},
                {"total", r.total},
                {"per_class_counts", r.per_class_counts},
                {"per_class_correct", r.per_class_correct},
                {"split_seed", r.split_seed}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw DataError(path.string() + ": " + ex.what());
    }
}

}  // namespace tmplgraph
