/**
 * @file serialization.hpp
 * @brief On-disk formats: template directories, model files, subgraph and eval reports.
 *
 * Floats are written with the shortest round-trip representation, so reading a
 * file back reproduces the in-memory values exactly.
 */
#pragma once

#include "tmplgraph/contrast.hpp"
#include "tmplgraph/evaluation.hpp"
#include "tmplgraph/templates.hpp"
#include "tmplgraph/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace tmplgraph {

using json = nlohmann::ordered_json;

json to_json(const TemplateHyperParams& h);
TemplateHyperParams template_hyper_from_json(const json& j);

json to_json(const NetworkHyperParams& h);
NetworkHyperParams network_hyper_from_json(const json& j);

/// `templates.json` plus `template_<c>.csv` per group.
void save_templates(const std::filesystem::path& dir, const TemplateSet& templates);
TemplateSet load_templates(const std::filesystem::path& dir);

json to_json(const TrainedModel& model);
TrainedModel model_from_json(const json& j);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

struct SubgraphReport {
    int group_a = 0;
    int group_b = 1;
    double tau = 0.0;
    int restarts = 16;
    std::uint64_t seed = 0;
    std::vector<std::string> node_names;  ///< empty when ROI names are unknown
    ContrastSubgraph subgraph;
};

json to_json(const SubgraphReport& report);
SubgraphReport subgraph_report_from_json(const json& j);
void save_subgraph(const std::filesystem::path& path, const SubgraphReport& report);
SubgraphReport load_subgraph(const std::filesystem::path& path);

json to_json(const EvalReport& report);

/// Pretty-printed JSON followed by a newline.
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace tmplgraph
