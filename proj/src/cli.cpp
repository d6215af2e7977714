#include "tmplgraph/cli.hpp"

#include "tmplgraph/contrast.hpp"
#include "tmplgraph/dataset.hpp"
#include "tmplgraph/errors.hpp"
#include "tmplgraph/evaluation.hpp"
#include "tmplgraph/matrix_io.hpp"
#include "tmplgraph/serialization.hpp"
#include "tmplgraph/synth.hpp"
#include "tmplgraph/templates.hpp"
#include "tmplgraph/training.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>

namespace tmplgraph {

namespace fs = std::filesystem;

namespace {

struct TemplateFlags {
    TemplateHyperParams hyper;
    std::string hinge = "separation";

    void add(CLI::App* app) {
        app->add_option("--lambda1", hyper.lambda1, "Sparsity weight")->capture_default_str();
        app->add_option("--lambda2", hyper.lambda2, "Inter-group weight")->capture_default_str();
        app->add_option("--gamma", hyper.gamma, "Inter-group margin")->capture_default_str();
        app->add_option("--hinge-direction", hinge, "literal | separation")->capture_default_str();
        app->add_option("--max-iter", hyper.max_iter, "Outer iteration cap")->capture_default_str();
        app->add_option("--tol", hyper.tol, "Relative objective change to stop at")->capture_default_str();
    }

    TemplateHyperParams resolve() const {
        TemplateHyperParams h = hyper;
        h.hinge_direction = parse_hinge_direction(hinge);
        return h;
    }
};

struct NetworkFlags {
    NetworkHyperParams hyper;
    std::string encoder = "cnn";
    SplitFractions fractions;

    void add(CLI::App* app) {
        app->add_option("--epochs", hyper.epochs)->capture_default_str();
        app->add_option("--lr", hyper.learning_rate, "Learning rate")->capture_default_str();
        app->add_option("--momentum", hyper.momentum)->capture_default_str();
        app->add_option("--batch-size", hyper.batch_size)->capture_default_str();
        app->add_option("--f1", hyper.f1, "Edge-to-edge filters")->capture_default_str();
        app->add_option("--f2", hyper.f2, "Edge-to-node maps")->capture_default_str();
        app->add_option("--f3", hyper.f3, "Hidden width")->capture_default_str();
        app->add_option("--leaky-slope", hyper.leaky_slope)->capture_default_str();
        app->add_option("--encoder", encoder, "cnn | mlp")->capture_default_str();
        add_fractions(app);
    }

    void add_fractions(CLI::App* app) {
        app->add_option("--train-fraction", fractions.train)->capture_default_str();
        app->add_option("--val-fraction", fractions.validation)->capture_default_str();
        app->add_option("--test-fraction", fractions.test)->capture_default_str();
    }

    NetworkHyperParams resolve(std::uint64_t seed) const {
        NetworkHyperParams h = hyper;
        h.encoder_kind = parse_encoder_kind(encoder);
        h.seed = seed;
        return h;
    }
};

struct ExplainFlags {
    int group_a = 0;
    int group_b = 1;
    double eta = 0.02;
    double tau = 0.0;
    int restarts = 16;

    void add(CLI::App* app, bool with_groups) {
        if (with_groups) {
            app->add_option("--group-a", group_a, "Dense-side group")->capture_default_str();
            app->add_option("--group-b", group_b, "Sparse-side group")->capture_default_str();
        }
        app->add_option("--eta", eta, "Subgraph size penalty")->capture_default_str();
        app->add_option("--tau", tau, "Edge threshold on |G_a - G_b|")->capture_default_str();
        app->add_option("--restarts", restarts, "Local-search restarts")->capture_default_str();
    }
};

json split_json(const SplitIndices& s) {
    return json{{"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

json template_summary(const TemplateSet& t) {
    json j{{"num_groups", t.num_groups()}, {"num_rois", t.num_rois()}};
    const json hyper = to_json(t.hyper);
    for (auto& [k, v] : hyper.items()) {
        j[k] = v;
    }
    j["iterations_run"] = t.iterations_run;
    j["converged"] = t.converged;
    j["objective_trace"] = t.objective_trace;
    return j;
}

std::vector<std::string> convergence_warnings(const TemplateSet& t) {
    if (t.converged) {
        return {};
    }
    return {"template fit did not converge within " + std::to_string(t.iterations_run) +
            " iterations; templates are the last iterate"};
}

std::vector<std::string> read_roi_names(const fs::path& path, Eigen::Index expected) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open ROI name file " + path.string());
    }
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            names.push_back(line);
        }
    }
    if (static_cast<Eigen::Index>(names.size()) != expected) {
        throw DataError(path.string() + ": " + std::to_string(names.size()) + " names for " +
                        std::to_string(expected) + " ROIs");
    }
    return names;
}

SubgraphReport run_explain(const TemplateSet& templates, const ExplainFlags& f, std::uint64_t seed,
                           const std::vector<std::string>& roi_names, const fs::path& out_dir) {
    const int groups = templates.num_groups();
    if (f.group_a < 0 || f.group_a >= groups || f.group_b < 0 || f.group_b >= groups || f.group_a == f.group_b) {
        throw UsageError("--group-a and --group-b must be distinct groups in 0.." + std::to_string(groups - 1));
    }
    if (!(f.eta >= 0.0) || !(f.tau >= 0.0)) {
        throw UsageError("--eta and --tau must be nonnegative");
    }
    const Matrix& ga = templates.templates[static_cast<std::size_t>(f.group_a)];
    const Matrix& gb = templates.templates[static_cast<std::size_t>(f.group_b)];
    ContrastProblem problem{contrast_matrix(ga, gb), f.eta, f.group_a, f.group_b};
    const std::vector<int> nodes = local_search(problem, f.restarts, seed);

    SubgraphReport report;
    report.group_a = f.group_a;
    report.group_b = f.group_b;
    report.tau = f.tau;
    report.restarts = f.restarts;
    report.seed = seed;
    report.subgraph = extract_subgraph(nodes, ga, gb, f.tau, f.eta);
    for (int v : report.subgraph.nodes) {
        if (!roi_names.empty()) {
            report.node_names.push_back(roi_names[static_cast<std::size_t>(v)]);
        }
    }
    fs::create_directories(out_dir);
    save_subgraph(out_dir / "subgraph.json", report);
    write_matrix_csv(out_dir / "difference_heatmap.csv", (ga - gb).cwiseAbs());
    return report;
}

std::vector<std::string> roi_names_near(const fs::path& manifest, Eigen::Index rois) {
    const fs::path p = manifest.parent_path() / "roi_names.txt";
    return fs::exists(p) ? read_roi_names(p, rois) : std::vector<std::string>{};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Template graph learning, template-augmented classification and contrast subgraphs", "tmplgraph"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string data_path, templates_dir, model_path, out_path;

    // synth
    SynthSpec spec;
    auto* synth = app.add_subcommand("synth", "Generate a planted-template synthetic dataset");
    synth->add_option("--rois", spec.num_rois)->capture_default_str();
    synth->add_option("--groups", spec.groups)->capture_default_str();
    synth->add_option("--subjects-per-group", spec.subjects_per_group)->capture_default_str();
    synth->add_option("--noise", spec.noise_sigma)->capture_default_str();
    synth->add_option("--effect", spec.effect_size)->capture_default_str();
    synth->add_option("--density", spec.support_density)->capture_default_str();
    synth->add_option("--seed", seed)->required();
    synth->add_option("--out", out_path, "Output directory")->required();

    // ingest
    std::string timeseries_dir;
    auto* ingest_cmd = app.add_subcommand("ingest", "Build connectivity matrices from ROI time series");
    ingest_cmd->add_option("--manifest", data_path, "Manifest of time-series files")->required();
    ingest_cmd->add_option("--timeseries-dir", timeseries_dir, "Base directory for manifest paths");
    ingest_cmd->add_option("--out", out_path, "Output directory")->required();

    // template
    TemplateFlags tflags;
    auto* tmpl = app.add_subcommand("template", "Fit one template graph per group");
    tmpl->add_option("--data", data_path, "Matrix manifest")->required();
    tmpl->add_option("--out", out_path, "Output directory")->required();
    tflags.add(tmpl);

    // train
    NetworkFlags nflags;
    auto* train_cmd = app.add_subcommand("train", "Train the template-augmented classifier");
    train_cmd->add_option("--data", data_path)->required();
    train_cmd->add_option("--templates", templates_dir)->required();
    train_cmd->add_option("--seed", seed)->required();
    train_cmd->add_option("--out", out_path, "Model file")->required();
    nflags.add(train_cmd);

    // eval
    std::string subset = "test";
    SplitFractions eval_fractions;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model on a split slice");
    eval_cmd->add_option("--data", data_path)->required();
    eval_cmd->add_option("--templates", templates_dir)->required();
    eval_cmd->add_option("--model", model_path)->required();
    eval_cmd->add_option("--seed", seed, "Split seed")->required();
    eval_cmd->add_option("--subset", subset, "train | validation | test | all")->capture_default_str();
    eval_cmd->add_option("--out", out_path, "Report file");
    eval_cmd->add_option("--train-fraction", eval_fractions.train)->capture_default_str();
    eval_cmd->add_option("--val-fraction", eval_fractions.validation)->capture_default_str();
    eval_cmd->add_option("--test-fraction", eval_fractions.test)->capture_default_str();

    // explain
    ExplainFlags eflags;
    std::string roi_names_path;
    auto* explain_cmd = app.add_subcommand("explain", "Extract the contrast subgraph between two groups");
    explain_cmd->add_option("--templates", templates_dir)->required();
    explain_cmd->add_option("--seed", seed)->required();
    explain_cmd->add_option("--out", out_path, "Output directory")->required();
    explain_cmd->add_option("--roi-names", roi_names_path, "One ROI name per line");
    eflags.add(explain_cmd, true);

    // pipeline
    TemplateFlags p_tflags;
    NetworkFlags p_nflags;
    ExplainFlags p_eflags;
    auto* pipeline = app.add_subcommand("pipeline", "template -> train -> eval -> explain in one pass");
    pipeline->add_option("--data", data_path)->required();
    pipeline->add_option("--seed", seed)->required();
    pipeline->add_option("--out", out_path, "Output directory (default: <data dir>/pipeline)");
    p_tflags.add(pipeline);
    p_nflags.add(pipeline);
    p_eflags.add(pipeline, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        json result;
        if (*synth) {
            const SynthResult s = [&] {
                SynthSpec sp = spec;
                sp.seed = seed;
                return synth_generate(sp);
            }();
            const fs::path dir(out_path);
            fs::create_directories(dir / "truth");
            DatasetManifest manifest;
            for (int c = 0; c < s.data.num_groups(); ++c) {
                manifest.labels.push_back("group" + std::to_string(c));
            }
            for (const auto& subj : s.data.subjects()) {
                write_matrix_csv(dir / (subj.id + ".csv"), subj.matrix.weights);
                manifest.entries.push_back({subj.id, manifest.labels[static_cast<std::size_t>(subj.label)], subj.id + ".csv"});
            }
            write_manifest(dir / "manifest.csv", manifest);
            for (std::size_t c = 0; c < s.planted_templates.size(); ++c) {
                write_matrix_csv(dir / "truth" / ("template_" + std::to_string(c) + ".csv"), s.planted_templates[c]);
            }
            json truth{{"num_rois", spec.num_rois},
                       {"groups", spec.groups},
                       {"subjects_per_group", spec.subjects_per_group},
                       {"density", spec.support_density},
                       {"effect", spec.effect_size},
                       {"noise", spec.noise_sigma},
                       {"seed", seed},
                       {"base_support", s.base_support},
                       {"differentiated_support", s.differentiated_support}};
            write_json(dir / "truth" / "truth.json", truth);
            result = json{{"command", "synth"},
                          {"manifest", (dir / "manifest.csv").string()},
                          {"subjects", s.data.size()},
                          {"num_rois", s.data.num_rois()},
                          {"groups", s.data.num_groups()},
                          {"base_edges", s.base_support.size()},
                          {"differentiated_edges", s.differentiated_support.size()}};
        } else if (*ingest_cmd) {
            const fs::path manifest_path(data_path);
            const DatasetManifest manifest = read_manifest(manifest_path);
            const fs::path base = timeseries_dir.empty() ? manifest_path.parent_path() : fs::path(timeseries_dir);
            const DatasetManifest written = ingest(base, manifest, out_path);
            result = json{{"command", "ingest"},
                          {"manifest", (fs::path(out_path) / "manifest.csv").string()},
                          {"subjects", written.entries.size()}};
        } else if (*tmpl) {
            const LabeledDataset data = load_dataset(data_path);
            const TemplateSet t = fit_templates(data, tflags.resolve());
            save_templates(out_path, t);
            result = template_summary(t);
            result["command"] = "template";
            result["warnings"] = convergence_warnings(t);
        } else if (*train_cmd) {
            const LabeledDataset data = load_dataset(data_path);
            const TemplateSet templates = load_templates(templates_dir);
            const SplitIndices s = split(data, nflags.fractions, seed);
            const TrainedModel model = train(data, templates, nflags.resolve(seed), s);
            save_model(out_path, model);
            const auto& last = model.training_history.back();
            result = json{{"command", "train"},
                          {"model", out_path},
                          {"best_epoch", model.best_epoch},
                          {"final_train_loss", last.train_loss},
                          {"templates_fingerprint", model.templates_fingerprint},
                          {"split", split_json(s)}};
        } else if (*eval_cmd) {
            DatasetManifest manifest;
            const LabeledDataset data = load_dataset(data_path, &manifest);
            const TemplateSet templates = load_templates(templates_dir);
            const TrainedModel model = load_model(model_path);
            const SplitIndices s = split(data, eval_fractions, seed);
            std::vector<std::size_t> indices;
            if (subset == "test") {
                indices = s.test;
            } else if (subset == "validation") {
                indices = s.validation;
            } else if (subset == "train") {
                indices = s.train;
            } else if (subset == "all") {
                for (std::size_t k = 0; k < data.size(); ++k) indices.push_back(k);
            } else {
                throw UsageError("--subset must be train, validation, test or all");
            }
            std::vector<std::string> warnings;
            if (model.templates_fingerprint != templates_fingerprint(templates)) {
                warnings.push_back("templates differ from the ones the model was trained with");
            }
            const EvalReport report = evaluate(model, templates, data, indices, seed);
            if (!report.auc) {
                warnings.push_back("evaluated slice holds a single class; AUC undefined");
            }
            result = to_json(report);
            result["seed"] = seed;
            result["subset"] = subset;
            result["label_map"] = manifest.label_map();
            result["warnings"] = warnings;
            if (!out_path.empty()) {
                write_json(out_path, result);
            }
        } else if (*explain_cmd) {
            const TemplateSet templates = load_templates(templates_dir);
            const auto names = roi_names_path.empty() ? std::vector<std::string>{}
                                                      : read_roi_names(roi_names_path, templates.num_rois());
            result = to_json(run_explain(templates, eflags, seed, names, out_path));
        } else if (*pipeline) {
            DatasetManifest manifest;
            const LabeledDataset data = load_dataset(data_path, &manifest);
            const fs::path dir = out_path.empty() ? fs::path(data_path).parent_path() / "pipeline" : fs::path(out_path);
            fs::create_directories(dir);

            const SplitIndices s = split(data, p_nflags.fractions, seed);
            const LabeledDataset train_data = data.subset(s.train);
            const TemplateSet templates = fit_templates(train_data, p_tflags.resolve());
            save_templates(dir / "templates", templates);

            const NetworkHyperParams nh = p_nflags.resolve(seed);
            const TrainedModel model = train(data, templates, nh, s);
            save_model(dir / "model.json", model);

            const EvalReport report = evaluate(model, templates, data, s.test, seed);
            const SubgraphReport sub =
                run_explain(templates, p_eflags, seed, roi_names_near(data_path, data.num_rois()), dir);

            std::vector<std::string> warnings = convergence_warnings(templates);
            if (!report.auc) {
                warnings.push_back("test slice holds a single class; AUC undefined");
            }
            result = to_json(report);
            result["seed"] = seed;
            result["split"] = split_json(s);
            result["label_map"] = manifest.label_map();
            result["hyperparameters"] = json{{"template", to_json(templates.hyper)},
                                             {"network", to_json(nh)},
                                             {"explain",
                                              json{{"group_a", p_eflags.group_a},
                                                   {"group_b", p_eflags.group_b},
                                                   {"eta", p_eflags.eta},
                                                   {"tau", p_eflags.tau},
                                                   {"restarts", p_eflags.restarts}}}};
            result["templates"] = json{{"converged", templates.converged},
                                       {"iterations_run", templates.iterations_run},
                                       {"fingerprint", model.templates_fingerprint}};
            result["subgraph"] = json{{"nodes", sub.subgraph.nodes},
                                      {"edges", sub.subgraph.edges.size()},
                                      {"score", sub.subgraph.score}};
            result["warnings"] = warnings;
            write_json(dir / "report.json", result);
        }
        out << result.dump(2) << '\n';
        return kExitOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace tmplgraph
