#include "tmplgraph/dataset.hpp"

#include "tmplgraph/errors.hpp"
#include "tmplgraph/matrix_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace tmplgraph {

namespace fs = std::filesystem;

LabeledDataset::LabeledDataset(std::vector<Subject> subjects, int num_groups)
    : subjects_(std::move(subjects)), num_groups_(num_groups) {
    if (num_groups_ < 1) {
        throw DataError("dataset needs at least one group");
    }
    if (subjects_.empty()) {
        throw DataError("dataset has no subjects");
    }
    num_rois_ = subjects_.front().matrix.num_rois();
    groups_.assign(static_cast<std::size_t>(num_groups_), {});
    for (std::size_t k = 0; k < subjects_.size(); ++k) {
        const Subject& s = subjects_[k];
        if (s.label < 0 || s.label >= num_groups_) {
            throw DataError("subject " + s.id + ": label " + std::to_string(s.label) +
                            " outside 0.." + std::to_string(num_groups_ - 1));
        }
        if (s.matrix.weights.rows() != num_rois_ || s.matrix.weights.cols() != num_rois_) {
            throw DimensionMismatch("subject " + s.id + ": expected " + std::to_string(num_rois_) +
                                    " ROIs, got " + std::to_string(s.matrix.weights.rows()));
        }
        groups_[static_cast<std::size_t>(s.label)].push_back(k);
    }
    for (int c = 0; c < num_groups_; ++c) {
        if (groups_[static_cast<std::size_t>(c)].empty()) {
            throw DataError("group " + std::to_string(c) + " has no subjects");
        }
    }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<Subject> picked;
    picked.reserve(indices.size());
    for (std::size_t k : indices) {
        if (k >= subjects_.size()) {
            throw IndexOutOfRange("subject index " + std::to_string(k) + " out of range");
        }
        picked.push_back(subjects_[k]);
    }
    return LabeledDataset(std::move(picked), num_groups_);
}

int DatasetManifest::label_index(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) {
            return static_cast<int>(i);
        }
    }
    throw DataError("unknown label '" + label + "'");
}

std::map<std::string, int> DatasetManifest::label_map() const {
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[labels[i]] = static_cast<int>(i);
    }
    return out;
}

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open manifest " + path.string());
    }
    DatasetManifest manifest;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line_no == 1) {
            if (line != "subject_id,label,path") {
                throw DataError(path.string() + ": expected header 'subject_id,label,path'");
            }
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
        }
        ManifestEntry e{line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), line.substr(c2 + 1)};
        if (!ids.insert(e.subject_id).second) {
            throw DataError(path.string() + ": duplicate subject_id '" + e.subject_id + "'");
        }
        if (std::find(manifest.labels.begin(), manifest.labels.end(), e.label) == manifest.labels.end()) {
            manifest.labels.push_back(e.label);
        }
        manifest.entries.push_back(std::move(e));
    }
    if (line_no == 0) {
        throw DataError(path.string() + ": empty manifest (missing header)");
    }
    return manifest;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "subject_id,label,path\n";
    for (const auto& e : manifest.entries) {
        out << e.subject_id << ',' << e.label << ',' << e.path << '\n';
    }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

LabeledDataset load_dataset(const fs::path& manifest_path, DatasetManifest* manifest_out) {
    DatasetManifest manifest = read_manifest(manifest_path);
    const fs::path base = manifest_path.parent_path();
    std::vector<Subject> subjects;
    subjects.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        const fs::path p = resolve(base, e.path);
        if (!fs::exists(p)) {
            throw DataError("subject " + e.subject_id + ": missing file " + p.string());
        }
        subjects.push_back({e.subject_id, ConnectivityMatrix(read_matrix_csv(p)), manifest.label_index(e.label)});
    }
    const int groups = static_cast<int>(manifest.labels.size());
    if (manifest_out) {
        *manifest_out = manifest;
    }
    return LabeledDataset(std::move(subjects), groups);
}

DatasetManifest ingest(const fs::path& timeseries_dir, const DatasetManifest& manifest,
                       const fs::path& out_dir) {
    fs::create_directories(out_dir);
    DatasetManifest out = manifest;
    std::vector<std::string> roi_names;
    for (auto& e : out.entries) {
        if (e.subject_id.find_first_of("/\\") != std::string::npos) {
            throw DataError("subject " + e.subject_id + ": id cannot contain path separators");
        }
        const fs::path src = resolve(timeseries_dir, e.path);
        if (!fs::exists(src)) {
            throw DataError("subject " + e.subject_id + ": missing file " + src.string());
        }
        ConnectivityMatrix cm;
        try {
            const TimeSeriesTable table = read_timeseries_csv(src);
            if (roi_names.empty()) {
                roi_names = table.roi_names;
            }
            cm = pearson_connectivity(table);
        } catch (const ConstantColumn& ex) {
            throw DataError("subject " + e.subject_id + ": " + ex.what());
        } catch (const TooFewTimepoints& ex) {
            throw DataError("subject " + e.subject_id + ": " + ex.what());
        }
        const std::string name = e.subject_id + ".csv";
        write_matrix_csv(out_dir / name, cm.weights);
        e.path = name;
    }
    if (!roi_names.empty()) {
        std::ofstream names(out_dir / "roi_names.txt");
        for (const auto& n : roi_names) {
            names << n << '\n';
        }
    }
    write_manifest(out_dir / "manifest.csv", out);
    return out;
}

}  // namespace tmplgraph
