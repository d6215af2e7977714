/**
 * @file dataset.hpp
 * @brief Labeled subject collections and the CSV manifest that describes them on disk.
 */
#pragma once

#include "tmplgraph/connectivity.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tmplgraph {

struct Subject {
    std::string id;
    ConnectivityMatrix matrix;
    int label = 0;
};

/// Subjects with group labels. `group_index_lists[c]` holds the positions of the
/// subjects of group c in ascending order; together the lists partition 0..K-1.
class LabeledDataset {
public:
    LabeledDataset() = default;

    /// Validates labels, matrix shapes and group occupancy. Throws DataError.
    LabeledDataset(std::vector<Subject> subjects, int num_groups);

    const std::vector<Subject>& subjects() const { return subjects_; }
    const Subject& subject(std::size_t k) const { return subjects_.at(k); }
    const std::vector<std::vector<std::size_t>>& group_index_lists() const { return groups_; }
    const std::vector<std::size_t>& group(int c) const { return groups_.at(static_cast<std::size_t>(c)); }
    int num_groups() const { return num_groups_; }
    Eigen::Index num_rois() const { return num_rois_; }
    std::size_t size() const { return subjects_.size(); }

    /// Dataset restricted to `indices` (in the given order). Every group must stay nonempty.
    LabeledDataset subset(const std::vector<std::size_t>& indices) const;

private:
    std::vector<Subject> subjects_;
    std::vector<std::vector<std::size_t>> groups_;
    int num_groups_ = 0;
    Eigen::Index num_rois_ = 0;
};

struct ManifestEntry {
    std::string subject_id;
    std::string label;
    std::string path;
};

/// CSV with header `subject_id,label,path`. Paths are relative to the manifest's
/// directory unless absolute. Labels map to group indices in first-seen order.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> labels;  ///< index -> label string

    int label_index(const std::string& label) const;
    std::map<std::string, int> label_map() const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Loads every matrix the manifest references. A missing or malformed file is a
/// DataError naming the path.
LabeledDataset load_dataset(const std::filesystem::path& manifest_path, DatasetManifest* manifest_out = nullptr);

/// Converts every time-series file of `manifest` (resolved against
/// `timeseries_dir`) into a matrix CSV under `out_dir` and returns the manifest
/// rewritten to point at those files. Errors carry the subject id.
DatasetManifest ingest(const std::filesystem::path& timeseries_dir, const DatasetManifest& manifest,
                       const std::filesystem::path& out_dir);

}  // namespace tmplgraph
