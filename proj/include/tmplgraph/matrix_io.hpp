#pragma once

#include "tmplgraph/connectivity.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace tmplgraph {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Parses one decimal field; throws DataError naming `context` on failure.
double parse_double(std::string_view field, const std::string& context);

/// Headerless CSV, M lines of M values.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// T lines of M values; an optional first line of ROI names is detected by a
/// non-numeric first token.
TimeSeriesTable read_timeseries_csv(const std::filesystem::path& path);
void write_timeseries_csv(const std::filesystem::path& path, const TimeSeriesTable& table);

}  // namespace tmplgraph
