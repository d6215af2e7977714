#include "tmplgraph/matrix_io.hpp"

#include "tmplgraph/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace tmplgraph {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

bool is_number(std::string_view field) {
    double v = 0.0;
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    return ec == std::errc() && ptr == field.data() + field.size() && !field.empty();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

Matrix parse_rows(const std::vector<std::string>& lines, std::size_t first,
                  const std::filesystem::path& path) {
    const std::size_t rows = lines.size() - first;
    if (rows == 0) {
        return Matrix(0, 0);
    }
    const std::size_t cols = split_fields(lines[first]).size();
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto fields = split_fields(lines[first + r]);
        if (fields.size() != cols) {
            throw DataError(path.string() + ": line " + std::to_string(first + r + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(
                fields[c], path.string() + ":" + std::to_string(first + r + 1));
        }
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw NumericError("cannot format value");
    }
    return std::string(buf, ptr);
}

double parse_double(std::string_view field, const std::string& context) {
    std::string_view f = trim(field);
    if (!f.empty() && f.front() == '+') {
        f.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError(context + ": not a number: '" + std::string(field) + "'");
    }
    return v;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    Matrix m = parse_rows(lines, 0, path);
    if (m.rows() != m.cols()) {
        throw DataError(path.string() + ": matrix is " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + ", expected square");
    }
    return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

TimeSeriesTable read_timeseries_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    TimeSeriesTable table;
    std::size_t first = 0;
    if (!lines.empty()) {
        const auto head = split_fields(lines.front());
        if (!is_number(head.front())) {
            for (auto name : head) {
                table.roi_names.emplace_back(name);
            }
            first = 1;
        }
    }
    table.values = parse_rows(lines, first, path);
    if (!table.roi_names.empty() &&
        static_cast<Eigen::Index>(table.roi_names.size()) != table.values.cols()) {
        throw DataError(path.string() + ": header names " + std::to_string(table.roi_names.size()) +
                        " ROIs but rows have " + std::to_string(table.values.cols()));
    }
    return table;
}

void write_timeseries_csv(const std::filesystem::path& path, const TimeSeriesTable& table) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    for (std::size_t i = 0; i < table.roi_names.size(); ++i) {
        out << (i ? "," : "") << table.roi_names[i];
    }
    if (!table.roi_names.empty()) {
        out << '\n';
    }
    for (Eigen::Index t = 0; t < table.values.rows(); ++t) {
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            out << (j ? "," : "") << format_double(table.values(t, j));
        }
        out << '\n';
    }
}

}  // namespace tmplgraph
