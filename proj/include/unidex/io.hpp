#ifndef UNIDEX_IO_HPP
#define UNIDEX_IO_HPP

#include <Eigen/Dense>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "unidex/design_types.hpp"
#include "unidex/error.hpp"
#include "unidex/synthesize.hpp"

namespace unidex::io {

/// Decimal with 17 significant digits; enough to round-trip any double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string> column_names(const std::vector<scene::DimMeta>& meta) {
    std::vector<std::string> out;
    out.reserve(meta.size());
    for (const auto& m : meta) out.push_back(m.name());
    return out;
}

inline std::string to_csv(const design::Design& d) {
    std::string out;
    const auto cols = column_names(d.dim_meta);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (j) out += ',';
        out += cols[j];
    }
    out += '\n';
    for (Eigen::Index i = 0; i < d.points.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.points.cols(); ++j) {
            if (j) out += ',';
            out += format_double(d.points(i, j));
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json timings_json(const StageTimings& t) {
    return {{"parse", t.parse}, {"geometry", t.geometry}, {"glp", t.glp},
            {"transforms", t.transforms}, {"ccd", t.ccd}, {"total", t.total()}};
}

inline std::string to_json(const design::Design& d, std::uint64_t seed, const StageTimings& timings) {
    nlohmann::ordered_json doc;
    doc["columns"] = column_names(d.dim_meta);
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < d.points.rows(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < d.points.cols(); ++j) row.push_back(d.points(i, j));
        rows.push_back(std::move(row));
    }
    doc["points"] = std::move(rows);
    doc["ccd"] = d.ccd_score;
    doc["order"] = d.order_used.perm();
    doc["seed"] = seed;
    doc["timings_ms"] = timings_json(timings);
    return doc.dump(2) + "\n";
}

/// A design table read back from CSV.
struct Table {
    std::vector<std::string> columns;
    Eigen::MatrixXd points;
};

inline Table parse_csv(std::string_view text) {
    Table t;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        for (std::size_t a = 0;;) {
            const std::size_t b = line.find(',', a);
            fields.push_back(line.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
            if (b == std::string_view::npos) break;
            a = b + 1;
        }
        const SourceLocation loc{line_no, 1, 0};
        if (t.columns.empty()) {
            for (auto f : fields) t.columns.emplace_back(f);
            continue;
        }
        if (fields.size() != t.columns.size()) {
            throw ParseError(ParseErrorKind::InvalidArgument,
                             "row has " + std::to_string(fields.size()) + " fields, header has " +
                                 std::to_string(t.columns.size()),
                             loc);
        }
        std::vector<double> row;
        for (auto f : fields) {
            while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
            while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
                throw ParseError(ParseErrorKind::InvalidArgument, "not a number: '" + std::string(f) + "'", loc);
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (t.columns.empty()) throw ParseError(ParseErrorKind::InvalidArgument, "design file is empty", {});
    t.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            t.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return t;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(ParseErrorKind::Io, "cannot read '" + path + "'", {});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) throw ParseError(ParseErrorKind::Io, "cannot write '" + path + "'", {});
}

}  // namespace unidex::io

#endif  // UNIDEX_IO_HPP
