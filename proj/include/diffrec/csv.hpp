#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "diffrec/errors.hpp"
#include "diffrec/forward.hpp"
#include "diffrec/grid.hpp"
#include "diffrec/inverse.hpp"
#include "diffrec/problem.hpp"

namespace diffrec {

/// Round-trip-safe decimal rendering (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

} // namespace detail

inline void write_flux_csv(const std::string& path, const FluxData& data) {
    auto out = detail::open_for_write(path);
    out << "t,g\n";
    for (std::size_t i = 0; i < data.grid.size(); ++i)
        out << format_double(data.grid.node(i)) << ',' << format_double(data.g[i]) << '\n';
}

inline void write_result_csv(const std::string& path, const TimeSeries& A, const TimeSeries& a) {
    auto out = detail::open_for_write(path);
    out << "t,A,a\n";
    for (std::size_t i = 0; i < A.size(); ++i)
        out << format_double(A.grid.node(i)) << ',' << format_double(A.values[i]) << ','
            << format_double(a.values[i]) << '\n';
}

inline void write_field_csv(const std::string& path, const FieldSnapshot& snap) {
    auto out = detail::open_for_write(path);
    out << "x,u\n";
    for (std::size_t i = 0; i < snap.x_nodes.size(); ++i)
        out << format_double(snap.x_nodes[i]) << ',' << format_double(snap.values[i]) << '\n';
}

inline void write_series_csv(const std::string& path, const char* header, const TimeSeries& s,
                             std::size_t first = 0) {
    auto out = detail::open_for_write(path);
    out << header << '\n';
    for (std::size_t i = first; i < s.size(); ++i)
        out << format_double(s.grid.node(i)) << ',' << format_double(s.values[i]) << '\n';
}

/// Read a two-column CSV (optionally with a header row) of strictly
/// increasing abscissae.
inline std::vector<std::pair<double, double>> read_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table file: " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::string cleaned = line;
        for (char& c : cleaned)
            if (c == ',') c = ' ';
        std::istringstream ss(cleaned);
        double t = 0.0, v = 0.0;
        if (!(ss >> t)) {
            if (line_no == 1) continue; // header row
            throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed table row");
        }
        if (!(ss >> v))
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected two columns");
        rows.emplace_back(t, v);
    }
    if (rows.size() < 2)
        throw ConfigError(path + ": table needs at least two data rows");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].first > rows[i - 1].first))
            throw ConfigError(path + ": table abscissae must be strictly increasing");
    return rows;
}

/// Load a measured flux table and interpolate it linearly onto the grid.
inline FluxData read_flux_table(const std::string& path, const TimeGrid& grid) {
    const FunctionSpec interp = FunctionSpec::sample_table(read_table_csv(path));
    std::vector<double> g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) g[i] = interp(grid.node(i));
    return FluxData(grid, std::move(g));
}

} // namespace diffrec
