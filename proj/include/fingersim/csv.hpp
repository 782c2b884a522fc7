#pragma once

// Flat-file I/O: trajectory CSV emission (16-column schema with a `# key:
// value` metadata preamble), force-table CSV (t,F) and reference CSV
// (t,q1,q2,q3) loading. Numbers are written with 17 significant digits so
// round-tripping is lossless.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fingersim/actuation.hpp"
#include "fingersim/simulate.hpp"

namespace fingersim {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kTrajectoryHeader =
    "t,q1,q2,q3,qd1,qd2,qd3,qdd1,qdd2,qdd3,tau1,tau2,tau3,K,P,E";

inline void write_trajectory(std::ostream& os, const Trajectory& traj,
                             const std::map<std::string, std::string>& extra_meta = {}) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(traj.params_hash));
    os << "# params_hash: " << hash << "\n";
    os << "# variant: " << to_string(traj.variant) << "\n";
    os << "# integrator: " << traj.integrator << "\n";
    os << "# step: " << format_double(traj.step) << "\n";
    os << "# t_end: " << format_double(traj.t_end) << "\n";
    os << "# record_every: " << format_double(traj.record_every) << "\n";
    for (const auto& [k, v] : extra_meta) os << "# " << k << ": " << v << "\n";
    os << kTrajectoryHeader << "\n";
    for (const auto& s : traj.samples) {
        os << format_double(s.t);
        for (int i = 0; i < 3; ++i) os << ',' << format_double(s.q[i]);
        for (int i = 0; i < 3; ++i) os << ',' << format_double(s.qdot[i]);
        for (int i = 0; i < 3; ++i) os << ',' << format_double(s.qddot[i]);
        for (int i = 0; i < 3; ++i) os << ',' << format_double(s.tau[i]);
        os << ',' << format_double(s.kinetic) << ',' << format_double(s.potential) << ','
           << format_double(s.energy) << "\n";
    }
}

inline void write_trajectory_file(const std::string& path, const Trajectory& traj,
                                  const std::map<std::string, std::string>& meta = {}) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_trajectory(os, traj, meta);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        // trim whitespace
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_number(const std::string& cell, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": cannot parse number '" + cell + "'");
    }
}

// Reads a header-required CSV and returns the requested columns by name.
inline std::vector<std::vector<double>> read_csv_columns(
    const std::string& path, const std::vector<std::string>& wanted) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    std::string line;
    long lineno = 0;
    // skip metadata comments and blank lines before the header
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line[0] != '#') break;
    }
    if (line.empty()) throw ParseError(path + ": missing header row");
    auto header = split_csv_line(line);
    std::vector<std::size_t> idx;
    for (const auto& name : wanted) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw ParseError(path + ": missing required column '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    std::vector<std::vector<double>> cols(wanted.size());
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        for (std::size_t c = 0; c < wanted.size(); ++c) {
            if (idx[c] >= cells.size())
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": row too short for column '" + wanted[c] + "'");
            cols[c].push_back(
                parse_number(cells[idx[c]], path + ":" + std::to_string(lineno)));
        }
    }
    return cols;
}

}  // namespace detail

// Force-table CSV: columns t,F (header required); optional column T carries
// temperature metadata.
inline TableProfile load_force_table(const std::string& path) {
    auto cols = detail::read_csv_columns(path, {"t", "F"});
    TableProfile table;
    for (std::size_t i = 0; i < cols[0].size(); ++i)
        table.points.emplace_back(cols[0][i], cols[1][i]);
    validate_table(table);
    return table;
}

struct ReferenceSeries {
    std::vector<double> t;
    std::vector<Vec3> q;
};

// Reference trajectory CSV: columns t,q1,q2,q3 (header required).
inline ReferenceSeries load_reference(const std::string& path) {
    auto cols = detail::read_csv_columns(path, {"t", "q1", "q2", "q3"});
    ReferenceSeries ref;
    ref.t = cols[0];
    for (std::size_t i = 0; i < cols[0].size(); ++i)
        ref.q.push_back({cols[1][i], cols[2][i], cols[3][i]});
    return ref;
}

}  // namespace fingersim
