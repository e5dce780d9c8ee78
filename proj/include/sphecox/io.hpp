#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphecox/cox.hpp"
#include "sphecox/distances.hpp"
#include "sphecox/field.hpp"
#include "sphecox/summaries.hpp"

namespace sphecox {

// shortest round-trippable decimal form
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// write to a temp file, then rename: never leaves a half-written target
inline void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("write_text_atomic: cannot open " + tmp);
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write_text_atomic: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("write_text_atomic: rename failed for " + path);
    }
}

namespace detail {
inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    if (!cur.empty())
        lines.push_back(cur);
    return lines;
}

inline std::vector<double> split_doubles(const std::string& line) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t next = line.find(',', pos);
        if (next == std::string::npos)
            next = line.size();
        const std::string tok = line.substr(pos, next - pos);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str())
            throw std::runtime_error("csv parse: bad number '" + tok + "'");
        out.push_back(v);
        pos = next + 1;
        if (next == line.size())
            break;
    }
    return out;
}
}

inline std::string format_pattern_csv(const PointPattern& p) {
    std::string s = "t,x,y,z\n";
    for (const Event& e : p.events) {
        s += format_double(e.t);
        s += ',';
        s += format_double(e.z.x);
        s += ',';
        s += format_double(e.z.y);
        s += ',';
        s += format_double(e.z.z);
        s += '\n';
    }
    return s;
}

inline PointPattern parse_pattern_csv(const std::string& text, double t0, double t1) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || lines[0] != "t,x,y,z")
        throw std::runtime_error("parse_pattern_csv: missing t,x,y,z header");
    PointPattern p;
    p.t0 = t0;
    p.t1 = t1;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        const auto v = detail::split_doubles(lines[i]);
        if (v.size() != 4)
            throw std::runtime_error("parse_pattern_csv: expected 4 columns");
        p.events.push_back(Event{v[0], SpherePoint::from_unit(v[1], v[2], v[3])});
    }
    return p;
}

// coefficient paths as (degree, time, value) rows
inline std::string format_field_csv(const FieldRealization& f) {
    std::string s = "l,t,v\n";
    for (int l = 0; l <= f.model.truncation; ++l)
        for (int k = 0; k < f.grid.nodes; ++k) {
            s += std::to_string(l);
            s += ',';
            s += format_double(f.grid.node(k));
            s += ',';
            s += format_double(f.coeffs(l, k));
            s += '\n';
        }
    return s;
}

// rebuild a realization from the CSV body plus the sidecar quantities
inline FieldRealization parse_field_csv(const std::string& text, const CovarianceModel& model,
                                        const TimeGrid& grid, const SpherePoint& pole,
                                        std::uint64_t seed, double jitter_used) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || lines[0] != "l,t,v")
        throw std::runtime_error("parse_field_csv: missing l,t,v header");
    FieldRealization f;
    f.model = model;
    f.grid = grid;
    f.pole = pole;
    f.seed = seed;
    f.jitter_used = jitter_used;
    f.coeffs = Eigen::MatrixXd::Zero(model.truncation + 1, grid.nodes);
    std::size_t row = 1;
    for (int l = 0; l <= model.truncation; ++l)
        for (int k = 0; k < grid.nodes; ++k, ++row) {
            if (row >= lines.size())
                throw std::runtime_error("parse_field_csv: truncated file");
            const auto v = detail::split_doubles(lines[row]);
            if (v.size() != 3 || static_cast<int>(v[0]) != l)
                throw std::runtime_error("parse_field_csv: unexpected row layout");
            f.coeffs(l, k) = v[2];
        }
    return f;
}

// axis-labelled matrix: first row lists time nodes, first column distances
inline std::string format_kgrid_csv(const KGrid& g, bool errors = false) {
    const Eigen::MatrixXd& m = errors ? g.std_errors : g.values;
    std::string s = "theta\\t";
    for (double t : g.ts) {
        s += ',';
        s += format_double(t);
    }
    s += '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        s += format_double(g.thetas[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            s += ',';
            s += format_double(m(i, j));
        }
        s += '\n';
    }
    return s;
}

inline std::string format_shannon_csv(const DistanceTable& t) {
    std::string s = "q,value,std_error,value_rel,se_rel,value_raw,se_raw\n";
    for (const auto& row : t.rows) {
        s += std::to_string(row.q);
        for (double v : {row.shannon.value, row.shannon.std_error, row.shannon.value_rel,
                         row.shannon.se_rel, row.shannon.value_raw, row.shannon.se_raw}) {
            s += ',';
            s += format_double(v);
        }
        s += '\n';
    }
    return s;
}

inline std::string format_renyi_csv(const DistanceTable& t) {
    std::string s = "q,h,value,std_error,value_rel,se_rel,value_raw,se_raw,ci,ci_rel\n";
    for (const auto& row : t.rows)
        for (std::size_t j = 0; j < t.h_orders.size(); ++j) {
            const DistanceEstimate& d = row.renyi[j];
            s += std::to_string(row.q);
            s += ',';
            s += format_double(t.h_orders[j]);
            for (double v : {d.value, d.std_error, d.value_rel, d.se_rel, d.value_raw,
                             d.se_raw, clustering_index(d.value),
                             clustering_index(d.value_rel)}) {
                s += ',';
                s += format_double(v);
            }
            s += '\n';
        }
    return s;
}

}
