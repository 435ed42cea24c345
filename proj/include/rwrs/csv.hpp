#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "limits.hpp"
#include "stats.hpp"
#include "walks.hpp"

// CSV emission.  Pure functions of the structs they serialize: fixed
// column order, one header line, 17 significant digits for doubles (enough
// for exact round-trips), '\n' line ends, no locale dependence.

namespace rwrs {

inline std::string format_double(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("refusing to emit non-finite value");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw std::invalid_argument("bad numeric field: " + s);
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// ---------------------------------------------------------------------------

inline std::string emit_csv(const MomentCurve& c) {
    std::ostringstream os;
    os << "n,q,estimate,std_error,replicas\n";
    const std::string q = c.use_median ? "median" : format_double(c.q);
    for (const auto& pt : c.points)
        os << pt.n << ',' << q << ',' << format_double(pt.estimate) << ','
           << format_double(pt.std_error) << ',' << pt.replicas << '\n';
    return os.str();
}

inline MomentCurve parse_moment_curve_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "n,q,estimate,std_error,replicas")
        throw std::invalid_argument("moment curve CSV: bad header");
    MomentCurve c;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw std::invalid_argument("moment curve CSV: bad row: " + line);
        MomentCurvePoint pt;
        pt.n = std::strtoull(f[0].c_str(), nullptr, 10);
        if (first) {
            c.use_median = (f[1] == "median");
            if (!c.use_median) c.q = parse_double(f[1]);
            first = false;
        }
        pt.estimate = parse_double(f[2]);
        pt.std_error = parse_double(f[3]);
        pt.replicas = static_cast<std::uint32_t>(std::strtoul(f[4].c_str(), nullptr, 10));
        pt.degenerate = (pt.estimate == 0.0 && pt.std_error == 0.0);
        c.points.push_back(pt);
    }
    return c;
}

inline std::string emit_csv(const std::vector<LltPoint>& pts) {
    std::ostringstream os;
    os << "n,value,std_error,replicas,window\n";
    for (const auto& p : pts)
        os << p.n << ',' << format_double(p.value) << ',' << format_double(p.std_error) << ','
           << p.replicas << ',' << p.window << '\n';
    return os.str();
}

inline std::string emit_csv(const LatticePath& path) {
    std::ostringstream os;
    os << "step,value\n";
    for (std::size_t k = 0; k < path.size(); ++k) os << k << ',' << path[k] << '\n';
    return os.str();
}

inline std::string emit_csv(const TowerPath& t) {
    std::ostringstream os;
    os << "step";
    const int ints = static_cast<int>(t.int_levels.size());
    for (int q = 1; q <= ints; ++q) os << ",level" << q;
    if (t.has_real_top()) os << ",level" << t.depth;
    os << '\n';
    const std::size_t len = t.int_levels.empty() ? t.real_top.size() : t.int_levels[0].size();
    for (std::size_t k = 0; k < len; ++k) {
        os << k;
        for (const auto& lv : t.int_levels) os << ',' << lv[k];
        if (t.has_real_top()) os << ',' << format_double(t.real_top[k]);
        os << '\n';
    }
    return os.str();
}

inline std::string emit_csv(const Path3D& p) {
    std::ostringstream os;
    os << "step,x,y,z\n";
    for (std::size_t k = 0; k < p.x.size(); ++k)
        os << k << ',' << p.x[k] << ',' << p.y[k] << ',' << p.z[k] << '\n';
    return os.str();
}

inline std::string emit_csv(const LocalTimeTable& t) {
    std::ostringstream os;
    os << "site,count\n";
    t.for_each([&](std::int64_t s, std::uint64_t c) { os << s << ',' << c << '\n'; });
    return os.str();
}

inline std::string emit_csv(const GridProcess& p) {
    std::ostringstream os;
    os << "step,time,value\n";
    for (std::size_t k = 0; k < p.values.size(); ++k)
        os << k << ',' << format_double(p.dt * static_cast<double>(k)) << ','
           << format_double(p.values[k]) << '\n';
    return os.str();
}

inline std::string emit_csv(const LocalTimeField& f) {
    std::ostringstream os;
    os << "time,bin,bin_left,value\n";
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        const auto& row = f.rows[i];
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] == 0.0) continue;
            const std::int64_t bin = f.bin_lo + static_cast<std::int64_t>(j);
            os << format_double(f.times[i]) << ',' << bin << ','
               << format_double(f.origin + f.h * static_cast<double>(bin)) << ','
               << format_double(row[j]) << '\n';
        }
    }
    return os.str();
}

} // namespace rwrs
