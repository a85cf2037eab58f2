#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "windsim/common.hpp"

namespace windsim {

struct ClCd {
    double cl = 0.0;
    double cd = 0.0;
};

// Tabulated lift/drag coefficients vs angle of attack. The table is treated
// as periodic in alpha and must cover [-pi, pi].
struct AirfoilPolar {
    std::string name;
    std::vector<double> alpha;  // radians, strictly increasing
    std::vector<double> cl;
    std::vector<double> cd;

    void validate() const {
        if (alpha.size() < 2 || cl.size() != alpha.size() || cd.size() != alpha.size())
            throw ConfigError("polar '" + name + "': alpha, cl, cd must have equal length >= 2");
        for (std::size_t i = 1; i < alpha.size(); ++i)
            if (!(alpha[i] > alpha[i - 1]))
                throw ConfigError("polar '" + name + "': alpha not strictly increasing");
        for (double a : alpha)
            if (!std::isfinite(a))
                throw ConfigError("polar '" + name + "': non-finite alpha");
        for (std::size_t i = 0; i < cd.size(); ++i) {
            if (!std::isfinite(cl[i]) || !std::isfinite(cd[i]))
                throw ConfigError("polar '" + name + "': non-finite coefficient");
            if (cd[i] < 0.0)
                throw ConfigError("polar '" + name + "': negative cd");
        }
        const double tol = 1e-9;
        if (alpha.front() > -kPi + tol || alpha.back() < kPi - tol)
            throw ConfigError("polar '" + name + "': table must span [-180, 180] deg");
    }
};

// Piecewise-linear lookup after periodic wrap of alpha. Total for finite
// alpha; exact at sample points.
inline ClCd lookup_cl_cd(const AirfoilPolar& polar, double alpha) {
    double a = wrap_angle(alpha);
    a = std::clamp(a, polar.alpha.front(), polar.alpha.back());
    auto it = std::upper_bound(polar.alpha.begin(), polar.alpha.end(), a);
    std::size_t hi = static_cast<std::size_t>(it - polar.alpha.begin());
    if (hi == 0) hi = 1;
    if (hi == polar.alpha.size()) hi = polar.alpha.size() - 1;
    const std::size_t lo = hi - 1;
    if (a == polar.alpha[lo]) return {polar.cl[lo], polar.cd[lo]};
    if (a == polar.alpha[hi]) return {polar.cl[hi], polar.cd[hi]};
    const double t = (a - polar.alpha[lo]) / (polar.alpha[hi] - polar.alpha[lo]);
    return {polar.cl[lo] + t * (polar.cl[hi] - polar.cl[lo]),
            polar.cd[lo] + t * (polar.cd[hi] - polar.cd[lo])};
}

struct BladeStation {
    double r = 0.0;      // radius from hub center (m)
    double chord = 0.0;  // m
    double twist = 0.0;  // radians
    std::size_t polar_index = 0;
};

struct BladeDefinition {
    std::vector<AirfoilPolar> polars;
    std::vector<BladeStation> stations;
    double root_radius = 0.0;  // m
    double tip_radius = 0.0;   // m
    int num_blades = 0;

    void validate() const {
        if (num_blades < 1) throw ConfigError("blade: num_blades must be >= 1");
        if (!(root_radius >= 0.0) || !(tip_radius > root_radius))
            throw ConfigError("blade: require 0 <= root_radius < tip_radius");
        if (stations.size() < 2) throw ConfigError("blade: need at least 2 stations");
        for (std::size_t i = 0; i < stations.size(); ++i) {
            const auto& s = stations[i];
            if (i > 0 && !(s.r > stations[i - 1].r))
                throw ConfigError("blade: non-monotonic station radii");
            if (s.r < root_radius || s.r > tip_radius)
                throw ConfigError("blade: station radius outside [root_radius, tip_radius]");
            if (!(s.chord > 0.0)) throw ConfigError("blade: chord must be positive");
            if (s.polar_index >= polars.size())
                throw ConfigError("blade: station references unknown polar");
        }
        for (const auto& p : polars) p.validate();
    }
};

// Chord/twist at radius r plus the two bracketing polars and blend weight.
// Outside the station range (but within [root, tip]) the nearest station's
// values are held constant.
struct StationGeometry {
    double chord = 0.0;
    double twist = 0.0;
    std::size_t polar_a = 0;
    std::size_t polar_b = 0;
    double blend = 0.0;  // 0 -> polar_a, 1 -> polar_b
};

inline StationGeometry interpolate_station(const BladeDefinition& blade, double r) {
    if (r < blade.root_radius || r > blade.tip_radius)
        throw ConfigError("interpolate_station: r outside [root_radius, tip_radius]");
    const auto& st = blade.stations;
    if (r <= st.front().r)
        return {st.front().chord, st.front().twist, st.front().polar_index,
                st.front().polar_index, 0.0};
    if (r >= st.back().r)
        return {st.back().chord, st.back().twist, st.back().polar_index,
                st.back().polar_index, 0.0};
    std::size_t hi = 1;
    while (st[hi].r < r) ++hi;
    const auto& a = st[hi - 1];
    const auto& b = st[hi];
    if (r == a.r) return {a.chord, a.twist, a.polar_index, a.polar_index, 0.0};
    if (r == b.r) return {b.chord, b.twist, b.polar_index, b.polar_index, 0.0};
    const double t = (r - a.r) / (b.r - a.r);
    return {a.chord + t * (b.chord - a.chord), a.twist + t * (b.twist - a.twist),
            a.polar_index, b.polar_index, t};
}

// Blended coefficient lookup: linear in the sampled (cl, cd) at fixed alpha.
inline ClCd lookup_cl_cd(const BladeDefinition& blade, const StationGeometry& g, double alpha) {
    const ClCd a = lookup_cl_cd(blade.polars[g.polar_a], alpha);
    if (g.blend == 0.0) return a;
    const ClCd b = lookup_cl_cd(blade.polars[g.polar_b], alpha);
    return {a.cl + g.blend * (b.cl - a.cl), a.cd + g.blend * (b.cd - a.cd)};
}

namespace detail {

// Strips a trailing comment and surrounding whitespace; empty result means
// the line carries no data.
inline std::string strip_line(const std::string& line) {
    std::string s = line;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_key_double(const std::string& tok, const std::string& key, double& out) {
    if (tok.rfind(key + "=", 0) != 0) return false;
    try {
        std::size_t used = 0;
        const std::string val = tok.substr(key.size() + 1);
        out = std::stod(val, &used);
        return used == val.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace detail

// Loads one polar file: header "polar name=<id>", then rows "alpha_deg cl cd".
inline AirfoilPolar load_polar(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open polar file: " + path.string());
    AirfoilPolar polar;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::strip_line(line);
        if (s.empty()) continue;
        if (!have_header) {
            std::istringstream iss(s);
            std::string tag, name_tok;
            iss >> tag >> name_tok;
            if (tag != "polar" || name_tok.rfind("name=", 0) != 0)
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": expected header 'polar name=<id>'");
            polar.name = name_tok.substr(5);
            have_header = true;
            continue;
        }
        std::istringstream iss(s);
        double ad = 0.0, cl = 0.0, cd = 0.0;
        if (!(iss >> ad >> cl >> cd))
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'alpha_deg cl cd'");
        polar.alpha.push_back(deg2rad(ad));
        polar.cl.push_back(cl);
        polar.cd.push_back(cd);
    }
    if (!have_header) throw ConfigError(path.string() + ": missing polar header");
    polar.validate();
    return polar;
}

// Loads a blade definition file. Header line:
//   blade root_radius_m=<v> tip_radius_m=<v> num_blades=<n>
// then one row per station: "r_m chord_m twist_deg polar_file", where
// polar_file is relative to the blade file's directory.
inline BladeDefinition load_blade(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open blade file: " + path.string());
    const std::filesystem::path dir = path.parent_path();

    BladeDefinition blade;
    std::map<std::string, std::size_t> polar_by_file;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::strip_line(line);
        if (s.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (!have_header) {
            std::istringstream iss(s);
            std::string tag;
            iss >> tag;
            if (tag != "blade")
                throw ConfigError(where + ": expected blade header line");
            double root = -1.0, tip = -1.0, nb = -1.0;
            std::string tok;
            while (iss >> tok) {
                if (detail::parse_key_double(tok, "root_radius_m", root)) continue;
                if (detail::parse_key_double(tok, "tip_radius_m", tip)) continue;
                if (detail::parse_key_double(tok, "num_blades", nb)) continue;
                throw ConfigError(where + ": unknown header token '" + tok + "'");
            }
            if (root < 0.0 || tip < 0.0 || nb < 0.0)
                throw ConfigError(where + ": header must set root_radius_m, tip_radius_m, num_blades");
            blade.root_radius = root;
            blade.tip_radius = tip;
            blade.num_blades = static_cast<int>(nb);
            have_header = true;
            continue;
        }
        std::istringstream iss(s);
        double r = 0.0, chord = 0.0, twist_deg = 0.0;
        std::string polar_file;
        if (!(iss >> r >> chord >> twist_deg >> polar_file))
            throw ConfigError(where + ": expected 'r_m chord_m twist_deg polar_file'");
        auto it = polar_by_file.find(polar_file);
        std::size_t idx;
        if (it == polar_by_file.end()) {
            idx = blade.polars.size();
            blade.polars.push_back(load_polar(dir / polar_file));
            polar_by_file.emplace(polar_file, idx);
        } else {
            idx = it->second;
        }
        blade.stations.push_back({r, chord, deg2rad(twist_deg), idx});
    }
    if (!have_header) throw ConfigError(path.string() + ": missing blade header");
    blade.validate();
    return blade;
}

}  // namespace windsim
