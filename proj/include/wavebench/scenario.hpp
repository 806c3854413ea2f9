#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wavebench/geometry.hpp"

namespace wb {

/// Wave speed of one medium: constant, or a smooth radial ramp about the origin
/// (speed c0 for r <= r0, c1 for r >= r1, quintic blend between).
struct SpeedProfile {
    double c0 = 1.0;
    double c1 = 1.0;
    double r0 = 0.0;
    double r1 = 0.0;
    bool radial = false;

    double at(Vec2 p) const {
        if (!radial || r1 <= r0) return c0;
        const double s = (norm(p) - r0) / (r1 - r0);
        return c0 + (c1 - c0) * smoothstep5(s);
    }
    bool constant() const { return !radial; }
};

/// Coefficients of one transmission medium.
struct Medium {
    SpeedProfile speed;
    Mat2 g = Mat2::identity();
};

struct ControlRegionSpec {
    Shape shape;
    double delta = 0.0;  // collar width; 0 = use 10% of diameter
};

struct BoxSpec {
    double x0 = -1, y0 = -1, x1 = 1, y1 = 1;
    double min_half() const {
        return std::min(std::min(-x0, x1), std::min(-y0, y1));
    }
};

struct RunDefaults {
    double T = 4.0;
    std::vector<double> T_ladder;
    double alpha = 1.0;
    double beta = 1.0;
    double tol = 1e-6;
    unsigned seed = 7;
    int bumps = 2;
    double t_max = 16.0;
    int samples = 24;
};

struct Scenario {
    std::string name;
    std::vector<Shape> obstacles;
    std::vector<Shape> zones;   // outermost-first, strictly nested
    std::optional<ControlRegionSpec> region;
    std::vector<Medium> media;  // innermost-first; media.size() == zones.size()
    double a = 1.0;             // measurement-ball radius
    BoxSpec box;
    double spacing = 0.1;
    RunDefaults defaults;

    int zone_count() const { return int(zones.size()); }

    bool in_obstacle(Vec2 p) const {
        for (const auto& k : obstacles)
            if (contains(k, p)) return true;
        return false;
    }

    /// Medium index at p: 1..N0 from the innermost outward, N0+1 = exterior.
    int medium_index(Vec2 p) const {
        int inside = 0;
        for (const auto& z : zones)
            if (contains(z, p)) ++inside;
        return zone_count() - inside + 1;
    }

    /// (wave speed, metric) at p. Exterior medium is (1, I) by construction.
    std::pair<double, Mat2> coefficient_at(Vec2 p) const {
        if (in_obstacle(p)) throw PointInObstacle("point inside the obstacle");
        const int m = medium_index(p);
        if (m > zone_count()) return {1.0, Mat2::identity()};
        const Medium& mm = media[std::size_t(m - 1)];
        return {mm.speed.at(p), mm.g};
    }

    double max_speed() const {
        double c = 1.0;
        for (const auto& m : media)
            c = std::max(c, std::max(m.speed.c0, m.speed.c1) *
                                std::sqrt(m.g.max_eigenvalue()));
        return c;
    }

    /// Max speed over {|x| >= r}; all structure sits inside the zone shapes.
    double max_speed_beyond(double r) const {
        double c = 1.0;
        for (std::size_t k = 0; k < zones.size(); ++k) {
            if (bounding_radius(zones[k]) >= r) {
                // media inside this shape can extend out to its boundary
                for (std::size_t m = 0; m < media.size(); ++m) {
                    const auto& mm = media[m];
                    c = std::max(c, std::max(mm.speed.c0, mm.speed.c1) *
                                        std::sqrt(mm.g.max_eigenvalue()));
                }
                break;
            }
        }
        return c;
    }

    double region_delta() const {
        if (!region) throw ConfigError("scenario has no control region");
        return region->delta > 0 ? region->delta : 0.1 * shape_diameter(region->shape);
    }
};

// ---------------------------------------------------------------------------
// scenario text format
// ---------------------------------------------------------------------------

namespace detail {

struct Section {
    std::string name;
    std::map<std::string, std::vector<std::string>> kv;
    int line = 0;

    bool has(const std::string& k) const { return kv.count(k) > 0; }

    const std::vector<std::string>& tokens(const std::string& k) const {
        auto it = kv.find(k);
        if (it == kv.end())
            throw ConfigError("missing key '" + k + "' in section [" + name + "]");
        return it->second;
    }
    double number(const std::string& k, std::size_t idx = 0) const {
        const auto& t = tokens(k);
        if (idx >= t.size())
            throw ConfigError("key '" + k + "' in [" + name + "]: expected more values");
        try {
            std::size_t pos = 0;
            const double v = std::stod(t[idx], &pos);
            if (pos != t[idx].size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + k + "' in [" + name + "]: '" + t[idx] +
                              "' is not a number");
        }
    }
    std::vector<double> numbers(const std::string& k) const {
        const auto& t = tokens(k);
        std::vector<double> out;
        for (std::size_t i = 0; i < t.size(); ++i) out.push_back(number(k, i));
        return out;
    }
    std::string word(const std::string& k) const { return tokens(k).at(0); }
};

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<Section> parse_sections(const std::string& text) {
    std::vector<Section> sections;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    Section* cur = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            std::string name = line;
            while (!name.empty() && (name.front() == '[')) name.erase(name.begin());
            while (!name.empty() && (name.back() == ']')) name.pop_back();
            name = trim(name);
            if (name.empty()) throw ConfigError("empty section header at line " +
                                                std::to_string(lineno));
            sections.push_back(Section{name, {}, lineno});
            cur = &sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value' at line " + std::to_string(lineno) +
                              ": '" + line + "'");
        if (!cur)
            throw ConfigError("key outside any section at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        std::string rest = trim(line.substr(eq + 1));
        for (auto& ch : rest)
            if (ch == ',') ch = ' ';
        std::vector<std::string> toks;
        std::istringstream ts(rest);
        std::string tok;
        while (ts >> tok) toks.push_back(tok);
        if (key.empty() || toks.empty())
            throw ConfigError("malformed 'key = value' at line " + std::to_string(lineno));
        if (cur->kv.count(key))
            throw ConfigError("duplicate key '" + key + "' in section [" + cur->name + "]");
        cur->kv[key] = toks;
    }
    return sections;
}

inline Shape parse_shape(const Section& s) {
    const std::string kind = s.word("shape");
    if (kind == "disc" || kind == "circle") {
        Disc d;
        d.center = {s.number("center", 0), s.number("center", 1)};
        d.radius = s.number("radius");
        if (d.radius <= 0) throw ConfigError("key 'radius' in [" + s.name + "] must be > 0");
        return d;
    }
    if (kind == "ellipse") {
        Ellipse e;
        e.center = {s.number("center", 0), s.number("center", 1)};
        e.rx = s.number("rx");
        e.ry = s.number("ry");
        if (e.rx <= 0 || e.ry <= 0)
            throw ConfigError("keys 'rx'/'ry' in [" + s.name + "] must be > 0");
        return e;
    }
    if (kind == "polygon") {
        Polygon p;
        const auto vals = s.numbers("vertices");
        if (vals.size() < 6 || vals.size() % 2 != 0)
            throw ConfigError("key 'vertices' in [" + s.name +
                              "] needs >= 3 x,y pairs");
        for (std::size_t i = 0; i + 1 < vals.size(); i += 2)
            p.vertices.push_back({vals[i], vals[i + 1]});
        // normalize to CCW
        double area2 = 0.0;
        for (std::size_t i = 0; i < p.vertices.size(); ++i) {
            const Vec2 a = p.vertices[i];
            const Vec2 b = p.vertices[(i + 1) % p.vertices.size()];
            area2 += cross(a, b);
        }
        if (area2 < 0) std::reverse(p.vertices.begin(), p.vertices.end());
        return p;
    }
    throw ConfigError("key 'shape' in [" + s.name + "]: unknown shape '" + kind + "'");
}

}  // namespace detail

inline void validate_scenario(const Scenario& sc) {
    const double res = 0.02 * std::max(1.0, sc.a);
    // zones strictly nested, outermost first
    for (std::size_t k = 0; k + 1 < sc.zones.size(); ++k) {
        const auto inner_pts = boundary_polyline(sc.zones[k + 1], res);
        double sep = std::numeric_limits<double>::max();
        for (const auto& p : inner_pts) {
            if (!contains(sc.zones[k], p))
                throw InvalidNesting("zone " + std::to_string(k + 2) +
                                     " is not contained in zone " + std::to_string(k + 1));
            sep = std::min(sep, boundary_distance(sc.zones[k], p, res));
        }
        if (sep <= 0)
            throw InvalidNesting("consecutive zone boundaries touch");
    }
    // every zone strictly contains every obstacle
    for (const auto& z : sc.zones)
        for (const auto& k : sc.obstacles) {
            const auto pts = boundary_polyline(k, res);
            for (const auto& p : pts)
                if (!contains(z, p))
                    throw InvalidNesting("obstacle is not contained in all zones");
        }
    if (!sc.zones.empty() && sc.media.size() != sc.zones.size())
        throw ConfigError("key 'c' in [coefficients]: expected " +
                          std::to_string(sc.zones.size()) + " media values, got " +
                          std::to_string(sc.media.size()));
    for (const auto& m : sc.media) {
        if (m.speed.c0 <= 0 || m.speed.c1 <= 0)
            throw ConfigError("key 'c' in [coefficients]: speeds must be > 0");
        if (m.g.min_eigenvalue() <= 0)
            throw ConfigError("metric in [coefficients] is not positive definite");
    }
    if (!sc.zones.empty() && bounding_radius(sc.zones.front()) >= sc.a)
        throw ConfigError("key 'a' in [grid]: B_a must contain the outermost zone");
    for (const auto& k : sc.obstacles)
        if (bounding_radius(k) >= sc.a)
            throw ConfigError("key 'a' in [grid]: B_a must contain the obstacle");
    if (sc.box.min_half() < sc.a)
        throw ConfigError("key 'box' in [grid]: box must contain B_a");
    if (sc.region) {
        const double rb = bounding_radius(sc.region->shape);
        if (rb >= sc.a)
            throw ConfigError("[control_region] must lie inside B_a");
        if (rb + sc.region_delta() > sc.a)
            throw ConfigError("[control_region] collar must stay inside B_a");
        // the obstacle is either strictly inside the region or disjoint from it
        for (const auto& k : sc.obstacles) {
            const auto pts = boundary_polyline(k, res);
            bool all_in = true, any_in = false;
            for (const auto& p : pts) {
                const bool in = contains(sc.region->shape, p);
                all_in = all_in && in;
                any_in = any_in || in;
            }
            if (any_in && !all_in)
                throw ConfigError("[control_region] boundary crosses the obstacle");
        }
    }
}

inline Scenario parse_scenario(const std::string& text, const std::string& name) {
    Scenario sc;
    sc.name = name;
    bool saw_grid = false, saw_coeffs = false;
    std::vector<Mat2> metrics;
    std::vector<SpeedProfile> profiles;
    for (const auto& s : detail::parse_sections(text)) {
        if (s.name == "obstacle" || s.name == "obstacles") {
            sc.obstacles.push_back(detail::parse_shape(s));
        } else if (s.name == "zones" || s.name == "zone") {
            sc.zones.push_back(detail::parse_shape(s));
        } else if (s.name == "control_region") {
            ControlRegionSpec r;
            r.shape = detail::parse_shape(s);
            if (s.has("delta")) r.delta = s.number("delta");
            sc.region = r;
        } else if (s.name == "grid") {
            saw_grid = true;
            sc.spacing = s.number("spacing");
            if (sc.spacing <= 0) throw ConfigError("key 'spacing' in [grid] must be > 0");
            const auto b = s.numbers("box");
            if (b.size() != 4)
                throw ConfigError("key 'box' in [grid] needs 4 numbers: x0 y0 x1 y1");
            sc.box = {b[0], b[1], b[2], b[3]};
            sc.a = s.number("a");
            for (const auto& [k, v] : s.kv)
                if (k != "spacing" && k != "box" && k != "a")
                    throw ConfigError("unknown key '" + k + "' in [grid]");
        } else if (s.name == "coefficients") {
            saw_coeffs = true;
            if (s.has("c")) {
                for (double c : s.numbers("c")) {
                    SpeedProfile p;
                    p.c0 = p.c1 = c;
                    profiles.push_back(p);
                }
            }
            auto parse_index = [](const std::string& k, std::size_t b, std::size_t n) {
                try {
                    std::size_t pos = 0;
                    const int idx = std::stoi(k.substr(b, n), &pos);
                    if (pos != std::min(n, k.size() - b) || idx < 1)
                        throw std::invalid_argument("bad");
                    return idx;
                } catch (const std::exception&) {
                    throw ConfigError("unknown key '" + k + "' in [coefficients]");
                }
            };
            for (const auto& [k, v] : s.kv) {
                if (k == "c") continue;
                if (k.size() > 9 && k.substr(k.size() - 8) == "_profile") {
                    const int idx = parse_index(k, 1, k.size() - 9);
                    const auto& t = s.tokens(k);
                    if (t.size() != 5 || t[0] != "radial")
                        throw ConfigError("key '" + k + "' must be: radial c0 c1 r0 r1");
                    SpeedProfile p;
                    p.radial = true;
                    p.c0 = s.number(k, 1);
                    p.c1 = s.number(k, 2);
                    p.r0 = s.number(k, 3);
                    p.r1 = s.number(k, 4);
                    if (int(profiles.size()) < idx) profiles.resize(std::size_t(idx));
                    profiles[std::size_t(idx - 1)] = p;
                } else if (k.size() > 1 && k[0] == 'g') {
                    const int idx = parse_index(k, 1, std::string::npos);
                    const auto g = s.numbers(k);
                    if (g.size() != 3)
                        throw ConfigError("key '" + k +
                                          "' in [coefficients] needs 3 numbers: gxx gxy gyy");
                    if (int(metrics.size()) < idx) metrics.resize(std::size_t(idx));
                    metrics[std::size_t(idx - 1)] = {g[0], g[1], g[2]};
                } else {
                    throw ConfigError("unknown key '" + k + "' in [coefficients]");
                }
            }
        } else if (s.name == "defaults") {
            auto& d = sc.defaults;
            if (s.has("T")) d.T = s.number("T");
            if (s.has("T_ladder")) d.T_ladder = s.numbers("T_ladder");
            if (s.has("alpha")) d.alpha = s.number("alpha");
            if (s.has("beta")) d.beta = s.number("beta");
            if (s.has("tol")) d.tol = s.number("tol");
            if (s.has("seed")) d.seed = unsigned(s.number("seed"));
            if (s.has("bumps")) d.bumps = int(s.number("bumps"));
            if (s.has("t_max")) d.t_max = s.number("t_max");
            if (s.has("samples")) d.samples = int(s.number("samples"));
        } else {
            throw ConfigError("unknown section [" + s.name + "] at line " +
                              std::to_string(s.line));
        }
    }
    if (!saw_grid) throw ConfigError("missing section [grid]");
    if (!sc.zones.empty() && !saw_coeffs)
        throw ConfigError("missing section [coefficients] (zones are present)");
    sc.media.resize(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) sc.media[i].speed = profiles[i];
    for (std::size_t i = 0; i < metrics.size() && i < sc.media.size(); ++i)
        sc.media[i].g = metrics[i];
    validate_scenario(sc);
    return sc;
}

// ---------------------------------------------------------------------------
// preset library
// ---------------------------------------------------------------------------

inline const std::vector<std::pair<std::string, const char*>>& preset_table() {
    static const std::vector<std::pair<std::string, const char*>> table = {
        {"free_space", R"(# free space: no obstacle, no zones
[control_region]
shape = disc
center = 0 0
radius = 0.8

[grid]
spacing = 0.08
box = -2.5 -2.5 2.5 2.5
a = 2.0

[defaults]
t_max = 20
samples = 24
seed = 7
bumps = 2
)"},
        {"convex_obstacle", R"(# single strictly convex obstacle
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[control_region]
shape = disc
center = 1.4 0
radius = 0.5

[grid]
spacing = 0.06
box = -3 -3 3 3
a = 2.5

[defaults]
t_max = 20
samples = 24
seed = 7
bumps = 2
)"},
        {"two_disc", R"(# two disjoint discs: the axis ray between them is trapped
[obstacle]
shape = disc
center = -1 0
radius = 0.5

[[obstacle]]
shape = disc
center = 1 0
radius = 0.5

[control_region]
shape = disc
center = 0 0
radius = 0.35

[grid]
spacing = 0.03
box = -3.5 -3.5 3.5 3.5
a = 3.0

[defaults]
T = 2.0
T_ladder = 0.8 1.4 2.0
alpha = 1
beta = 1
tol = 1e-6
seed = 7
bumps = 2
t_max = 12
)"},
        {"fig1a", R"(# control region strictly inside one transmission shell
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[[zones]]
shape = disc
center = 0 0
radius = 2.2

[[zones]]
shape = disc
center = 0 0
radius = 1.4

[control_region]
shape = disc
center = 1.8 0
radius = 0.35
delta = 0.5

[grid]
spacing = 0.04
box = -3.2 -3.2 3.2 3.2
a = 2.9

[coefficients]
c = 2 1.5

[defaults]
T = 6
T_ladder = 2 4 6
seed = 7
bumps = 2
t_max = 14
)"},
        {"fig1b", R"(# control region enclosing the inner shell; shares the obstacle boundary
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[[zones]]
shape = disc
center = 0 0
radius = 2.2

[[zones]]
shape = disc
center = 0 0
radius = 1.4

[control_region]
shape = disc
center = 0 0
radius = 1.8
delta = 0.5

[grid]
spacing = 0.04
box = -3.2 -3.2 3.2 3.2
a = 2.9

[coefficients]
c = 2 1.5

[defaults]
T = 6
seed = 7
bumps = 2
t_max = 14
)"},
        {"fig2", R"(# rectangular control region crossing both interfaces
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[[zones]]
shape = disc
center = 0 0
radius = 2.2

[[zones]]
shape = disc
center = 0 0
radius = 1.4

[control_region]
shape = polygon
vertices = 0.9 -0.5 2.6 -0.5 2.6 0.5 0.9 0.5
delta = 0.52

[grid]
spacing = 0.04
box = -3.8 -3.8 3.8 3.8
a = 3.3

[coefficients]
c = 2 1.5

[defaults]
T = 6
seed = 7
bumps = 2
t_max = 14
)"},
        {"fig3", R"(# annular control region around the obstacle; no control on the shared wall
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[[zones]]
shape = disc
center = 0 0
radius = 2.0

[control_region]
shape = disc
center = 0 0
radius = 1.2
delta = 0.5

[grid]
spacing = 0.04
box = -3 -3 3 3
a = 2.5

[coefficients]
c = 1.5

[defaults]
T = 6
seed = 7
bumps = 2
t_max = 14
)"},
        {"fig4a", R"(# two transmission shells, disc control region inside the outer shell
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[[zones]]
shape = disc
center = 0 0
radius = 2.4

[[zones]]
shape = disc
center = 0 0
radius = 1.5

[control_region]
shape = disc
center = 0 1.95
radius = 0.4
delta = 0.64

[grid]
spacing = 0.05
box = -3.2 -3.2 3.2 3.2
a = 3.0

[coefficients]
c = 2 1.5

[defaults]
T = 8
T_ladder = 2 4 8
alpha = 1
beta = 1
tol = 1e-6
seed = 7
bumps = 2
t_max = 16
)"},
        {"fig4b", R"(# control region enclosing the inner fast core
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[[zones]]
shape = disc
center = 0 0
radius = 2.4

[[zones]]
shape = disc
center = 0 0
radius = 1.5

[control_region]
shape = disc
center = 0 0
radius = 1.0
delta = 0.4

[grid]
spacing = 0.03
box = -3.2 -3.2 3.2 3.2
a = 3.0

[coefficients]
c = 2 1.5

[defaults]
T = 8
seed = 7
bumps = 2
t_max = 16
)"},
        {"fig5", R"(# rectangular control region crossing the inner interface
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[[zones]]
shape = disc
center = 0 0
radius = 2.4

[[zones]]
shape = disc
center = 0 0
radius = 1.5

[control_region]
shape = polygon
vertices = -0.35 0.7 0.35 0.7 0.35 2.0 -0.35 2.0
delta = 0.45

[grid]
spacing = 0.035
box = -3.2 -3.2 3.2 3.2
a = 3.0

[coefficients]
c = 2 1.5

[defaults]
T = 8
seed = 7
bumps = 2
t_max = 16
)"},
        {"radial_speed", R"(# smoothly varying radial speed inside a single shell
[obstacle]
shape = disc
center = 0 0
radius = 0.5

[[zones]]
shape = disc
center = 0 0
radius = 2.0

[control_region]
shape = disc
center = 1.2 0
radius = 0.45
delta = 0.5

[grid]
spacing = 0.04
box = -3 -3 3 3
a = 2.6

[coefficients]
c = 1.6
c1_profile = radial 1.6 1.0 0.5 2.0

[defaults]
T = 6
seed = 7
bumps = 2
t_max = 14
)"},
    };
    return table;
}

inline std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [n, t] : preset_table()) out.push_back(n);
    return out;
}

inline std::string preset_text(const std::string& name) {
    for (const auto& [n, t] : preset_table())
        if (n == name) return t;
    throw ConfigError("unknown preset '" + name + "'");
}

/// Load from a file path, or fall back to the named preset.
inline Scenario load_scenario(const std::string& path_or_preset) {
    std::ifstream f(path_or_preset);
    if (f.good()) {
        std::stringstream ss;
        ss << f.rdbuf();
        return parse_scenario(ss.str(), path_or_preset);
    }
    return parse_scenario(preset_text(path_or_preset), path_or_preset);
}

}  // namespace wb
