#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wavebench/control.hpp"
#include "wavebench/decay.hpp"
#include "wavebench/rays.hpp"

namespace wb {

using json = nlohmann::json;

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (f.get(c)) {
        h ^= std::uint64_t(std::uint8_t(c));
        h *= 1099511628211ull;
    }
    return h;
}

/// Collects emitted files and finalizes a manifest.json in the run directory.
struct RunManifest {
    std::filesystem::path dir;
    std::string command;
    std::string scenario;
    json params = json::object();
    json timings = json::object();
    std::vector<std::filesystem::path> outputs;

    explicit RunManifest(std::filesystem::path d) : dir(std::move(d)) {
        std::filesystem::create_directories(dir);
    }
    std::filesystem::path path(const std::string& name) const { return dir / name; }
    void note(const std::filesystem::path& p) { outputs.push_back(p); }

    void finalize() {
        json files = json::array();
        for (const auto& p : outputs) {
            char hex[24];
            std::snprintf(hex, sizeof(hex), "%016" PRIx64, fnv1a64_file(p));
            files.push_back({{"path", p.filename().string()},
                             {"bytes", std::filesystem::file_size(p)},
                             {"fnv1a64", hex}});
        }
        json m = {{"command", command},
                  {"scenario", scenario},
                  {"params", params},
                  {"timings_ms", timings},
                  {"outputs", files}};
        std::ofstream f(path("manifest.json"));
        f << m.dump(2) << "\n";
    }
};

// ---------------------------------------------------------------------------
// CSV emitters
// ---------------------------------------------------------------------------

inline void write_energy_csv(const std::filesystem::path& p,
                             const std::vector<std::array<double, 3>>& rows) {
    std::ofstream f(p);
    f << "t,E_grad,E_kin\n";
    for (const auto& r : rows)
        f << fmt_g(r[0]) << "," << fmt_g(r[1]) << "," << fmt_g(r[2]) << "\n";
}

inline const char* region_name(Region r) {
    switch (r) {
        case Region::All: return "all";
        case Region::BallA: return "B_a";
        case Region::OmegaStar: return "omega_star";
        case Region::Collar: return "omega_star_delta";
    }
    return "?";
}

inline void write_decay_csv(const std::filesystem::path& p,
                            const std::vector<DecaySeries>& runs) {
    std::ofstream f(p);
    f << "run_id,t,E_local,E_initial,ratio,region,convention\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& s = runs[r];
        for (std::size_t i = 0; i < s.samples.size(); ++i) {
            for (auto conv : {RatioConvention::Energy, RatioConvention::Amplitude}) {
                const double num = DecaySeries::value(s.samples[i], conv);
                const double den = DecaySeries::value(s.initial, conv);
                f << r << "," << fmt_g(s.samples[i].t) << "," << fmt_g(num) << ","
                  << fmt_g(den) << "," << fmt_g(num / den) << "," << region_name(s.region)
                  << ","
                  << (conv == RatioConvention::Energy ? "energy" : "amplitude") << "\n";
            }
        }
    }
}

inline json fit_to_json(const DecayFit& fit) {
    json j = {{"model", fit.exponential ? "exponential" : "power"},
              {"C", fit.C},
              {"window", {fit.t_lo, fit.t_hi}},
              {"residual", fit.residual},
              {"samples", fit.n}};
    if (fit.exponential)
        j["rate"] = fit.gamma;
    else
        j["slope"] = fit.slope;
    return j;
}

inline void write_rays_csv(const std::filesystem::path& p,
                           const std::vector<RayEvent>& events) {
    std::ofstream f(p);
    f << "ray_id,branch_id,event_index,t,x,y,event_type,zone,amplitude\n";
    std::map<std::pair<int, int>, int> counters;
    for (const auto& e : events) {
        const int idx = counters[{e.ray_id, e.branch_id}]++;
        f << e.ray_id << "," << e.branch_id << "," << idx << "," << fmt_g(e.t) << ","
          << fmt_g(e.x.x) << "," << fmt_g(e.x.y) << "," << to_string(e.type) << ","
          << e.zone << "," << fmt_g(e.amplitude) << "\n";
    }
}

inline void write_control_csv(const std::filesystem::path& p, const ControlSignal& sig) {
    std::ofstream f(p);
    f << "segment_id,s,t,u,dnu,g\n";
    for (const auto& seg : sig.segments) {
        for (int n = 0; n <= sig.steps; ++n) {
            const double t = sig.t0 + n * sig.dt;
            for (int i = 0; i < seg.n_s; ++i) {
                const std::size_t idx =
                    std::size_t(n) * std::size_t(seg.n_s) + std::size_t(i);
                f << seg.segment_id << "," << fmt_g(seg.s[std::size_t(i)]) << ","
                  << fmt_g(t) << "," << fmt_g(seg.u[idx]) << "," << fmt_g(seg.dnu[idx])
                  << "," << fmt_g(seg.g[idx]) << "\n";
            }
        }
    }
}

inline void write_control_meta(const std::filesystem::path& p, const ControlSignal& sig,
                               const json& extra) {
    json segs = json::array();
    for (const auto& seg : sig.segments)
        segs.push_back({{"id", seg.segment_id},
                        {"ds", seg.ds},
                        {"n_s", seg.n_s},
                        {"closed", seg.closed}});
    json j = {{"alpha", sig.alpha}, {"beta", sig.beta},   {"t0", sig.t0},
              {"dt", sig.dt},       {"steps", sig.steps}, {"segments", segs},
              {"l2_norm", sig.l2_norm}};
    j.update(extra);
    std::ofstream f(p);
    f << j.dump(2) << "\n";
}

/// Rebuild a control signal from control.csv plus its meta file. Only the
/// lattice and the g column are needed to drive a replay.
inline ControlSignal read_control(const std::filesystem::path& csv,
                                  const std::filesystem::path& meta) {
    std::ifstream mf(meta);
    if (!mf.good()) throw IncompatibleSignal("cannot open " + meta.string());
    json j;
    mf >> j;
    ControlSignal sig;
    sig.alpha = j.at("alpha").get<double>();
    sig.beta = j.at("beta").get<double>();
    sig.t0 = j.at("t0").get<double>();
    sig.dt = j.at("dt").get<double>();
    sig.steps = j.at("steps").get<int>();
    for (const auto& s : j.at("segments")) {
        SegmentTrace tr;
        tr.segment_id = s.at("id").get<int>();
        tr.ds = s.at("ds").get<double>();
        tr.n_s = s.at("n_s").get<int>();
        tr.closed = s.at("closed").get<bool>();
        tr.u.assign(std::size_t(sig.steps + 1) * std::size_t(tr.n_s), 0.0);
        tr.dnu = tr.u;
        tr.g = tr.u;
        for (int i = 0; i < tr.n_s; ++i) tr.s.push_back((i + 0.5) * tr.ds);
        sig.segments.push_back(std::move(tr));
    }
    std::ifstream f(csv);
    if (!f.good()) throw IncompatibleSignal("cannot open " + csv.string());
    std::string line;
    std::getline(f, line);  // header
    std::size_t row = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        int seg_id;
        double s, t, u, dnu, g;
        if (!(ss >> seg_id >> s >> t >> u >> dnu >> g))
            throw IncompatibleSignal("malformed control.csv row " + std::to_string(row));
        SegmentTrace* tr = nullptr;
        for (auto& sg : sig.segments)
            if (sg.segment_id == seg_id) tr = &sg;
        if (!tr) throw IncompatibleSignal("unknown segment id in control.csv");
        const int n = int(std::llround((t - sig.t0) / sig.dt));
        const int i = int(std::llround(s / tr->ds - 0.5));
        if (n < 0 || n > sig.steps || i < 0 || i >= tr->n_s)
            throw IncompatibleSignal("control.csv sample off the lattice");
        const std::size_t idx = std::size_t(n) * std::size_t(tr->n_s) + std::size_t(i);
        tr->u[idx] = u;
        tr->dnu[idx] = dnu;
        tr->g[idx] = g;
        ++row;
    }
    double l2 = 0.0;
    for (const auto& seg : sig.segments)
        for (double gv : seg.g) l2 += gv * gv * seg.ds * sig.dt;
    sig.l2_norm = std::sqrt(l2);
    return sig;
}

// ---------------------------------------------------------------------------
// grid snapshots
// ---------------------------------------------------------------------------

/// Text: one header line "nx ny dx dt t field", then ny rows of nx values.
/// Binary: the same header line, then nx*ny little-endian doubles row-major.
inline void write_snapshot(const std::filesystem::path& p, const GridField& f,
                           double dt, double t, const std::string& field,
                           bool binary = false) {
    std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
    out << f.grid.nx << " " << f.grid.ny << " " << fmt_g(f.grid.h) << " " << fmt_g(dt)
        << " " << fmt_g(t) << " " << field << "\n";
    if (binary) {
        out.write(reinterpret_cast<const char*>(f.v.data()),
                  std::streamsize(f.v.size() * sizeof(double)));
    } else {
        for (int j = 0; j < f.grid.ny; ++j) {
            for (int i = 0; i < f.grid.nx; ++i) {
                out << fmt_g(f(i, j));
                out << (i + 1 == f.grid.nx ? "\n" : " ");
            }
        }
    }
}

inline json synthesis_to_json(const SynthesisReport& r) {
    return {{"iterations", r.iterations},
            {"residuals", r.residuals},
            {"rho_estimate", r.rho_estimate},
            {"terminal_rel_energy", r.terminal_rel_energy},
            {"pipeline_rel_energy", r.pipeline_rel_energy},
            {"control_l2_norm", r.control_l2_norm},
            {"T", r.T},
            {"alpha", r.alpha},
            {"beta", r.beta},
            {"grid", r.grid_h},
            {"dt", r.dt},
            {"timings_ms",
             {{"fixed_point", r.ms_fixed_point},
              {"final_solve", r.ms_final_solve},
              {"trace", r.ms_trace},
              {"replay", r.ms_replay}}}};
}

}  // namespace wb
