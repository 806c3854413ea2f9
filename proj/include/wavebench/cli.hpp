#pragma once

#include <iostream>

#include <CLI11.hpp>

#include "wavebench/io.hpp"
#include "wavebench/oracle.hpp"

namespace wb {

/// Zone map plus solver settings for one run, with the box grown so that no
/// wavefront reaches the wall within the run horizon.
struct Workspace {
    Scenario sc;
    ZoneMap zm;
    SolverConfig cfg;
};

inline BoxSpec expand_box_for_horizon(const Scenario& sc, double T, double h) {
    double r = sc.a;
    const int n = 4096;
    for (int i = 0; i < n; ++i) r += sc.max_speed_beyond(r) * (T / n);
    const double half = r * 1.02 + 6.0 * h;
    BoxSpec b = sc.box;
    b.x0 = std::min(b.x0, -half);
    b.y0 = std::min(b.y0, -half);
    b.x1 = std::max(b.x1, half);
    b.y1 = std::max(b.y1, half);
    return b;
}

inline Workspace make_workspace(const Scenario& sc, double horizon, double spacing = 0.0,
                                BcType obstacle_bc = BcType::Dirichlet) {
    Workspace w;
    w.sc = sc;
    const double h = spacing > 0 ? spacing : sc.spacing;
    w.zm = build_zone_map(sc, h, obstacle_bc, BcType::Dirichlet,
                          expand_box_for_horizon(sc, horizon, h));
    return w;
}

namespace cli {

inline std::filesystem::path default_out(const std::string& scenario,
                                         const std::string& command,
                                         const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    const char* root = std::getenv("WAVECTL_OUT_ROOT");
    std::filesystem::path base = root ? root : "runs";
    std::string stem = std::filesystem::path(scenario).stem().string();
    return base / (stem + "_" + command);
}

struct CommonArgs {
    std::string scenario;
    std::string out;
    double grid = 0.0;
    unsigned seed = 0;
    int bumps = 0;

    void attach(CLI::App* app, bool need_scenario = true) {
        auto* s = app->add_option("--scenario", scenario, "scenario file or preset name");
        if (need_scenario) s->required();
        app->add_option("--out", out, "output directory");
        app->add_option("--grid", grid, "grid spacing override");
        app->add_option("--seed", seed, "random seed override");
        app->add_option("--bumps", bumps, "number of random bumps per component");
    }

    Scenario load() const {
        Scenario sc = load_scenario(scenario);
        if (seed) sc.defaults.seed = seed;
        if (bumps) sc.defaults.bumps = bumps;
        return sc;
    }
};

inline int cmd_simulate(const CommonArgs& common, double T_flag, double dt_flag,
                        int snapshots, bool binary) {
    Scenario sc = common.load();
    const double T = T_flag > 0 ? T_flag : sc.defaults.T;
    Workspace w = make_workspace(sc, T, common.grid);
    if (dt_flag > 0) w.cfg.dt = dt_flag;
    const double dt = auto_dt(w.zm, w.cfg);  // throws CflViolation if dt_flag is bad
    RunManifest man(default_out(common.scenario, "simulate", common.out));
    man.command = "simulate";
    man.scenario = common.scenario;
    man.params = {{"T", T},
                  {"dt", dt},
                  {"grid", w.zm.grid.h},
                  {"seed", sc.defaults.seed},
                  {"bumps", sc.defaults.bumps},
                  {"box", {w.zm.grid.x0, w.zm.grid.y0, w.zm.grid.x_max(), w.zm.grid.y_max()}}};

    const DataPair data = random_pair(w.zm, sc.defaults.seed, sc.defaults.bumps);
    State s = as_state(data);
    const int chunks = 256;
    const int snap_every =
        snapshots > 0 ? std::max(1, chunks / snapshots) : 0;

    std::vector<std::array<double, 3>> rows;
    int snap_id = 0;
    auto dump_snap = [&](const State& st) {
        char name[64];
        std::snprintf(name, sizeof(name), "snapshot_%04d.%s", snap_id++,
                      binary ? "bin" : "txt");
        const auto p = man.path(name);
        write_snapshot(p, st.u, dt, st.time_stamp, "u", binary);
        man.note(p);
    };
    {
        const auto e = energy_parts(s, Region::All, w.zm);
        rows.push_back({0.0, e.grad, e.kin});
    }
    if (snapshots > 0) dump_snap(s);
    for (int n = 0; n < chunks; ++n) {
        const double t0 = T * n / chunks;
        const double t1 = T * (n + 1) / chunks;
        s = evolve(s, t0, t1, w.cfg, w.zm);
        const auto e = energy_parts(s, Region::All, w.zm);
        rows.push_back({t1, e.grad, e.kin});
        if (snap_every > 0 && ((n + 1) % snap_every == 0)) dump_snap(s);
    }
    const auto pe = man.path("energy.csv");
    write_energy_csv(pe, rows);
    man.note(pe);
    man.finalize();
    std::cout << "simulate: T=" << T << ", final energy "
              << fmt_g(rows.back()[1] + rows.back()[2]) << "\n";
    return 0;
}

inline int cmd_decay(const CommonArgs& common, double t_max_flag, int samples_flag,
                     int draws, const std::string& region_flag) {
    Scenario sc = common.load();
    const double t_max = t_max_flag > 0 ? t_max_flag : sc.defaults.t_max;
    const int samples = samples_flag > 0 ? samples_flag : sc.defaults.samples;
    Region region = Region::BallA;
    if (region_flag == "omega_star") region = Region::OmegaStar;
    else if (region_flag == "omega_star_delta") region = Region::Collar;
    else if (!region_flag.empty() && region_flag != "B_a")
        throw ConfigError("unknown region '" + region_flag + "'");

    Workspace w = make_workspace(sc, t_max, common.grid);
    RunManifest man(default_out(common.scenario, "decay", common.out));
    man.command = "decay";
    man.scenario = common.scenario;
    man.params = {{"t_max", t_max}, {"samples", samples}, {"draws", draws},
                  {"grid", w.zm.grid.h}, {"seed", sc.defaults.seed},
                  {"region", region_name(region)}};

    std::vector<double> times;
    const double t_lo = 0.25;
    for (int i = 0; i < samples; ++i)
        times.push_back(t_lo * std::pow(t_max / t_lo, double(i) / (samples - 1)));

    std::vector<DecaySeries> runs;
    for (int d = 0; d < draws; ++d) {
        const DataPair data = random_pair(w.zm, sc.defaults.seed + unsigned(d),
                                          sc.defaults.bumps);
        runs.push_back(measure_decay(data, w.cfg, w.zm, times, region));
    }
    const auto pd = man.path("decay.csv");
    write_decay_csv(pd, runs);
    man.note(pd);

    const DecayEnvelope env = ensemble_envelope(runs);
    const auto [lo, hi] = default_fit_window(times);
    json j;
    j["n_runs"] = draws;
    j["envelope_energy"] = fit_to_json(fit_series(env.times, env.energy_ratio, false, lo, hi));
    j["envelope_amplitude"] =
        fit_to_json(fit_series(env.times, env.amplitude_ratio, false, lo, hi));
    const auto pf = man.path("fit.json");
    std::ofstream(pf) << j.dump(2) << "\n";
    man.note(pf);
    man.finalize();
    std::cout << "decay: envelope energy slope "
              << fmt_g(j["envelope_energy"]["slope"].get<double>()) << " over ["
              << fmt_g(lo) << ", " << fmt_g(hi) << "]\n";
    return 0;
}

inline int cmd_control(const CommonArgs& common, double T_flag,
                       std::vector<double> ladder_flag, double alpha, double beta,
                       double tol, int max_iter, int power_iters) {
    Scenario sc = common.load();
    std::vector<double> ladder = ladder_flag;
    if (T_flag > 0) ladder = {T_flag};
    if (ladder.empty()) ladder = sc.defaults.T_ladder;
    if (ladder.empty()) ladder = {sc.defaults.T};
    if (tol <= 0) tol = sc.defaults.tol;

    RunManifest man(default_out(common.scenario, "control", common.out));
    man.command = "control";
    man.scenario = common.scenario;

    double chosen_T = 0.0;
    double chosen_rho = 0.0;
    json ladder_json = json::array();
    std::unique_ptr<Workspace> wkeep;
    for (double T : ladder) {
        auto w = std::make_unique<Workspace>(make_workspace(sc, T, common.grid));
        const GridField phi = synthesis_cutoff(w->zm);
        auto kt = [&](const DataPair& p) {
            return apply_return_map(p, T, w->cfg, w->zm, phi);
        };
        const double rho =
            estimate_contraction(kt, w->zm, sc.defaults.seed + 1000, power_iters);
        ladder_json.push_back({{"T", T}, {"rho", rho}});
        std::cout << "control: rho(T=" << T << ") = " << fmt_g(rho) << "\n";
        if (rho <= 0.9) {
            chosen_T = T;
            chosen_rho = rho;
            wkeep = std::move(w);
            break;
        }
    }
    man.params = {{"ladder", ladder_json}, {"alpha", alpha}, {"beta", beta},
                  {"tol", tol}, {"seed", sc.defaults.seed}, {"bumps", sc.defaults.bumps}};
    if (!wkeep) {
        man.finalize();
        std::cout << "control: no contraction within the T ladder (rho > 0.9 at cap)\n";
        throw NotAContraction("rho stayed above 0.9 up to the T cap");
    }

    Workspace& w = *wkeep;
    const RegionGeometry geom = build_region_geometry(sc, w.zm.grid.h);
    const DataPair data = random_pair(w.zm, sc.defaults.seed, sc.defaults.bumps);
    auto [sig, rep] =
        synthesize_control(data, chosen_T, alpha, beta, tol, max_iter, w.cfg, w.zm, geom);

    const auto pc = man.path("control.csv");
    write_control_csv(pc, sig);
    man.note(pc);
    const auto pm = man.path("control_meta.json");
    write_control_meta(
        pm, sig,
        {{"scenario", common.scenario},
         {"T", chosen_T},
         {"grid", w.zm.grid.h},
         {"box", {w.zm.grid.x0, w.zm.grid.y0, w.zm.grid.x_max(), w.zm.grid.y_max()}},
         {"seed", sc.defaults.seed},
         {"bumps", sc.defaults.bumps},
         {"terminal_rel_energy", rep.terminal_rel_energy}});
    man.note(pm);
    const auto pr = man.path("synthesis_report.json");
    std::ofstream(pr) << synthesis_to_json(rep).dump(2) << "\n";
    man.note(pr);
    man.params["T"] = chosen_T;
    man.params["rho"] = chosen_rho;
    man.timings = synthesis_to_json(rep)["timings_ms"];
    man.finalize();
    std::cout << "control: T=" << chosen_T << " iterations=" << rep.iterations
              << " terminal_rel_energy=" << fmt_g(rep.terminal_rel_energy)
              << " |g|_L2=" << fmt_g(rep.control_l2_norm) << "\n";
    return 0;
}

inline int cmd_verify(const CommonArgs& common, const std::string& control_csv,
                      const std::string& meta_path, double threshold) {
    const std::filesystem::path csv = control_csv;
    const std::filesystem::path meta = meta_path.empty()
                                           ? csv.parent_path() / "control_meta.json"
                                           : std::filesystem::path(meta_path);
    json mj;
    {
        std::ifstream mf(meta);
        if (!mf.good()) throw ConfigError("cannot open meta file " + meta.string());
        mf >> mj;
    }
    const std::string scen =
        !common.scenario.empty() ? common.scenario : mj.at("scenario").get<std::string>();
    Scenario sc = load_scenario(scen);
    const double T = mj.at("T").get<double>();
    const double h = mj.at("grid").get<double>();
    const auto bx = mj.at("box");
    Workspace w;
    w.sc = sc;
    w.zm = build_zone_map(sc, h, BcType::Dirichlet, BcType::Dirichlet,
                          BoxSpec{bx[0].get<double>(), bx[1].get<double>(),
                                  bx[2].get<double>(), bx[3].get<double>()});
    const RegionGeometry geom = build_region_geometry(sc, h);
    const ControlSignal sig = read_control(csv, meta);
    const DataPair data =
        random_pair(w.zm, mj.at("seed").get<unsigned>(), mj.at("bumps").get<int>());

    const ReplayReport rr = replay_signal(data, sig, T, w.cfg, w.zm, geom);
    const double claimed = mj.value("terminal_rel_energy", 0.0);
    const double limit = threshold > 0 ? threshold : 2.0 * claimed + 1e-12;

    RunManifest man(default_out(scen, "verify", common.out));
    man.command = "verify";
    man.scenario = scen;
    man.params = {{"control", csv.string()}, {"T", T}, {"threshold", limit}};
    json j = {{"terminal_rel_energy", rr.terminal_rel_energy},
              {"claimed_terminal_rel_energy", claimed},
              {"threshold", limit},
              {"initial_energy", rr.initial_energy},
              {"terminal_energy", rr.terminal_energy},
              {"pass", rr.terminal_rel_energy <= limit}};
    const auto pv = man.path("verify_report.json");
    std::ofstream(pv) << j.dump(2) << "\n";
    man.note(pv);
    man.finalize();
    std::cout << "verify: terminal_rel_energy=" << fmt_g(rr.terminal_rel_energy)
              << " (claimed " << fmt_g(claimed) << ", limit " << fmt_g(limit) << ")\n";
    return rr.terminal_rel_energy <= limit ? 0 : 5;
}

inline int cmd_rays(const CommonArgs& common, int n_rays, double t_max_flag,
                    int max_splits, bool acoustic, bool want_events) {
    Scenario sc = common.load();
    TraceOptions opt;
    opt.t_max = t_max_flag > 0 ? t_max_flag : sc.defaults.t_max;
    opt.max_splits = max_splits;
    opt.acoustic_weights = acoustic;

    RunManifest man(default_out(common.scenario, "rays", common.out));
    man.command = "rays";
    man.scenario = common.scenario;
    man.params = {{"n_rays", n_rays}, {"t_max", opt.t_max},
                  {"max_splits", opt.max_splits}, {"acoustic", acoustic}};

    std::vector<RayEvent> events;
    const bool record = want_events || n_rays <= 2000;
    EscapeReport rep = escape_time_survey(sc, n_rays, opt, record ? &events : nullptr);
    if (record) {
        const auto p = man.path("rays.csv");
        write_rays_csv(p, events);
        man.note(p);
    }
    json j = {{"n_rays", rep.n_rays},
              {"max_escape_time", rep.max_escape_time},
              {"trapped_count", rep.trapped_count},
              {"negligible_count", rep.negligible_count},
              {"surviving_weight", rep.surviving_weight},
              {"nontrapping_consistent", rep.nontrapping_consistent}};
    if (rep.chord_bound_valid) j["chord_bound"] = rep.chord_bound;
    const auto pe = man.path("escape_report.json");
    std::ofstream(pe) << j.dump(2) << "\n";
    man.note(pe);
    man.finalize();
    std::cout << "rays: " << rep.n_rays << " rays, max escape "
              << fmt_g(rep.max_escape_time) << ", trapped " << rep.trapped_count
              << (rep.nontrapping_consistent ? " (nontrapping-consistent)"
                                             : " (trapping suspected)")
              << "\n";
    return 0;
}

inline int cmd_oracle_check(int n, double t, unsigned seed) {
    Scenario sc;
    sc.name = "oracle-box";
    sc.a = 0.45;
    sc.box = {-0.5, -0.5, 0.5, 0.5};
    sc.spacing = 1.0 / n;
    ZoneMap zm = build_zone_map(sc, sc.spacing);
    DenseOperator op = assemble_discrete_operator(zm);

    std::mt19937_64 rng(seed);
    GridField f1(zm.grid), f2(zm.grid);
    const double sigma = 6.0 * zm.grid.h;
    const double span = 0.5 - sigma - 2.0 * zm.grid.h;
    std::uniform_real_distribution<double> uni(-span, span);
    for (int b = 0; b < 3; ++b) {
        add_bump(f1, {uni(rng), uni(rng)}, sigma, uni(rng));
        add_bump(f2, {uni(rng), uni(rng)}, sigma, uni(rng));
    }

    SolverConfig cfg;
    cfg.dt = 0.25 * cfl_limit(zm);
    State s0;
    s0.u = f1;
    s0.v = f2;
    const State num = evolve(s0, 0.0, t, cfg, zm);
    const State ref = propagate_oracle(op, f1, f2, t);
    double num2 = 0.0, den2 = 0.0;
    for (std::size_t k = 0; k < num.u.v.size(); ++k) {
        const double d = num.u.v[k] - ref.u.v[k];
        num2 += d * d;
        den2 += ref.u.v[k] * ref.u.v[k];
    }
    const double rel = den2 > 0 ? std::sqrt(num2 / den2) : 0.0;
    std::cout << "oracle-check: grid " << n << "x" << n << ", t=" << t
              << ", relative L2 error " << fmt_g(rel) << "\n";
    return rel < 1e-3 ? 0 : 5;
}

}  // namespace cli

/// Full command dispatch; returns the process exit code.
inline int run_command(std::vector<std::string> args) {
    CLI::App app{"wave controllability workbench"};
    app.require_subcommand(1);

    cli::CommonArgs common;
    double T = 0.0, t_max = 0.0, alpha = 1.0, beta = 1.0, tol = 0.0, threshold = 0.0;
    double t_oracle = 1.0, dt_flag = 0.0;
    int snapshots = 0, samples = 0, draws = 16, max_iter = 200, power_iters = 10;
    int n_rays = 10000, max_splits = 12, grid_n = 24;
    unsigned oracle_seed = 11;
    bool binary = false, acoustic = false, events = false;
    std::vector<double> ladder;
    std::string region, control_csv, meta_path, dump_name;
    bool list_presets = false;

    auto* sim = app.add_subcommand("simulate", "run the forward solver");
    common.attach(sim);
    sim->add_option("--T", T, "horizon");
    sim->add_option("--dt", dt_flag, "explicit time step (must satisfy the CFL bound)");
    sim->add_option("--snapshots", snapshots, "number of snapshots to write");
    sim->add_flag("--binary", binary, "binary snapshots");

    auto* dec = app.add_subcommand("decay", "measure local energy decay");
    common.attach(dec);
    dec->add_option("--t-max", t_max, "latest sample time");
    dec->add_option("--samples", samples, "number of sample times");
    dec->add_option("--draws", draws, "ensemble size");
    dec->add_option("--region", region, "B_a | omega_star | omega_star_delta");

    auto* ctl = app.add_subcommand("control", "synthesize a boundary control");
    common.attach(ctl);
    ctl->add_option("--T", T, "horizon (disables the ladder search)");
    ctl->add_option("--T-ladder", ladder, "T ladder for the contraction search");
    ctl->add_option("--alpha", alpha, "Robin coefficient on u");
    ctl->add_option("--beta", beta, "Robin coefficient on the conormal derivative");
    ctl->add_option("--tol", tol, "fixed-point tolerance");
    ctl->add_option("--max-iter", max_iter, "fixed-point iteration cap");
    ctl->add_option("--power-iters", power_iters, "power iteration steps for rho");

    auto* ver = app.add_subcommand("verify", "re-simulate a stored control signal");
    common.attach(ver, false);
    ver->add_option("--control", control_csv, "control.csv path")->required();
    ver->add_option("--meta", meta_path, "control_meta.json path");
    ver->add_option("--threshold", threshold, "terminal energy acceptance threshold");

    auto* ray = app.add_subcommand("rays", "geometric ray survey");
    common.attach(ray);
    ray->add_option("--n", n_rays, "number of launched rays");
    ray->add_option("--t-max", t_max, "survey horizon");
    ray->add_option("--max-splits", max_splits, "branching depth cap");
    ray->add_flag("--acoustic", acoustic, "acoustic energy split weights");
    ray->add_flag("--events", events, "always write rays.csv");

    auto* orc = app.add_subcommand("oracle-check", "compare the stepper to the"
                                                   " spectral oracle on a small box");
    orc->add_option("--grid", grid_n, "cells per side");
    orc->add_option("--t", t_oracle, "comparison time");
    orc->add_option("--seed", oracle_seed, "data seed");

    auto* scn = app.add_subcommand("scenario", "preset utilities");
    scn->add_flag("--list", list_presets, "list preset names");
    scn->add_option("--dump", dump_name, "print a preset scenario file");

    std::vector<const char*> argv;
    argv.push_back("wavectl");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cli::cmd_simulate(common, T, dt_flag, snapshots, binary);
        if (dec->parsed()) return cli::cmd_decay(common, t_max, samples, draws, region);
        if (ctl->parsed())
            return cli::cmd_control(common, T, ladder, alpha, beta, tol, max_iter,
                                    power_iters);
        if (ver->parsed()) return cli::cmd_verify(common, control_csv, meta_path, threshold);
        if (ray->parsed())
            return cli::cmd_rays(common, n_rays, t_max, max_splits, acoustic, events);
        if (orc->parsed()) return cli::cmd_oracle_check(grid_n, t_oracle, oracle_seed);
        if (scn->parsed()) {
            if (list_presets)
                for (const auto& n : preset_names()) std::cout << n << "\n";
            if (!dump_name.empty()) std::cout << preset_text(dump_name);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidNesting& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnresolvedGeometry& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CflViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NotAContraction& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace wb
