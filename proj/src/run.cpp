#include "gpe/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

#include "gpe/bdg.hpp"
#include "gpe/snapshot.hpp"
#include "gpe/version.hpp"
#include "gpe/vortex.hpp"

namespace gpe {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string iso_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string());
        out << content;
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

struct Pipeline {
    const RunConfig& cfg;
    RunManifest& manifest;
    fs::path dir;

    void reg(const fs::path& p) {
        ManifestOutput o;
        o.path = fs::relative(p, dir).string();
        manifest.outputs.push_back(o);
    }
    void log(const std::string& s) { manifest.log.push_back(s); }
};

std::string state_json(const StationaryState& st) {
    json j;
    j["mu"] = {st.mu.real(), st.mu.imag()};
    j["residual_norm"] = st.residual_norm;
    j["pt_symmetry_error"] = st.pt_symmetry_error;
    j["pt_unbroken"] = st.pt_unbroken;
    j["observables"] = {{"e_mf", st.observables.e_mf},
                        {"e_mf_rot", st.observables.e_mf_rot},
                        {"lz", st.observables.lz},
                        {"mu_estimate", {st.observables.mu_estimate.real(), st.observables.mu_estimate.imag()}},
                        {"n_lower", st.observables.n_lower},
                        {"n_upper", st.observables.n_upper}};
    return j.dump(2) + "\n";
}

std::string density_csv(const ComplexField& psi) {
    const Grid& g = psi.grid;
    std::string out = g.dimension() == 3 ? "x,y,z,density\n" : "x,y,density\n";
    std::size_t idx = 0;
    for (int k = 0; k < g.points(2); ++k)
        for (int j = 0; j < g.points(1); ++j)
            for (int i = 0; i < g.points(0); ++i, ++idx) {
                out += fmt(g.coord(0, i)) + "," + fmt(g.coord(1, j));
                if (g.dimension() == 3) out += "," + fmt(g.coord(2, k));
                out += "," + fmt(std::norm(psi.values[idx])) + "\n";
            }
    return out;
}

std::string current_csv(const ComplexField& psi) {
    const Grid& g = psi.grid;
    const auto j = current_density(psi);
    std::string out = g.dimension() == 3 ? "x,y,z,jx,jy,jz\n" : "x,y,jx,jy\n";
    std::size_t idx = 0;
    for (int k = 0; k < g.points(2); ++k)
        for (int jj = 0; jj < g.points(1); ++jj)
            for (int i = 0; i < g.points(0); ++i, ++idx) {
                out += fmt(g.coord(0, i)) + "," + fmt(g.coord(1, jj));
                if (g.dimension() == 3) out += "," + fmt(g.coord(2, k));
                for (const auto& comp : j) out += "," + fmt(comp.values[idx]);
                out += "\n";
            }
    return out;
}

std::string vortex_csv(const std::vector<VortexLine>& lines) {
    std::string out = "line_id,z,x,y,r,phi_unwrapped,charge\n";
    for (const auto& line : lines)
        for (const auto& s : line.samples)
            out += std::to_string(line.id) + "," + fmt(s.z) + "," + fmt(s.x) + "," + fmt(s.y) + "," +
                   fmt(s.r) + "," + fmt(s.phi) + "," + std::to_string(line.charge) + "\n";
    return out;
}

std::string vortex_summary_csv(const std::vector<VortexLine>& lines) {
    std::string out =
        "line_id,charge,central,spans_midplane,ambiguous,r_mid,screwing_strength,odd_fraction,n_samples\n";
    for (const auto& line : lines)
        out += std::to_string(line.id) + "," + std::to_string(line.charge) + "," +
               std::to_string(line.central ? 1 : 0) + "," + std::to_string(line.spans_midplane ? 1 : 0) +
               "," + std::to_string(line.ambiguous_link ? 1 : 0) + "," + fmt(line.r_mid) + "," +
               fmt(line.screwing_strength) + "," + fmt(line.odd_fraction) + "," +
               std::to_string(line.samples.size()) + "\n";
    return out;
}

std::string spectrum_csv(const BdgSpectrum& spec) {
    std::string out = "re_omega,im_omega\n";
    for (const Complex& w : spec.eigenvalues) out += fmt(w.real()) + "," + fmt(w.imag()) + "\n";
    return out;
}

constexpr const char* kBranchHeader =
    "gamma,re_mu,im_mu,e_mf,e_mf_rot,lz_expect,residual,pt_error,stable_flag,max_growth_rate\n";

std::string branch_row(const StationaryState& st, int stable_flag, double growth) {
    return fmt(st.params.gain_loss) + "," + fmt(st.mu.real()) + "," + fmt(st.mu.imag()) + "," +
           fmt(st.observables.e_mf) + "," + fmt(st.observables.e_mf_rot) + "," +
           fmt(st.observables.lz) + "," + fmt(st.residual_norm) + "," + fmt(st.pt_symmetry_error) +
           "," + std::to_string(stable_flag) + "," + fmt(growth) + "\n";
}

/// Multilevel gamma = 0 relaxation: coarse-grid gradient flow for the slow
/// vortex rearrangement, refinement, final flow and a Newton polish.
StationaryState relax_ground_state(const Grid& grid, const SystemParams& params,
                                   const std::vector<VortexImprint>& imprints,
                                   const SolverConfig& solver) {
    const bool two_level = grid.points(0) > 40;
    ComplexField seed(grid);
    if (two_level) {
        GridSpec cs = grid.spec();
        for (int a = 0; a < grid.dimension(); ++a) cs.points[a] = std::max(24, grid.points(a) / 2);
        const Grid coarse(cs);
        SolverConfig cc = solver;
        const double ratio = coarse.spacing(0) / grid.spacing(0);
        cc.itp_time_step = solver.itp_time_step * std::min(4.0, ratio * ratio);
        cc.itp_residual_target = std::max(solver.itp_residual_target, 1e-3);
        ComplexField guess = gaussian_seed(coarse);
        if (!imprints.empty()) guess = imprint_vortices(guess, imprints);
        const StationaryState rough = ground_state_itp(guess, params, cc);
        seed = resample(rough.psi, grid);
        normalize(seed);
    } else {
        seed = gaussian_seed(grid);
        if (!imprints.empty()) seed = imprint_vortices(seed, imprints);
    }
    SolverConfig fc = solver;
    fc.itp_residual_target = std::max(solver.itp_residual_target, 1e-4);
    StationaryState st = ground_state_itp(seed, params, fc);
    return newton_solve(st.psi, st.mu, params, solver);
}

StationaryState load_seed_state(const RunConfig& cfg, const Grid& grid) {
    if (cfg.seed_snapshot) {
        ComplexField psi = read_snapshot(*cfg.seed_snapshot);
        if (!psi.grid.compatible(grid)) {
            if (psi.grid.dimension() != grid.dimension())
                throw ConfigError("seed snapshot dimension does not match the configured grid");
            psi = resample(psi, grid);
        }
        normalize(psi);
        const Complex mu0 = inner(psi, apply_hamiltonian(psi, cfg.system));
        return newton_solve(psi, mu0, cfg.system, cfg.solver);
    }
    if (cfg.system.gain_loss != 0.0)
        throw ConfigError("imprint seeding runs the gradient flow and requires gain_loss = 0; "
                          "seed from a snapshot to start at gamma != 0");
    return relax_ground_state(grid, cfg.system, cfg.seed_imprints, cfg.solver);
}

void emit_state(Pipeline& ctx, const fs::path& base, const StationaryState& st, bool with_density) {
    write_snapshot(st.psi, base.string() + ".gpef");
    ctx.reg(base.string() + ".gpef");
    write_text_atomic(base.string() + ".json", state_json(st));
    ctx.reg(base.string() + ".json");
    if (with_density) {
        write_text_atomic(base.string() + "_density.csv", density_csv(st.psi));
        ctx.reg(base.string() + "_density.csv");
    }
}

void write_branch_outputs(Pipeline& ctx, const fs::path& csv_path, const Branch& branch,
                          int stability_every, BdgMode mode, const BdgConfig& bdg_cfg,
                          bool emit_snapshots, const fs::path& snap_base) {
    std::string csv = kBranchHeader;
    const std::size_t n = branch.states.size();
    for (std::size_t i = 0; i < n; ++i) {
        const StationaryState& st = branch.states[i];
        int flag = -1;
        double growth = std::numeric_limits<double>::quiet_NaN();
        const bool do_stability =
            stability_every > 0 && (i % static_cast<std::size_t>(stability_every) == 0 || i + 1 == n);
        if (do_stability) {
            const BdgSpectrum spec = bdg_spectrum(st, mode, bdg_cfg);
            flag = spec.stable ? 1 : 0;
            growth = spec.max_growth_rate;
        }
        csv += branch_row(st, flag, growth);
        if (emit_snapshots) {
            char suffix[32];
            std::snprintf(suffix, sizeof(suffix), "_%04zu", i);
            write_snapshot(st.psi, snap_base.string() + suffix + ".gpef");
            ctx.reg(snap_base.string() + suffix + ".gpef");
        }
    }
    write_text_atomic(csv_path, csv);
    ctx.reg(csv_path);
}

void record_branch_end(Pipeline& ctx, const Branch& branch, const std::string& label) {
    switch (branch.termination) {
        case BranchTermination::ReachedTarget:
            ctx.log(label + ": reached target");
            break;
        case BranchTermination::TangentBifurcationBracket:
            ctx.log(label + ": tangent bifurcation bracket [" + fmt(branch.bracket_last_good) + ", " +
                    fmt(branch.bracket_first_failed) + "]");
            ctx.manifest.gamma_c_bracket = {branch.bracket_last_good, branch.bracket_first_failed};
            break;
        case BranchTermination::SolverFailure:
            ctx.log(label + ": solver failure: " + branch.failure_message);
            ctx.manifest.status = "solver-failure";
            break;
    }
}

// ---------------------------------------------------------------- modes --

void run_groundstate(Pipeline& ctx) {
    const Grid grid(ctx.cfg.grid);
    const StationaryState st = load_seed_state(ctx.cfg, grid);
    emit_state(ctx, ctx.dir / "state", st, true);
    write_text_atomic(ctx.dir / "current.csv", current_csv(st.psi));
    ctx.reg(ctx.dir / "current.csv");
    ctx.log("groundstate: mu = " + fmt(st.mu.real()) + ", residual = " + fmt(st.residual_norm));
}

void run_continue(Pipeline& ctx) {
    const Grid grid(ctx.cfg.grid);
    const StationaryState seed = load_seed_state(ctx.cfg, grid);
    const Branch branch = continue_in_gamma(seed, ctx.cfg.gamma_target, ctx.cfg.solver);
    write_branch_outputs(ctx, ctx.dir / "branch.csv", branch, ctx.cfg.stability_every,
                         ctx.cfg.stability_mode, ctx.cfg.bdg, ctx.cfg.emit_snapshots,
                         ctx.dir / "state");
    record_branch_end(ctx, branch, "continue");
    const StationaryState& last = branch.back();
    emit_state(ctx, ctx.dir / "state_final", last, false);
    ctx.manifest.resume_snapshot = "state_final.gpef";
    ctx.manifest.resume_gamma = last.params.gain_loss;
    ctx.manifest.resume_mu = last.mu;
    ctx.manifest.resume_target = ctx.cfg.gamma_target;
}

void run_census(Pipeline& ctx) {
    const Grid grid(ctx.cfg.grid);
    const auto results = census_2d(ctx.cfg.system, grid, ctx.cfg.census_omegas, ctx.cfg.solver);
    std::string csv =
        "omega,rank,seed_name,vortex_count,re_mu,im_mu,e_mf,e_mf_rot,lz_expect,residual,pt_error,"
        "snapshot\n";
    for (const auto& res : results) {
        int rank = 0;
        for (const auto& entry : res.states) {
            char name[64];
            std::snprintf(name, sizeof(name), "census_w%.4f_r%d", res.omega, rank);
            const fs::path snap = ctx.dir / (std::string(name) + ".gpef");
            write_snapshot(entry.state.psi, snap);
            ctx.reg(snap);
            const auto& st = entry.state;
            csv += fmt(res.omega) + "," + std::to_string(rank) + "," + entry.seed_name + "," +
                   std::to_string(entry.vortex_count) + "," + fmt(st.mu.real()) + "," +
                   fmt(st.mu.imag()) + "," + fmt(st.observables.e_mf) + "," +
                   fmt(st.observables.e_mf_rot) + "," + fmt(st.observables.lz) + "," +
                   fmt(st.residual_norm) + "," + fmt(st.pt_symmetry_error) + "," +
                   fs::path(snap).filename().string() + "\n";
            ++rank;
        }
        for (const auto& f : res.failures) ctx.log("census omega=" + fmt(res.omega) + ": " + f);
    }
    write_text_atomic(ctx.dir / "census.csv", csv);
    ctx.reg(ctx.dir / "census.csv");
}

void run_stability(Pipeline& ctx) {
    const Grid grid(ctx.cfg.grid);
    const StationaryState st = load_seed_state(ctx.cfg, grid);
    const BdgSpectrum spec = bdg_spectrum(st, ctx.cfg.stability_mode, ctx.cfg.bdg);
    write_text_atomic(ctx.dir / "spectrum.csv", spectrum_csv(spec));
    ctx.reg(ctx.dir / "spectrum.csv");
    emit_state(ctx, ctx.dir / "state", st, false);
    ctx.log(std::string("stability: ") + (spec.stable ? "stable" : "unstable") +
            ", max growth rate = " + fmt(spec.max_growth_rate) +
            (spec.warning ? " (warning: partial spectrum)" : ""));
}

void run_vortices(Pipeline& ctx) {
    const std::string path = ctx.cfg.vortices_snapshot ? *ctx.cfg.vortices_snapshot
                                                       : *ctx.cfg.seed_snapshot;
    const ComplexField psi = read_snapshot(path);
    const auto lines = trace_vortex_lines(psi);
    write_text_atomic(ctx.dir / "vortex.csv", vortex_csv(lines));
    ctx.reg(ctx.dir / "vortex.csv");
    write_text_atomic(ctx.dir / "vortex_lines.csv", vortex_summary_csv(lines));
    ctx.reg(ctx.dir / "vortex_lines.csv");
    ctx.log("vortices: " + std::to_string(lines.size()) + " line(s) traced");
}

// --------------------------------------------------------------- presets --

struct PresetSeed {
    std::string name;
    double omega;
    std::vector<VortexImprint> imprints;
};

std::vector<PresetSeed> preset_2d_states() {
    const auto lib = census_imprint_library();
    auto find = [&](const std::string& n) {
        for (const auto& [name, imprints] : lib)
            if (name == n) return imprints;
        throw std::logic_error("unknown library entry " + n);
    };
    return {{"v1", 0.85, find("v1-center")}, {"v2-perp", 0.88, find("v2-xaxis")},
            {"v2-para", 0.88, find("v2-yaxis")}, {"v3", 0.91, find("v3")},
            {"v4-axes", 0.94, find("v4-axes")}, {"v4-diag", 0.94, find("v4-diag")}};
}

std::vector<PresetSeed> preset_3d_states() {
    const auto lib = census_imprint_library();
    auto find = [&](const std::string& n) {
        for (const auto& [name, imprints] : lib)
            if (name == n) return imprints;
        throw std::logic_error("unknown library entry " + n);
    };
    return {{"v0", 0.0, {}}, {"v1", 0.85, find("v1-center")}, {"v2", 0.87, find("v2-xaxis")},
            {"v3", 0.90, find("v3")}, {"v4", 0.94, find("v4-axes")}};
}

void run_tasks(std::vector<std::function<void()>>& tasks, int threads) {
    if (threads <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::size_t next = 0;
    while (next < tasks.size()) {
        std::vector<std::future<void>> batch;
        for (int i = 0; i < threads && next < tasks.size(); ++i, ++next)
            batch.push_back(std::async(std::launch::async, tasks[next]));
        for (auto& f : batch) f.get();
    }
}

void run_preset_fig1(Pipeline& ctx) {
    RunConfig c = ctx.cfg;
    c.census_omegas = {0.85, 0.88, 0.91, 0.94};
    Pipeline sub{c, ctx.manifest, ctx.dir};
    run_census(sub);
}

void run_preset_fig2(Pipeline& ctx) {
    const Grid grid(ctx.cfg.grid);
    struct Result {
        std::string name;
        Branch up, down;
    };
    const auto seeds = preset_2d_states();
    std::vector<Result> results(seeds.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        tasks.push_back([&, i]() {
            SystemParams p = ctx.cfg.system;
            p.rotation = seeds[i].omega;
            const StationaryState seed = relax_ground_state(grid, p, seeds[i].imprints, ctx.cfg.solver);
            results[i].name = seeds[i].name;
            results[i].up = continue_in_gamma(seed, std::abs(ctx.cfg.gamma_target), ctx.cfg.solver);
            results[i].down = continue_in_gamma(seed, -std::abs(ctx.cfg.gamma_target), ctx.cfg.solver);
        });
    }
    run_tasks(tasks, ctx.cfg.threads);
    for (auto& r : results) {
        write_branch_outputs(ctx, ctx.dir / ("branch_" + r.name + "_up.csv"), r.up,
                             ctx.cfg.stability_every, ctx.cfg.stability_mode, ctx.cfg.bdg, false,
                             ctx.dir / r.name);
        write_branch_outputs(ctx, ctx.dir / ("branch_" + r.name + "_down.csv"), r.down,
                             ctx.cfg.stability_every, ctx.cfg.stability_mode, ctx.cfg.bdg, false,
                             ctx.dir / r.name);
        record_branch_end(ctx, r.up, "fig2 " + r.name + " up");
        record_branch_end(ctx, r.down, "fig2 " + r.name + " down");
    }
}

void run_preset_fig4(Pipeline& ctx) {
    const Grid grid(ctx.cfg.grid);
    for (const auto& seed : preset_3d_states()) {
        if (seed.name == "v0") continue; // rotating states only
        SystemParams p = ctx.cfg.system;
        p.rotation = seed.omega;
        const StationaryState st = relax_ground_state(grid, p, seed.imprints, ctx.cfg.solver);
        emit_state(ctx, ctx.dir / ("state_" + seed.name), st, true);
        write_text_atomic(ctx.dir / ("current_" + seed.name + ".csv"), current_csv(st.psi));
        ctx.reg(ctx.dir / ("current_" + seed.name + ".csv"));
        const auto lines = trace_vortex_lines(st.psi);
        write_text_atomic(ctx.dir / ("vortex_" + seed.name + ".csv"), vortex_csv(lines));
        ctx.reg(ctx.dir / ("vortex_" + seed.name + ".csv"));
        write_text_atomic(ctx.dir / ("vortex_lines_" + seed.name + ".csv"), vortex_summary_csv(lines));
        ctx.reg(ctx.dir / ("vortex_lines_" + seed.name + ".csv"));
        ctx.log("fig4 " + seed.name + ": " + std::to_string(lines.size()) + " vortex line(s)");
    }
}

void run_preset_fig56(Pipeline& ctx, bool with_screwing) {
    const Grid grid(ctx.cfg.grid);
    const auto seeds = preset_3d_states();
    struct Result {
        std::string name;
        Branch branch;
    };
    std::vector<Result> results(seeds.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        tasks.push_back([&, i]() {
            SystemParams p = ctx.cfg.system;
            p.rotation = seeds[i].omega;
            const StationaryState seed = relax_ground_state(grid, p, seeds[i].imprints, ctx.cfg.solver);
            results[i].name = seeds[i].name;
            results[i].branch =
                continue_in_gamma(seed, ctx.cfg.gamma_target > 0 ? ctx.cfg.gamma_target : 0.7,
                                  ctx.cfg.solver);
        });
    }
    run_tasks(tasks, ctx.cfg.threads);
    for (auto& r : results) {
        write_branch_outputs(ctx, ctx.dir / ("branch_" + r.name + ".csv"), r.branch, 0,
                             ctx.cfg.stability_mode, ctx.cfg.bdg, false, ctx.dir / r.name);
        record_branch_end(ctx, r.branch, "fig5 " + r.name);
        emit_state(ctx, ctx.dir / ("state_" + r.name + "_maxgamma"), r.branch.back(), false);
        if (with_screwing && r.branch.states.front().params.rotation > 0.0) {
            std::string csv =
                "gamma,line_id,charge,central,spans_midplane,r_mid,screwing_strength,odd_fraction\n";
            for (const auto& st : r.branch.states) {
                for (const auto& line : trace_vortex_lines(st.psi))
                    csv += fmt(st.params.gain_loss) + "," + std::to_string(line.id) + "," +
                           std::to_string(line.charge) + "," + std::to_string(line.central ? 1 : 0) +
                           "," + std::to_string(line.spans_midplane ? 1 : 0) + "," + fmt(line.r_mid) +
                           "," + fmt(line.screwing_strength) + "," + fmt(line.odd_fraction) + "\n";
            }
            write_text_atomic(ctx.dir / ("screwing_" + r.name + ".csv"), csv);
            ctx.reg(ctx.dir / ("screwing_" + r.name + ".csv"));
        }
    }
}

void run_preset(Pipeline& ctx) {
    const std::string& name = ctx.cfg.preset;
    if (name == "fig1")
        run_preset_fig1(ctx);
    else if (name == "fig2")
        run_preset_fig2(ctx);
    else if (name == "fig4")
        run_preset_fig4(ctx);
    else if (name == "fig5")
        run_preset_fig56(ctx, false);
    else if (name == "fig6")
        run_preset_fig56(ctx, true);
    else
        throw ConfigError("unknown preset '" + name + "' (expected fig1|fig2|fig4|fig5|fig6)");
}

json manifest_to_json(const RunManifest& m) {
    json j;
    j["code_version"] = m.code_version;
    j["created"] = m.created;
    j["finished"] = m.finished;
    j["config"] = m.config_echo;
    j["status"] = m.status;
    json outs = json::array();
    for (const auto& o : m.outputs)
        outs.push_back({{"path", o.path}, {"bytes", o.bytes}, {"checksum", o.checksum}});
    j["outputs"] = outs;
    if (m.gamma_c_bracket)
        j["gamma_c_bracket"] = {m.gamma_c_bracket->first, m.gamma_c_bracket->second};
    j["log"] = m.log;
    if (m.resume_snapshot)
        j["resume"] = {{"snapshot", *m.resume_snapshot},
                       {"gamma", m.resume_gamma},
                       {"mu", {m.resume_mu.real(), m.resume_mu.imag()}},
                       {"target", m.resume_target}};
    return j;
}

} // namespace

RunManifest run(const RunConfig& config) {
    config.validate();
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + config.output_dir.string());

    RunManifest m;
    m.code_version = kVersion;
    m.created = iso_now();
    m.config_echo = config_to_json(config);
    m.directory = config.output_dir;

    Pipeline ctx{config, m, config.output_dir};
    try {
        switch (config.mode) {
            case RunMode::Groundstate: run_groundstate(ctx); break;
            case RunMode::Continue: run_continue(ctx); break;
            case RunMode::Census: run_census(ctx); break;
            case RunMode::Stability: run_stability(ctx); break;
            case RunMode::Vortices: run_vortices(ctx); break;
            case RunMode::Preset: run_preset(ctx); break;
        }
    } catch (const NonConvergenceError& e) {
        m.status = "solver-failure";
        m.log.push_back(e.what());
    }
    m.finished = iso_now();

    for (auto& o : m.outputs) {
        const fs::path p = m.directory / o.path;
        o.bytes = fs::file_size(p);
        o.checksum = file_checksum(p);
    }
    write_text_atomic(m.directory / "manifest.json", manifest_to_json(m).dump(2) + "\n");
    return m;
}

RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("manifest parse error: " + std::string(e.what()));
    }
    RunManifest m;
    m.code_version = j.value("code_version", "");
    m.created = j.value("created", "");
    m.finished = j.value("finished", "");
    m.config_echo = j.value("config", json::object());
    m.status = j.value("status", "ok");
    if (j.contains("outputs"))
        for (const auto& o : j.at("outputs"))
            m.outputs.push_back({o.value("path", ""), o.value("bytes", std::uintmax_t(0)),
                                 o.value("checksum", "")});
    if (j.contains("gamma_c_bracket"))
        m.gamma_c_bracket = {j["gamma_c_bracket"][0].get<double>(),
                             j["gamma_c_bracket"][1].get<double>()};
    if (j.contains("log"))
        for (const auto& l : j.at("log")) m.log.push_back(l.get<std::string>());
    if (j.contains("resume")) {
        const auto& r = j.at("resume");
        m.resume_snapshot = r.value("snapshot", "");
        m.resume_gamma = r.value("gamma", 0.0);
        m.resume_mu = Complex(r["mu"][0].get<double>(), r["mu"][1].get<double>());
        m.resume_target = r.value("target", 0.0);
    }
    m.directory = path.parent_path();
    return m;
}

void verify_manifest(const RunManifest& manifest) {
    for (const auto& o : manifest.outputs) {
        const fs::path p = manifest.directory / o.path;
        if (!fs::exists(p)) throw IoError("manifest output missing: " + p.string());
        if (fs::file_size(p) != o.bytes)
            throw IoError("manifest output size mismatch: " + p.string());
        if (file_checksum(p) != o.checksum)
            throw IoError("manifest output checksum mismatch: " + p.string());
    }
}

RunManifest run_resume(const std::filesystem::path& manifest_path) {
    const RunManifest old = read_manifest(manifest_path);
    verify_manifest(old);
    if (!old.resume_snapshot) throw ConfigError("manifest has no resume point");
    RunConfig cfg = parse_config_json(old.config_echo);
    if (cfg.mode != RunMode::Continue) throw ConfigError("only continue runs can be resumed");
    cfg.system.gain_loss = old.resume_gamma;
    cfg.seed_snapshot = (old.directory / *old.resume_snapshot).string();
    cfg.gamma_target = old.resume_target;
    cfg.output_dir = old.directory / "resumed";
    return run(cfg);
}

RunConfig preset_config(const std::string& name, const nlohmann::json& overlay) {
    json base;
    base["mode"] = "preset";
    base["preset"] = name;
    if (name == "fig1") {
        base["system"] = {{"dimension", 2}, {"interaction", 1.0}};
        base["grid"] = {{"points", 128}, {"half_extent", 8.0}};
        base["solver"] = {{"itp_residual_target", 1e-4}};
    } else if (name == "fig2") {
        base["system"] = {{"dimension", 2}, {"interaction", 1.0}};
        base["grid"] = {{"points", 128}, {"half_extent", 8.0}};
        base["solver"] = {{"itp_residual_target", 1e-4}};
        base["continue"] = {{"gamma_target", 0.25}};
    } else if (name == "fig4") {
        base["system"] = {{"dimension", 3}, {"interaction", 5.0}};
        base["grid"] = {{"points", 48}, {"half_extent", 8.0}};
        base["solver"] = {{"itp_residual_target", 1e-4}, {"itp_time_step", 3e-3}};
    } else if (name == "fig5" || name == "fig6") {
        base["system"] = {{"dimension", 3}, {"interaction", 5.0}};
        base["grid"] = {{"points", 48}, {"half_extent", 8.0}};
        base["solver"] = {{"itp_residual_target", 1e-4}, {"itp_time_step", 3e-3}};
        base["continue"] = {{"gamma_target", 0.7}};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    base["output_dir"] = "out_" + name;
    if (!overlay.empty())
        for (const auto& item : overlay.items()) {
            if (item.key() == "mode" || item.key() == "preset") continue;
            if (base.contains(item.key()) && base[item.key()].is_object() && item.value().is_object())
                base[item.key()].update(item.value());
            else
                base[item.key()] = item.value();
        }
    return parse_config_json(base);
}

} // namespace gpe
