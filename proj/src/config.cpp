#include "gpe/config.hpp"

#include <fstream>
#include <set>

namespace gpe {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

Axis parse_axis(const std::string& s, const std::string& where) {
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    throw ConfigError(where + ": axis must be one of x, y, z (got '" + s + "')");
}

std::string axis_name(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        default: return "z";
    }
}

RunMode parse_mode(const std::string& s) {
    if (s == "groundstate") return RunMode::Groundstate;
    if (s == "continue") return RunMode::Continue;
    if (s == "census") return RunMode::Census;
    if (s == "stability") return RunMode::Stability;
    if (s == "vortices") return RunMode::Vortices;
    if (s == "preset") return RunMode::Preset;
    throw ConfigError("mode must be one of groundstate, continue, census, stability, vortices, preset");
}

SystemParams parse_system(const json& j) {
    require_keys(j, "system", {"dimension", "interaction", "rotation", "gain_loss", "gain_loss_axis"});
    SystemParams p;
    p.dimension = j.value("dimension", 2);
    p.interaction = j.value("interaction", 0.0);
    p.rotation = j.value("rotation", 0.0);
    p.gain_loss = j.value("gain_loss", 0.0);
    if (j.contains("gain_loss_axis"))
        p.gain_loss_axis = parse_axis(j.at("gain_loss_axis").get<std::string>(), "system.gain_loss_axis");
    else
        p.gain_loss_axis = p.dimension == 3 ? Axis::Z : Axis::Y;
    return p;
}

GridSpec parse_grid(const json& j, int dimension) {
    require_keys(j, "grid", {"points", "half_extent"});
    GridSpec g;
    g.dimension = dimension;
    auto fill = [&](const json& v, auto setter, const char* what) {
        if (v.is_array()) {
            if (static_cast<int>(v.size()) != dimension)
                throw ConfigError(std::string("grid.") + what + ": expected " +
                                  std::to_string(dimension) + " entries");
            for (int a = 0; a < dimension; ++a) setter(a, v[a]);
        } else {
            for (int a = 0; a < dimension; ++a) setter(a, v);
        }
    };
    if (!j.contains("points")) throw ConfigError("grid.points is required");
    fill(j.at("points"), [&](int a, const json& v) { g.points[a] = v.get<int>(); }, "points");
    if (!j.contains("half_extent")) throw ConfigError("grid.half_extent is required");
    fill(j.at("half_extent"), [&](int a, const json& v) { g.half_extent[a] = v.get<double>(); },
         "half_extent");
    return g;
}

SolverConfig parse_solver(const json& j) {
    require_keys(j, "solver",
                 {"residual_tolerance", "max_newton_iterations", "krylov_tolerance", "itp_time_step",
                  "itp_residual_target", "continuation_step", "min_continuation_step",
                  "omega_continuation_step", "max_itp_iterations", "max_krylov_iterations",
                  "krylov_restart", "verbose"});
    SolverConfig s;
    s.residual_tolerance = j.value("residual_tolerance", s.residual_tolerance);
    s.max_newton_iterations = j.value("max_newton_iterations", s.max_newton_iterations);
    s.krylov_tolerance = j.value("krylov_tolerance", s.krylov_tolerance);
    s.itp_time_step = j.value("itp_time_step", s.itp_time_step);
    s.itp_residual_target = j.value("itp_residual_target", s.itp_residual_target);
    s.continuation_step = j.value("continuation_step", s.continuation_step);
    s.min_continuation_step = j.value("min_continuation_step", s.min_continuation_step);
    s.omega_continuation_step = j.value("omega_continuation_step", s.omega_continuation_step);
    s.max_itp_iterations = j.value("max_itp_iterations", s.max_itp_iterations);
    s.max_krylov_iterations = j.value("max_krylov_iterations", s.max_krylov_iterations);
    s.krylov_restart = j.value("krylov_restart", s.krylov_restart);
    s.verbose = j.value("verbose", s.verbose);
    return s;
}

BdgConfig parse_bdg(const json& j) {
    require_keys(j, "bdg",
                 {"dense_points_2d", "dense_points_3d", "stability_threshold",
                  "iterative_stability_threshold", "zero_mode_radius", "scan_max_frequency",
                  "scan_step", "scan_height", "arnoldi_dimension", "inner_tolerance",
                  "inner_max_iterations", "ritz_residual_tolerance"});
    BdgConfig b;
    b.dense_points_2d = j.value("dense_points_2d", b.dense_points_2d);
    b.dense_points_3d = j.value("dense_points_3d", b.dense_points_3d);
    b.stability_threshold = j.value("stability_threshold", b.stability_threshold);
    b.iterative_stability_threshold =
        j.value("iterative_stability_threshold", b.iterative_stability_threshold);
    b.zero_mode_radius = j.value("zero_mode_radius", b.zero_mode_radius);
    b.scan_max_frequency = j.value("scan_max_frequency", b.scan_max_frequency);
    b.scan_step = j.value("scan_step", b.scan_step);
    b.scan_height = j.value("scan_height", b.scan_height);
    b.arnoldi_dimension = j.value("arnoldi_dimension", b.arnoldi_dimension);
    b.inner_tolerance = j.value("inner_tolerance", b.inner_tolerance);
    b.inner_max_iterations = j.value("inner_max_iterations", b.inner_max_iterations);
    b.ritz_residual_tolerance = j.value("ritz_residual_tolerance", b.ritz_residual_tolerance);
    return b;
}

std::vector<VortexImprint> parse_imprints(const json& j) {
    if (!j.is_array()) throw ConfigError("seed.imprints: expected an array");
    std::vector<VortexImprint> out;
    for (const auto& e : j) {
        require_keys(e, "seed.imprints[]", {"x", "y", "charge"});
        VortexImprint v;
        v.x = e.value("x", 0.0);
        v.y = e.value("y", 0.0);
        v.charge = e.value("charge", 1);
        out.push_back(v);
    }
    return out;
}

} // namespace

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Groundstate: return "groundstate";
        case RunMode::Continue: return "continue";
        case RunMode::Census: return "census";
        case RunMode::Stability: return "stability";
        case RunMode::Vortices: return "vortices";
        default: return "preset";
    }
}

RunConfig parse_config_json(const nlohmann::json& j) {
    require_keys(j, "config",
                 {"mode", "system", "grid", "solver", "seed", "output_dir", "threads", "continue",
                  "census", "stability", "vortices", "preset", "bdg"});
    RunConfig c;
    if (!j.contains("mode")) throw ConfigError("config: 'mode' is required");
    c.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("system")) c.system = parse_system(j.at("system"));
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid"), c.system.dimension);
    else c.grid = c.system.dimension == 3 ? GridSpec::cube3d(48, 8.0) : GridSpec::square2d(128, 8.0);
    if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
    if (j.contains("bdg")) c.bdg = parse_bdg(j.at("bdg"));
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.threads = j.value("threads", 1);

    if (j.contains("seed")) {
        const json& s = j.at("seed");
        require_keys(s, "seed", {"imprints", "snapshot"});
        if (s.contains("imprints")) c.seed_imprints = parse_imprints(s.at("imprints"));
        if (s.contains("snapshot")) c.seed_snapshot = s.at("snapshot").get<std::string>();
    }
    if (j.contains("continue")) {
        const json& s = j.at("continue");
        require_keys(s, "continue", {"gamma_target", "emit_snapshots", "stability_every"});
        c.gamma_target = s.value("gamma_target", 0.0);
        c.emit_snapshots = s.value("emit_snapshots", false);
        c.stability_every = s.value("stability_every", 0);
    }
    if (j.contains("census")) {
        const json& s = j.at("census");
        require_keys(s, "census", {"omegas"});
        if (s.contains("omegas"))
            for (const auto& w : s.at("omegas")) c.census_omegas.push_back(w.get<double>());
    }
    if (j.contains("stability")) {
        const json& s = j.at("stability");
        require_keys(s, "stability", {"mode"});
        const std::string m = s.value("mode", "dense-coarse");
        if (m == "dense-coarse")
            c.stability_mode = BdgMode::DenseCoarse;
        else if (m == "iterative-extremal")
            c.stability_mode = BdgMode::IterativeExtremal;
        else
            throw ConfigError("stability.mode must be dense-coarse or iterative-extremal");
    }
    if (j.contains("vortices")) {
        const json& s = j.at("vortices");
        require_keys(s, "vortices", {"snapshot"});
        if (s.contains("snapshot")) c.vortices_snapshot = s.at("snapshot").get<std::string>();
    }
    if (j.contains("preset")) c.preset = j.at("preset").get<std::string>();
    return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config_json(j);
}

void RunConfig::validate() const {
    solver.validate();
    if (system.dimension != 2 && system.dimension != 3)
        throw ConfigError("system.dimension must be 2 or 3");
    if (grid.dimension != system.dimension)
        throw ConfigError("grid dimension does not match system dimension");
    for (int a = 0; a < grid.dimension; ++a) {
        if (grid.points[a] < 16)
            throw ConfigError("grid.points must be >= 16 per axis for runs");
        if (!(grid.half_extent[a] > 0.0)) throw ConfigError("grid.half_extent must be positive");
    }
    if (axis_index(system.gain_loss_axis) >= system.dimension)
        throw ConfigError("system.gain_loss_axis is not a valid axis of the grid");
    if (mode == RunMode::Census && census_omegas.empty())
        throw ConfigError("census.omegas must list at least one rotation frequency");
    if (mode == RunMode::Census && system.dimension != 2)
        throw ConfigError("census runs are 2D");
    if (mode == RunMode::Vortices && !vortices_snapshot && !seed_snapshot)
        throw ConfigError("vortices: a snapshot path is required");
    if (mode == RunMode::Preset && preset.empty())
        throw ConfigError("preset: a preset name is required");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["mode"] = to_string(c.mode);
    j["output_dir"] = c.output_dir.string();
    j["threads"] = c.threads;
    j["system"] = {{"dimension", c.system.dimension},
                   {"interaction", c.system.interaction},
                   {"rotation", c.system.rotation},
                   {"gain_loss", c.system.gain_loss},
                   {"gain_loss_axis", axis_name(c.system.gain_loss_axis)}};
    nlohmann::json points = nlohmann::json::array();
    nlohmann::json extents = nlohmann::json::array();
    for (int a = 0; a < c.grid.dimension; ++a) {
        points.push_back(c.grid.points[a]);
        extents.push_back(c.grid.half_extent[a]);
    }
    j["grid"] = {{"points", points}, {"half_extent", extents}};
    j["solver"] = {{"residual_tolerance", c.solver.residual_tolerance},
                   {"max_newton_iterations", c.solver.max_newton_iterations},
                   {"krylov_tolerance", c.solver.krylov_tolerance},
                   {"itp_time_step", c.solver.itp_time_step},
                   {"itp_residual_target", c.solver.itp_residual_target},
                   {"continuation_step", c.solver.continuation_step},
                   {"min_continuation_step", c.solver.min_continuation_step},
                   {"omega_continuation_step", c.solver.omega_continuation_step},
                   {"max_itp_iterations", c.solver.max_itp_iterations},
                   {"max_krylov_iterations", c.solver.max_krylov_iterations},
                   {"krylov_restart", c.solver.krylov_restart},
                   {"verbose", c.solver.verbose}};
    if (!c.seed_imprints.empty() || c.seed_snapshot) {
        nlohmann::json seed;
        if (!c.seed_imprints.empty()) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& v : c.seed_imprints)
                arr.push_back({{"x", v.x}, {"y", v.y}, {"charge", v.charge}});
            seed["imprints"] = arr;
        }
        if (c.seed_snapshot) seed["snapshot"] = *c.seed_snapshot;
        j["seed"] = seed;
    }
    if (c.mode == RunMode::Continue)
        j["continue"] = {{"gamma_target", c.gamma_target},
                         {"emit_snapshots", c.emit_snapshots},
                         {"stability_every", c.stability_every}};
    if (c.mode == RunMode::Census) j["census"] = {{"omegas", c.census_omegas}};
    if (c.mode == RunMode::Stability)
        j["stability"] = {
            {"mode", c.stability_mode == BdgMode::DenseCoarse ? "dense-coarse" : "iterative-extremal"}};
    if (c.vortices_snapshot) j["vortices"] = {{"snapshot", *c.vortices_snapshot}};
    if (!c.preset.empty()) j["preset"] = c.preset;
    return j;
}

} // namespace gpe
