#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>

#include "gpe/run.hpp"
#include "gpe/version.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kSolverError = 3, kIoError = 4 };

int dispatch(const std::string& mode, const std::string& config_path, const std::string& out_dir,
             const std::string& preset, int threads, const std::string& resume) {
    using nlohmann::json;

    if (!resume.empty()) {
        const gpe::RunManifest m = gpe::run_resume(resume);
        std::printf("resumed run finished: %s (%s)\n", m.directory.string().c_str(), m.status.c_str());
        return m.status == "ok" ? kOk : kSolverError;
    }

    gpe::RunConfig cfg;
    if (mode == "preset") {
        json overlay;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw gpe::IoError("cannot open config file " + config_path);
            in >> overlay;
        }
        if (preset.empty()) throw gpe::ConfigError("preset mode needs --preset <name>");
        cfg = gpe::preset_config(preset, overlay);
        if (out_dir.empty()) cfg.output_dir = "out_" + preset;
    } else {
        if (config_path.empty()) throw gpe::ConfigError("--config <path> is required");
        std::ifstream in(config_path);
        if (!in) throw gpe::IoError("cannot open config file " + config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw gpe::ConfigError(std::string("config parse error: ") + e.what());
        }
        j["mode"] = mode;
        cfg = gpe::parse_config_json(j);
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads > 0) cfg.threads = threads;

    const gpe::RunManifest m = gpe::run(cfg);
    std::printf("run finished: %s (%s)\n", m.directory.string().c_str(), m.status.c_str());
    for (const auto& line : m.log) std::printf("  %s\n", line.c_str());
    return m.status == "ok" ? kOk : kSolverError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary states, continuation and stability analysis of the rotating "
                 "Gross-Pitaevskii equation with balanced gain and loss"};
    app.set_version_flag("--version", gpe::kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir, preset, resume;
    int threads = 0;

    const std::vector<std::string> modes = {"groundstate", "continue", "census",
                                            "stability",   "vortices", "preset"};
    for (const auto& m : modes) {
        CLI::App* sub = app.add_subcommand(m);
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--threads", threads, "concurrent independent tasks");
        if (m == "preset") sub->add_option("--preset", preset, "fig1|fig2|fig4|fig5|fig6");
        if (m == "continue") sub->add_option("--resume", resume, "manifest of the run to resume");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        return dispatch(app.get_subcommands().front()->get_name(), config_path, out_dir, preset,
                        threads, resume);
    } catch (const gpe::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const gpe::NonConvergenceError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kSolverError;
    } catch (const gpe::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kIoError;
    } catch (const gpe::FormatError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kIoError;
    } catch (const gpe::CorruptionError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kIoError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigError;
    }
}
