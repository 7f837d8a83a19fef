#ifndef GPE_CONFIG_HPP
#define GPE_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpe/bdg.hpp"
#include "gpe/model.hpp"
#include "gpe/stationary.hpp"

namespace gpe {

enum class RunMode { Groundstate, Continue, Census, Stability, Vortices, Preset };

std::string to_string(RunMode mode);

/// Declarative description of one run. Parsed from JSON whose keys mirror
/// the field names below; unknown keys are rejected.
struct RunConfig {
    RunMode mode = RunMode::Groundstate;
    SystemParams system;
    GridSpec grid = GridSpec::square2d(128, 8.0);
    SolverConfig solver;
    std::filesystem::path output_dir = "out";
    int threads = 1;

    // Seed source: vortex imprints on the Gaussian, or a snapshot file.
    std::vector<VortexImprint> seed_imprints;
    std::optional<std::string> seed_snapshot;

    // mode == Continue
    double gamma_target = 0.0;
    bool emit_snapshots = false;
    int stability_every = 0; // 0: no stability analysis along the branch

    // mode == Census
    std::vector<double> census_omegas;

    // mode == Stability / stability along branches
    BdgMode stability_mode = BdgMode::DenseCoarse;
    BdgConfig bdg;

    // mode == Vortices
    std::optional<std::string> vortices_snapshot;

    // mode == Preset
    std::string preset;

    /// Full validation (including the production grid floor of 16 points
    /// per axis). Throws ConfigError.
    void validate() const;
};

RunConfig parse_config_json(const nlohmann::json& j);
RunConfig parse_config_file(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

} // namespace gpe

#endif
