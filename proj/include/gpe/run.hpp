#ifndef GPE_RUN_HPP
#define GPE_RUN_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpe/config.hpp"

namespace gpe {

struct ManifestOutput {
    std::string path; // relative to the manifest directory
    std::uintmax_t bytes = 0;
    std::string checksum;
};

struct RunManifest {
    std::string code_version;
    std::string created;
    std::string finished;
    nlohmann::json config_echo;
    std::string status = "ok"; // ok | solver-failure
    std::vector<ManifestOutput> outputs;
    std::optional<std::pair<double, double>> gamma_c_bracket;
    std::vector<std::string> log;

    // Continuation restart point.
    std::optional<std::string> resume_snapshot;
    double resume_gamma = 0.0;
    Complex resume_mu{0.0, 0.0};
    double resume_target = 0.0;

    std::filesystem::path directory;
};

/// Executes the configured pipeline, writing snapshots, CSV data and the
/// manifest into config.output_dir. Deterministic given the config.
RunManifest run(const RunConfig& config);

/// Continues an interrupted `continue` run from its manifest (outputs are
/// checksum-verified first).
RunManifest run_resume(const std::filesystem::path& manifest_path);

RunManifest read_manifest(const std::filesystem::path& path);

/// Recomputes all output checksums; throws IoError on any mismatch.
void verify_manifest(const RunManifest& manifest);

/// Base configuration of a named preset (fig1, fig2, fig4, fig5, fig6).
/// `overlay` entries override preset defaults (grid, solver, ...).
RunConfig preset_config(const std::string& name, const nlohmann::json& overlay = {});

} // namespace gpe

#endif
