#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tdhf/diagnostics.hpp"
#include "tdhf/propagate.hpp"

namespace tdhf {

struct OrbitalSpec {
    std::string kind = "gaussian";  // or "plane_modulated_gaussian"
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double sigma = 1.0;
    std::array<double, 3> momentum{0.0, 0.0, 0.0};
    double occupation = 1.0;
};

struct OutputControls {
    int sample_stride = 10;    // steps per diagnostics row
    int snapshot_stride = 0;   // samples per density snapshot; 0 = none
    std::string directory;     // default output location; CLI --out wins
};

struct Scenario {
    int schema_version = 1;
    int dim = 3;
    int points_per_axis = 16;
    double box_length = 14.0;
    std::vector<OrbitalSpec> orbitals;
    bool interactions = true;
    double coupling = 1.0;
    PropagatorConfig propagator;
    OutputControls output;
    AuditTolerances audit;
    bool deterministic = true;
};

/// Parse and validate a scenario file. Throws ScenarioError on malformed
/// input (maps to exit code 1 in the CLI).
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

/// A normalized Gaussian orbital exp(-|x-c|^2/(4 sigma^2) + i p.x).
ScalarField gaussian_orbital(GridPtr grid, const std::array<double, 3>& center,
                             double sigma, const std::array<double, 3>& momentum);

/// Builds the initial state from the orbital specs (Loewdin-orthonormalized).
/// Rejects boxes that clip more than 1e-8 of any orbital's mass, suggesting
/// an adequate box length.
DensityMatrix build_initial_state(const Scenario& sc, GridPtr grid);

struct RunResult {
    int exit_code = 0;        // 0 ok, 2 audit failure
    AuditSummary audit;
    std::string csv_path;
    std::string audit_path;
};

/// Full orchestration: propagate, annotate, audit, and serialize
/// diagnostics.csv, audit.json and density snapshots into out_dir.
RunResult run_scenario(const Scenario& sc, const std::string& out_dir);

}  // namespace tdhf
