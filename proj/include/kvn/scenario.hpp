#pragma once

#include <optional>
#include <string>

#include "kvn/analysis.hpp"
#include "kvn/liouvillian.hpp"
#include "kvn/propagate.hpp"

namespace kvn {

/// A fully parameterized simulation run, loaded from a JSON config.
/// See README for the schema; forces and potentials are named builtins.
struct ScenarioConfig {
    std::string name;
    GridSpec grid_spec;
    std::vector<double> center, sigma, wavevector;
    LiouvillianSpec::Kind kind = LiouvillianSpec::Kind::free;
    ForceField force;
    std::vector<double> masses;  // one (single-particle) or two entries
    std::optional<PotentialPair> potentials;
    std::optional<AnalyticScenario> analytic;
    PropagatorConfig prop;
    double t_final = 1.0;
    std::size_t snapshot_cadence = 10;
    Representation representation = Representation::velocity;
    std::string output_dir;
    std::string config_echo;  // original JSON text for the manifest
};

ScenarioConfig load_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_json(const std::string& text);

struct RunArtifacts {
    ObservableSeries series;
    std::vector<TrajectorySample> oracle;
    double norm_initial = 0.0;
    double norm_final = 0.0;
    double wall_seconds = 0.0;
    std::string out_dir;
};

/// Directory resolution: config.output_dir, else $KVN_OUT_DIR/<name>, else
/// ./kvn_out/<name>.
std::string resolve_output_dir(const ScenarioConfig& sc);

/// Runs the scenario and writes series CSV, initial/final snapshots, and a
/// manifest JSON into the output directory.
RunArtifacts run_scenario(const ScenarioConfig& sc);

/// Builds the initial state and Liouvillian spec without running (used by
/// tests and the acceptance suite).
WaveField initial_state(const ScenarioConfig& sc);
LiouvillianSpec liouvillian_spec(const ScenarioConfig& sc);

}  // namespace kvn
