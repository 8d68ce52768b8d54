#pragma once

#include <string>
#include <vector>

#include "evflow/scenario.hpp"

namespace evflow {

// One entry of the config's scenario list before the cycle file is loaded.
struct ScenarioSpec {
    std::string name;  // defaults to "<cycle stem>[_lanes][_regen]"
    std::string cycle_path;
    double lane_change_interval = 1000.0;  // m; 0 disables
    bool regen = true;
    int repetitions = 1;
    double dt = 1e-3;
    int trace_decimation = 10;
    bool run_to_depletion = false;
};

struct RunConfig {
    VehicleParams vehicle;
    TireParams tire;
    PowertrainParams powertrain;
    BatteryParams battery;
    DriverParams driver;
    LaneGeometry lane;
    std::string motor_loss_map_csv;  // optional, powertrain.loss_map_csv

    std::vector<ScenarioSpec> scenarios;
    std::vector<std::string> table_cycles;  // cycles for the 2x2 table command
    std::string output_dir = "out";
};

// Parses and validates the JSON config. Unknown keys are an error in strict
// mode; in lenient mode they are returned as warnings. Throws ConfigError
// with the section/key path and reason.
RunConfig parse_config(const std::string& path, bool strict = true,
                       std::vector<std::string>* warnings = nullptr);

// Writes the fully-resolved configuration (every default made explicit) so
// a run can be reproduced from its output directory alone.
void echo_config(const RunConfig& cfg, const std::string& path);

// Materializes one scenario: loads the cycle file and copies the shared
// parameter sets.
Scenario make_scenario(const RunConfig& cfg, const ScenarioSpec& spec);

}  // namespace evflow
