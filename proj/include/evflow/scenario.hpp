#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evflow/driver.hpp"
#include "evflow/energy.hpp"
#include "evflow/powertrain.hpp"
#include "evflow/tire.hpp"
#include "evflow/types.hpp"

namespace evflow {

// Reference speed trace: strictly increasing times from zero, nonnegative
// speeds, piecewise-linear interpolation between samples.
class DriveCycle {
public:
    DriveCycle() = default;
    DriveCycle(std::string name, std::vector<double> t, std::vector<double> v);

    // Parses a two-column CSV (header `time_s,speed_mps`). Throws ParseError
    // for malformed rows and ValidationError for non-monotone time or
    // negative speed, both with row numbers.
    static DriveCycle load(const std::string& path);

    const std::string& name() const { return name_; }
    double duration() const { return t_.empty() ? 0.0 : t_.back(); }
    std::size_t size() const { return t_.size(); }
    double speed_at(double time) const;       // clamped linear interpolation
    double nominal_distance() const;          // trapezoid of the trace [m]
    // Arc length reached at `time` under the nominal trace [m].
    double nominal_arc_at(double time) const;

    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& speeds() const { return v_; }

private:
    std::string name_;
    std::vector<double> t_;
    std::vector<double> v_;
    std::vector<double> arc_;  // cumulative trapezoid distance per sample
};

struct LaneGeometry {
    double lane_width = 3.5;       // offset per change [m]
    double max_lat_accel = 4.5;    // peak lateral acceleration of a change [m/s^2]
    double min_length = 40.0;      // [m]
    double max_length = 150.0;     // [m]
    double min_start_speed = 5.0;  // defer segments anchored below this [m/s]

    // Quintic blend length at speed v so the peak lateral acceleration
    // stays at the cap, clamped to the length bounds.
    double length_at(double v) const;
};

struct Scenario {
    std::string name;
    DriveCycle cycle;
    double lane_change_interval = 1000.0;  // m; 0 disables lane changes
    bool regen_enabled = true;
    int repetitions = 1;
    bool run_to_depletion = false;
    double dt = 1e-3;          // s
    int trace_decimation = 10; // emit every Nth step (1 kHz grid -> 100 Hz)

    VehicleParams vehicle;
    TireParams tire;
    PowertrainParams powertrain;
    BatteryParams battery;
    DriverParams driver;
    LaneGeometry lane;

    void validate() const;
};

// One decimated step of the closed-loop state, mirrored into the trace CSV.
struct TraceRow {
    double t = 0.0;
    ChassisState chassis;
    double delta = 0.0;
    double accel_pedal = 0.0;
    double brake_pedal = 0.0;
    double v_target = 0.0;
    double y_ref = 0.0;
    WheelArray omega{};
    WheelArray fx{};
    WheelArray fy{};
    double soc = 0.0;
    PowerSample power;
};

using TraceSink = std::function<void(const TraceRow&)>;

struct RunResult {
    std::string scenario_name;
    std::string cycle_name;
    double lane_change_interval = 0.0;
    bool regen_enabled = true;
    double distance_km = 0.0;
    double battery_energy_kwh = 0.0;
    double rms_speed_error = 0.0;    // [m/s]
    double peak_lateral_error = 0.0; // max |Y - y_ref(s)| [m]
    double duration_s = 0.0;
    bool soc_depleted = false;
    double final_soc = 0.0;
    std::shared_ptr<const EnergyLedger> ledger;
    std::string trace_path;  // set by the caller when a trace was written
};

// Lane-change schedule anchored every `interval_m` of nominal arc length,
// alternating direction. Segment length follows the nominal speed at the
// anchor so the maneuver's peak lateral acceleration stays capped; anchors
// that fall on standstill or below the minimum speed are deferred to the
// next moving interval.
LateralReference schedule_lane_changes(const DriveCycle& cycle, double interval_m,
                                       const LaneGeometry& geom,
                                       int repetitions = 1);

// Closed-loop fixed-step simulation: driver -> powertrain -> tire ->
// dynamics -> energy ledger over the (possibly repeated) cycle.
RunResult run(const Scenario& s, const TraceSink& sink = nullptr);

// range = capacity * distance / battery_energy. Throws DomainError on
// nonpositive inputs.
double range_extrapolate(double capacity_kwh, double battery_energy_kwh,
                         double distance_km);

}  // namespace evflow
