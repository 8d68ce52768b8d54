#include "evflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evflow/dynamics.hpp"
#include "evflow/errors.hpp"

namespace evflow {

DriveCycle::DriveCycle(std::string name, std::vector<double> t,
                       std::vector<double> v)
    : name_(std::move(name)), t_(std::move(t)), v_(std::move(v)) {
    if (t_.size() != v_.size() || t_.size() < 2) {
        throw ValidationError("drive cycle: need at least two samples");
    }
    if (t_.front() != 0.0) {
        throw ValidationError("drive cycle: time must start at 0");
    }
    for (std::size_t i = 0; i < t_.size(); ++i) {
        if (!std::isfinite(t_[i]) || !std::isfinite(v_[i])) {
            throw ValidationError("drive cycle: non-finite value at row " +
                                  std::to_string(i + 2));
        }
        if (i > 0 && t_[i] <= t_[i - 1]) {
            throw ValidationError("drive cycle: non-increasing time at row " +
                                  std::to_string(i + 2));
        }
        if (v_[i] < 0.0) {
            throw ValidationError("drive cycle: negative speed at row " +
                                  std::to_string(i + 2));
        }
    }
    arc_.resize(t_.size());
    arc_[0] = 0.0;
    for (std::size_t i = 1; i < t_.size(); ++i) {
        arc_[i] = arc_[i - 1] + 0.5 * (v_[i] + v_[i - 1]) * (t_[i] - t_[i - 1]);
    }
}

DriveCycle DriveCycle::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("drive cycle: cannot open " + path);
    }
    std::string line;
    std::vector<double> t, v;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) continue;
        if (row == 1) {
            if (line != "time_s,speed_mps") {
                throw ParseError(path + ": row 1: expected header time_s,speed_mps");
            }
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(path + ": row " + std::to_string(row) +
                             ": expected two comma-separated columns");
        }
        try {
            std::size_t used = 0;
            const double ti = std::stod(line.substr(0, comma), &used);
            if (used != comma) throw std::invalid_argument("trailing");
            const std::string rest = line.substr(comma + 1);
            const double vi = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument("trailing");
            t.push_back(ti);
            v.push_back(vi);
        } catch (const std::exception&) {
            throw ParseError(path + ": row " + std::to_string(row) +
                             ": malformed number");
        }
    }
    std::string name = path;
    const auto slash = name.find_last_of("/\\");
    if (slash != std::string::npos) name = name.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    if (dot != std::string::npos) name = name.substr(0, dot);
    return DriveCycle(name, std::move(t), std::move(v));
}

double DriveCycle::speed_at(double time) const {
    if (time <= t_.front()) return v_.front();
    if (time >= t_.back()) return v_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), time);
    const std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    const std::size_t lo = hi - 1;
    const double frac = (time - t_[lo]) / (t_[hi] - t_[lo]);
    return v_[lo] + frac * (v_[hi] - v_[lo]);
}

double DriveCycle::nominal_distance() const { return arc_.empty() ? 0.0 : arc_.back(); }

double DriveCycle::nominal_arc_at(double time) const {
    if (time <= t_.front()) return 0.0;
    if (time >= t_.back()) return arc_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), time);
    const std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    const std::size_t lo = hi - 1;
    const double dt = time - t_[lo];
    const double v_here = speed_at(time);
    return arc_[lo] + 0.5 * (v_[lo] + v_here) * dt;
}

double LaneGeometry::length_at(double v) const {
    // Peak quintic lateral acceleration is 5.7735 dy v^2 / L^2.
    const double unclamped = v * std::sqrt(5.7735 * lane_width / max_lat_accel);
    return std::clamp(unclamped, min_length, max_length);
}

void Scenario::validate() const {
    vehicle.validate();
    tire.validate();
    powertrain.validate();
    battery.validate();
    driver.validate();
    if (cycle.size() < 2) {
        throw ValidationError("scenario: drive cycle is empty");
    }
    if (!(dt > 0.0) || dt > 0.01) {
        throw ValidationError("scenario: dt must be in (0, 10 ms]");
    }
    if (lane_change_interval < 0.0) {
        throw ValidationError("scenario: lane_change_interval must be >= 0");
    }
    if (repetitions < 1) {
        throw ValidationError("scenario: repetitions must be >= 1");
    }
    if (trace_decimation < 1) {
        throw ValidationError("scenario: trace_decimation must be >= 1");
    }
}

namespace {

// Nominal time at which the cycle first reaches arc length s (s within one
// cycle). Inverse of the per-sample cumulative arc via linear scan of the
// bracketing sample interval.
double time_at_arc(const DriveCycle& cycle, double s) {
    const auto& t = cycle.times();
    const auto& v = cycle.speeds();
    double arc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double seg = 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
        if (arc + seg >= s) {
            // Solve the quadratic arc growth within the sample interval.
            const double h = t[i] - t[i - 1];
            const double need = s - arc;
            const double a = 0.5 * (v[i] - v[i - 1]) / h;
            const double b = v[i - 1];
            if (std::abs(a) < 1e-12) {
                return t[i - 1] + (b > 0.0 ? need / b : h);
            }
            const double disc = std::max(b * b + 4.0 * a * need, 0.0);
            const double tau = (-b + std::sqrt(disc)) / (2.0 * a);
            return t[i - 1] + std::clamp(tau, 0.0, h);
        }
        arc += seg;
    }
    return t.back();
}

}  // namespace

LateralReference schedule_lane_changes(const DriveCycle& cycle, double interval_m,
                                       const LaneGeometry& geom, int repetitions) {
    if (interval_m <= 0.0) {
        return LateralReference{};
    }
    const double cycle_distance = cycle.nominal_distance();
    const double total = cycle_distance * repetitions;
    const auto& times = cycle.times();
    const auto& speeds = cycle.speeds();

    std::vector<LaneChangeSegment> segments;
    double direction = 1.0;
    double prev_end = 0.0;
    for (double anchor = interval_m; anchor < total; anchor += interval_m) {
        double start = std::max(anchor, prev_end + 1.0);
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            if (start >= total) break;
            const int rep = static_cast<int>(start / cycle_distance);
            const double local = start - rep * cycle_distance;
            const double t_start = time_at_arc(cycle, local);
            const double v_start = cycle.speed_at(t_start);
            if (v_start < geom.min_start_speed) {
                // Defer to the next trace sample moving at or above the
                // minimum speed.
                const auto it = std::upper_bound(times.begin(), times.end(), t_start);
                double next_arc = -1.0;
                for (std::size_t i = static_cast<std::size_t>(it - times.begin());
                     i < times.size(); ++i) {
                    if (speeds[i] >= geom.min_start_speed) {
                        next_arc = cycle.nominal_arc_at(times[i]);
                        break;
                    }
                }
                if (next_arc < 0.0) {
                    // Wrap into the next repetition.
                    const double wrap = (rep + 1) * cycle_distance;
                    if (wrap >= total) break;
                    start = wrap + 1.0;
                    continue;
                }
                start = rep * cycle_distance + std::max(next_arc, local + 1.0);
                continue;
            }
            const double length = geom.length_at(v_start);
            if (start + length > total) break;
            // Reject windows containing a standstill; defer past it.
            const double t_end = time_at_arc(cycle, std::min(local + length, cycle_distance));
            bool idle_inside = local + length > cycle_distance;  // wraps over the cycle splice
            for (std::size_t i = 0; i < times.size() && !idle_inside; ++i) {
                if (times[i] > t_start && times[i] < t_end && speeds[i] <= 0.0) {
                    idle_inside = true;
                }
            }
            if (idle_inside) {
                start += std::max(length, 25.0);
                continue;
            }
            segments.push_back({start, length, direction * geom.lane_width});
            direction = -direction;
            prev_end = start + length;
            placed = true;
        }
    }
    return LateralReference(std::move(segments));
}

double range_extrapolate(double capacity_kwh, double battery_energy_kwh,
                         double distance_km) {
    if (!(capacity_kwh > 0.0) || !(battery_energy_kwh > 0.0) || !(distance_km > 0.0)) {
        throw DomainError("range extrapolation requires positive capacity, energy and distance");
    }
    return capacity_kwh * distance_km / battery_energy_kwh;
}

namespace {

struct StepOutputs {
    ActuatorCommand cmd;
    TorqueSplit split;
    DrivelineOutput driveline;
    WheelVelocities wvel;
    WheelForces forces;
    WheelTorques torques;
    BodyForces body;
    MotorElectrical electrical;
    double battery_power = 0.0;
};

// Everything downstream of the driver for the current state and commands.
StepOutputs evaluate_plant(const Scenario& s, const ChassisState& chassis,
                           const WheelState& wheels, const BatteryState& batt,
                           const ActuatorCommand& cmd) {
    StepOutputs out;
    out.cmd = cmd;

    const double omega_m =
        s.powertrain.gear_ratio * 0.5 *
        (wheels.omega[kRearLeft] + wheels.omega[kRearRight]);
    out.split = motor_torque_command(cmd, omega_m, s.regen_enabled, s.powertrain, batt);
    out.driveline = driveline_forward(out.split.motor_torque, wheels.omega, s.powertrain);

    out.wvel = wheel_velocities(chassis, cmd.steer, s.vehicle);
    out.forces.fz = static_wheel_loads(s.vehicle);
    out.torques.axle = out.driveline.axle_torque;
    out.torques.brake = out.split.friction_brake;
    for (int i = 0; i < 4; ++i) {
        const SlipState slip = slip_state(out.wvel[i], wheels.omega[i],
                                          s.vehicle.wheel_radius, s.tire.low_speed_eps);
        const Vec2 f = tire_force(slip, out.forces.fz[i], s.tire);
        out.forces.fx[i] = f.x;
        out.forces.fy[i] = f.y;
        out.torques.rolling[i] =
            rolling_resistance(out.forces.fz[i], wheels.omega[i],
                               s.vehicle.rolling_coeff, s.vehicle.wheel_radius,
                               s.tire.low_speed_eps);
    }
    out.body = aggregate_forces(out.forces, cmd.steer, aero_drag(chassis.vx, s.vehicle),
                                s.vehicle);
    out.electrical = motor_electrical(out.split.motor_torque, out.driveline.motor_speed,
                                      s.powertrain);
    return out;
}

PowerSample make_sample(const Scenario& s, double t, const ChassisState& chassis,
                        const WheelState& wheels, const StepOutputs& o,
                        double battery_power) {
    PowerSample ps;
    ps.t = t;
    for (int i = 0; i < 4; ++i) {
        const double omega = wheels.omega[i];
        const double net_in = o.torques.axle[i] - o.torques.brake[i] - o.torques.rolling[i];
        ps.wheel_in[i] = net_in * omega;
        ps.wheel_in_axle[i] = o.torques.axle[i] * omega;
        ps.wheel_rot[i] = (net_in - o.forces.fx[i] * s.vehicle.wheel_radius) * omega;
        ps.wheel_loss[i] =
            o.forces.fx[i] * (s.vehicle.wheel_radius * omega - o.wvel[i].x);
        ps.wheel_out_x[i] = o.forces.fx[i] * o.wvel[i].x;
        ps.wheel_out_y[i] = o.forces.fy[i] * o.wvel[i].y;
    }
    // Maneuver power from the wheel-contact resultants: drag is a body
    // force, not a contact force, so it is added back here and tracked in
    // its own channel.
    ps.maneuver = (o.body.fx + o.body.drag) * chassis.vx + o.body.fy * chassis.vy +
                  o.body.mz * chassis.yaw_rate;
    ps.drag = o.body.drag * chassis.vx;
    ps.diff_out = ps.wheel_in_axle[kRearLeft] + ps.wheel_in_axle[kRearRight];
    ps.motor_out = o.split.motor_torque * o.driveline.motor_speed;
    ps.motor_in = o.electrical.electrical_power;
    ps.battery = battery_power;
    ps.motor_torque = o.split.motor_torque;
    ps.chassis_kinetic = chassis.kinetic_energy(s.vehicle);
    return ps;
}

}  // namespace

RunResult run(const Scenario& s, const TraceSink& sink) {
    s.validate();

    const LateralReference lane_ref =
        schedule_lane_changes(s.cycle, s.lane_change_interval, s.lane, s.repetitions);

    ChassisState chassis;
    WheelState wheels;
    BatteryState batt;
    batt.soc = s.battery.soc_initial;
    batt.terminal_voltage = s.battery.open_circuit_voltage(batt.soc);

    SpeedController speed_ctrl(s.driver);
    LateralController lat_ctrl(s.driver, s.vehicle, s.tire);

    auto ledger = std::make_shared<EnergyLedger>(s.dt);
    ledger->set_diff_efficiency(s.powertrain.diff_efficiency);

    const double cycle_duration = s.cycle.duration();
    const int max_reps = s.run_to_depletion ? 100000 : s.repetitions;
    const std::uint64_t steps_per_rep =
        static_cast<std::uint64_t>(std::llround(cycle_duration / s.dt));
    const std::uint64_t total_steps = steps_per_rep * static_cast<std::uint64_t>(max_reps);

    double t = 0.0;
    double arc = 0.0;
    double sq_error_sum = 0.0;
    double peak_lat_error = 0.0;
    bool depleted = false;
    ActuatorCommand cmd;

    RunResult result;
    result.scenario_name = s.name.empty() ? s.cycle.name() : s.name;
    result.cycle_name = s.cycle.name();
    result.lane_change_interval = s.lane_change_interval;
    result.regen_enabled = s.regen_enabled;

    std::uint64_t k = 0;
    for (; k < total_steps; ++k) {
        const double local_t = t - cycle_duration * std::floor(t / cycle_duration);
        const double v_target =
            (t > 0.0 && local_t == 0.0) ? s.cycle.speed_at(cycle_duration)
                                        : s.cycle.speed_at(local_t);

        const auto [accel, brake] = speed_ctrl.update(v_target, chassis.vx, s.dt);
        cmd.accel_pedal = accel;
        cmd.brake_pedal = brake;
        cmd.steer = lat_ctrl.update(chassis, lane_ref, arc, s.dt);

        const StepOutputs o = evaluate_plant(s, chassis, wheels, batt, cmd);

        BatteryState batt_next;
        try {
            batt_next = battery_step(o.electrical.electrical_power, o.split.motor_torque,
                                     s.regen_enabled, batt, s.battery, s.powertrain, s.dt);
        } catch (const SocDepleted&) {
            depleted = true;
            break;
        }
        const double battery_power = batt_next.terminal_voltage * batt_next.current;

        const PowerSample sample = make_sample(s, t, chassis, wheels, o, battery_power);
        ledger->accumulate(sample, s.dt);

        const double err = v_target - chassis.vx;
        sq_error_sum += err * err;
        const double lat_err = std::abs(chassis.y - lane_ref.offset_at(arc));
        peak_lat_error = std::max(peak_lat_error, lat_err);

        if (sink && k % static_cast<std::uint64_t>(s.trace_decimation) == 0) {
            TraceRow row;
            row.t = t;
            row.chassis = chassis;
            row.delta = cmd.steer;
            row.accel_pedal = cmd.accel_pedal;
            row.brake_pedal = cmd.brake_pedal;
            row.v_target = v_target;
            row.y_ref = lane_ref.offset_at(arc);
            row.omega = wheels.omega;
            row.fx = o.forces.fx;
            row.fy = o.forces.fy;
            row.soc = batt_next.soc;
            row.power = sample;
            sink(row);
        }

        const double vx_before = chassis.vx;
        const bool stopped = step_chassis(chassis, o.body, s.vehicle, s.dt);
        for (int i = 0; i < 4; ++i) {
            wheels.omega[i] = step_wheel_spin(wheels.omega[i], o.torques.axle[i],
                                              o.torques.brake[i], o.wvel[i],
                                              o.forces.fz[i], s.tire, s.vehicle, s.dt);
            if (stopped && o.torques.axle[i] <= 0.0) {
                wheels.omega[i] = 0.0;
            }
        }
        batt = batt_next;
        arc += 0.5 * (vx_before + chassis.vx) * s.dt;
        t += s.dt;
    }

    // Closing sample so the trapezoid covers the final step; the last
    // commands are held.
    if (k > 0) {
        const StepOutputs o = evaluate_plant(s, chassis, wheels, batt, cmd);
        const double battery_power = batt.terminal_voltage * batt.current;
        ledger->accumulate(make_sample(s, t, chassis, wheels, o, battery_power), s.dt);
    }

    result.distance_km = arc / 1000.0;
    result.battery_energy_kwh = ledger->battery_out() / 3.6e6;
    result.rms_speed_error =
        k > 0 ? std::sqrt(sq_error_sum / static_cast<double>(k)) : 0.0;
    result.peak_lateral_error = peak_lat_error;
    result.duration_s = t;
    result.soc_depleted = depleted;
    result.final_soc = batt.soc;
    result.ledger = std::move(ledger);
    return result;
}

}  // namespace evflow
