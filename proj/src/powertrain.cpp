#include "evflow/powertrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evflow/errors.hpp"

namespace evflow {

namespace {

void require_unit_interval(double value, const char* key, bool allow_zero) {
    const bool ok = std::isfinite(value) && (allow_zero ? value >= 0.0 : value > 0.0) &&
                    value <= 1.0;
    if (!ok) {
        throw ConfigError(std::string(key) + ": must be in " +
                          (allow_zero ? "[0, 1]" : "(0, 1]"));
    }
}

void require_positive(double value, const char* key) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw ConfigError(std::string(key) + ": must be positive and finite");
    }
}

void require_nonnegative(double value, const char* key) {
    if (!std::isfinite(value) || value < 0.0) {
        throw ConfigError(std::string(key) + ": must be nonnegative and finite");
    }
}

}  // namespace

MotorLossMap MotorLossMap::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("motor loss map: cannot open " + path);
    }
    // Format: first row `0,<torque grid...>`, following rows
    // `<omega>,<loss...>`.
    MotorLossMap map;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("motor loss map: bad number at row " +
                                 std::to_string(row));
            }
        }
        if (row == 1) {
            map.torque_grid_.assign(values.begin() + 1, values.end());
        } else {
            if (values.size() != map.torque_grid_.size() + 1) {
                throw ParseError("motor loss map: row " + std::to_string(row) +
                                 " has wrong column count");
            }
            map.omega_grid_.push_back(values.front());
            map.loss_.insert(map.loss_.end(), values.begin() + 1, values.end());
        }
    }
    if (map.omega_grid_.size() < 2 || map.torque_grid_.size() < 2) {
        throw ValidationError("motor loss map: need at least a 2x2 grid");
    }
    for (std::size_t i = 1; i < map.omega_grid_.size(); ++i) {
        if (map.omega_grid_[i] <= map.omega_grid_[i - 1]) {
            throw ValidationError("motor loss map: omega grid not increasing");
        }
    }
    for (std::size_t i = 1; i < map.torque_grid_.size(); ++i) {
        if (map.torque_grid_[i] <= map.torque_grid_[i - 1]) {
            throw ValidationError("motor loss map: torque grid not increasing");
        }
    }
    return map;
}

double MotorLossMap::lookup(double torque, double omega) const {
    auto bracket = [](const std::vector<double>& grid, double x) {
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - grid.begin());
        hi = std::clamp<std::size_t>(hi, 1, grid.size() - 1);
        const std::size_t lo = hi - 1;
        double frac = (x - grid[lo]) / (grid[hi] - grid[lo]);
        return std::pair<std::size_t, double>(lo, std::clamp(frac, 0.0, 1.0));
    };
    const auto [i, fo] = bracket(omega_grid_, omega);
    const auto [j, ft] = bracket(torque_grid_, std::abs(torque));
    const std::size_t n = torque_grid_.size();
    const double a = loss_[i * n + j];
    const double b = loss_[i * n + j + 1];
    const double c = loss_[(i + 1) * n + j];
    const double d = loss_[(i + 1) * n + j + 1];
    return (1.0 - fo) * ((1.0 - ft) * a + ft * b) + fo * ((1.0 - ft) * c + ft * d);
}

void PowertrainParams::validate() const {
    require_positive(gear_ratio, "powertrain.gear_ratio");
    require_unit_interval(diff_efficiency, "powertrain.eta_diff", false);
    require_unit_interval(inverter_efficiency, "powertrain.eta_inv", false);
    require_positive(motor_torque_max, "powertrain.motor_torque_max");
    require_positive(motor_power_max, "powertrain.motor_power_max");
    require_nonnegative(regen_power_max, "powertrain.P_regen_max");
    require_nonnegative(regen_fade_speed, "powertrain.regen_fade_speed");
    require_positive(brake_torque_max, "powertrain.brake_torque_max");
    require_unit_interval(brake_front_share, "powertrain.brake_front_share", true);
    require_nonnegative(loss_copper, "powertrain.k_c");
    require_nonnegative(loss_iron, "powertrain.k_i");
    require_nonnegative(loss_windage, "powertrain.k_w");
    require_nonnegative(loss_const, "powertrain.k_0");
}

double PowertrainParams::motor_torque_limit(double omega_m) const {
    const double base_speed = motor_power_max / motor_torque_max;
    if (omega_m <= base_speed) {
        return motor_torque_max;
    }
    return motor_power_max / omega_m;
}

double PowertrainParams::motor_loss(double torque, double omega_m) const {
    if (!loss_map.empty()) {
        return loss_map.lookup(torque, omega_m);
    }
    return loss_copper * torque * torque + loss_iron * omega_m +
           loss_windage * omega_m * omega_m * omega_m + loss_const;
}

void BatteryParams::validate() const {
    require_positive(capacity_kwh, "battery.capacity_kwh");
    require_positive(voc_min, "battery.v_oc_min");
    require_positive(voc_max, "battery.v_oc_max");
    if (voc_max < voc_min) {
        throw ConfigError("battery.v_oc_max: must be >= battery.v_oc_min");
    }
    require_nonnegative(internal_resistance, "battery.r_int");
    require_positive(current_max, "battery.i_max");
    require_unit_interval(soc_initial, "battery.soc_initial", true);
}

double BatteryParams::open_circuit_voltage(double soc) const {
    const double s = std::clamp(soc, 0.0, 1.0);
    return voc_min + (voc_max - voc_min) * s;
}

double BatteryParams::charge_capacity() const {
    const double energy_j = capacity_kwh * 3.6e6;
    const double mean_voltage = 0.5 * (voc_min + voc_max);
    return energy_j / mean_voltage;
}

TorqueSplit motor_torque_command(const ActuatorCommand& cmd, double omega_m,
                                 bool regen_enabled, const PowertrainParams& p,
                                 const BatteryState& batt) {
    TorqueSplit out;
    if (cmd.brake_pedal > 0.0) {
        // Brake wins over accelerator.
        double demand = cmd.brake_pedal * p.brake_torque_max;  // wheel level
        if (regen_enabled && batt.soc < 1.0) {
            double regen_limit = p.motor_torque_limit(omega_m);
            if (omega_m > 0.0) {
                regen_limit = std::min(regen_limit, p.regen_power_max / omega_m);
            }
            if (p.regen_fade_speed > 0.0) {
                regen_limit *= std::clamp(omega_m / p.regen_fade_speed, 0.0, 1.0);
            }
            // Wheel-level braking provided by motor torque T_m < 0 is
            // gear |T_m| / eta_diff (reversed efficiency).
            const double regen_motor =
                std::min(regen_limit, demand * p.diff_efficiency / p.gear_ratio);
            out.motor_torque = -regen_motor;
            demand -= regen_motor * p.gear_ratio / p.diff_efficiency;
            demand = std::max(demand, 0.0);
        }
        const double front = demand * p.brake_front_share / 2.0;
        const double rear = demand * (1.0 - p.brake_front_share) / 2.0;
        out.friction_brake = {front, front, rear, rear};
        return out;
    }
    if (cmd.accel_pedal > 0.0) {
        out.motor_torque = cmd.accel_pedal * p.motor_torque_limit(omega_m);
    }
    return out;
}

DrivelineOutput driveline_forward(double motor_torque, const WheelArray& omega,
                                  const PowertrainParams& p) {
    DrivelineOutput out;
    out.motor_speed = p.gear_ratio * 0.5 * (omega[kRearLeft] + omega[kRearRight]);
    const double eta = motor_torque >= 0.0 ? p.diff_efficiency : 1.0 / p.diff_efficiency;
    const double per_wheel = p.gear_ratio * eta * motor_torque / 2.0;
    out.axle_torque = {0.0, 0.0, per_wheel, per_wheel};
    return out;
}

MotorElectrical motor_electrical(double torque, double omega_m,
                                 const PowertrainParams& p) {
    MotorElectrical e;
    e.mech_power = torque * omega_m;
    e.electrical_power = e.mech_power + p.motor_loss(torque, omega_m);
    return e;
}

BatteryState battery_step(double motor_electrical_power, double motor_torque,
                          bool regen_enabled, const BatteryState& batt,
                          const BatteryParams& bp, const PowertrainParams& p,
                          double dt) {
    double power = motor_torque >= 0.0
                       ? motor_electrical_power / p.inverter_efficiency
                       : motor_electrical_power * p.inverter_efficiency;
    if (!regen_enabled || batt.soc >= 1.0) {
        power = std::max(power, 0.0);
    }
    if (power < -p.regen_power_max) {
        power = -p.regen_power_max;
    }

    BatteryState next = batt;
    const double voc = bp.open_circuit_voltage(batt.soc);
    const double r = bp.internal_resistance;
    double current = 0.0;
    if (r <= 0.0) {
        current = power / voc;
    } else {
        const double disc = voc * voc - 4.0 * r * power;
        if (disc < 0.0) {
            throw NonFiniteState("battery power demand exceeds the deliverable maximum");
        }
        current = (voc - std::sqrt(disc)) / (2.0 * r);
    }
    if (std::abs(current) > bp.current_max) {
        throw NonFiniteState("battery current limit exceeded");
    }
    next.current = current;
    next.terminal_voltage = voc - current * r;
    next.soc = batt.soc - current * dt / bp.charge_capacity();
    if (next.soc > 1.0) {
        next.soc = 1.0;
    }
    if (next.soc <= 0.0) {
        next.soc = 0.0;
        if (current > 0.0) {
            throw SocDepleted("battery state of charge depleted");
        }
    }
    return next;
}

}  // namespace evflow
