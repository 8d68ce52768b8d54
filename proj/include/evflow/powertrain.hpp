#pragma once

#include <string>
#include <vector>

#include "evflow/types.hpp"

namespace evflow {

// Optional tabulated motor loss map (omega grid x torque grid -> loss W),
// bilinearly interpolated with clamping at the grid edges. When loaded it
// replaces the polynomial loss model.
class MotorLossMap {
public:
    MotorLossMap() = default;
    static MotorLossMap load_csv(const std::string& path);

    bool empty() const { return loss_.empty(); }
    double lookup(double torque, double omega) const;

private:
    std::vector<double> omega_grid_;
    std::vector<double> torque_grid_;
    std::vector<double> loss_;  // row-major [omega][torque]
};

struct PowertrainParams {
    double gear_ratio = 9.0;         // motor rev per wheel rev [-]
    double diff_efficiency = 0.96;   // eta_diff [-]
    double inverter_efficiency = 0.95;  // eta_inv [-]
    double motor_torque_max = 250.0;    // constant-torque region limit [N m]
    double motor_power_max = 120e3;     // constant-power region limit [W]
    double regen_power_max = 60e3;      // battery charge power limit [W]
    double regen_fade_speed = 30.0;     // motor speed where regen tapers out [rad/s]
    double brake_torque_max = 2600.0;   // total friction brake torque at full pedal [N m]
    double brake_front_share = 0.6;     // fraction of friction braking on the front axle
    double loss_copper = 0.05;    // k_c [W/(N m)^2]
    double loss_iron = 2.0;       // k_i [W s/rad]
    double loss_windage = 1.5e-6; // k_w [W s^3/rad^3]
    double loss_const = 350.0;    // k_0 [W]
    MotorLossMap loss_map;        // optional CSV override

    void validate() const;

    // Peak torque curve: constant torque up to the base speed, constant
    // power above it.
    double motor_torque_limit(double omega_m) const;

    // P_m,loss(T_m, omega_m): polynomial by default, map when loaded.
    double motor_loss(double torque, double omega_m) const;
};

struct BatteryParams {
    double capacity_kwh = 54.28;       // pack energy capacity
    double voc_min = 320.0;            // open-circuit voltage at soc = 0 [V]
    double voc_max = 400.0;            // open-circuit voltage at soc = 1 [V]
    double internal_resistance = 0.08; // r_int [ohm]
    double current_max = 600.0;        // |i_b| limit [A]
    double soc_initial = 0.9;

    void validate() const;
    double open_circuit_voltage(double soc) const;
    // Charge capacity [C] consistent with the energy capacity under the
    // affine OCV curve (mean voltage).
    double charge_capacity() const;
};

struct BatteryState {
    double soc = 0.9;
    double terminal_voltage = 0.0;  // v_b [V]
    double current = 0.0;           // i_b [A], positive = discharge
};

struct ActuatorCommand {
    double accel_pedal = 0.0;  // [0, 1]
    double brake_pedal = 0.0;  // [0, 1]
    double steer = 0.0;        // delta [rad]
};

struct TorqueSplit {
    double motor_torque = 0.0;    // T_m [N m], negative while regenerating
    WheelArray friction_brake{};  // T_b per wheel, >= 0 [N m]
};

// Pedal commands to motor torque and friction brake torques. Brake wins
// over accelerator. With regeneration enabled the motor covers braking
// demand up to min(peak torque, regen power limit), tapered out near
// standstill and cut when the battery is full; the remainder goes to the
// friction brakes with the configured front share, split equally
// left/right. Without regeneration all braking is friction.
TorqueSplit motor_torque_command(const ActuatorCommand& cmd, double omega_m,
                                 bool regen_enabled, const PowertrainParams& p,
                                 const BatteryState& batt);

struct DrivelineOutput {
    WheelArray axle_torque{};  // T_w per wheel; front entries are zero
    double motor_speed = 0.0;  // omega_m [rad/s]
};

// Open differential on the rear axle: equal torque to both rear wheels,
// motor speed = gear ratio times the mean rear wheel speed. Gear
// efficiency reverses with power flow direction (T_m < 0).
DrivelineOutput driveline_forward(double motor_torque, const WheelArray& omega,
                                  const PowertrainParams& p);

struct MotorElectrical {
    double mech_power = 0.0;        // P_m,out = T_m omega_m [W]
    double electrical_power = 0.0;  // P_m,in = P_m,out + P_m,loss [W]
};

MotorElectrical motor_electrical(double torque, double omega_m,
                                 const PowertrainParams& p);

// Battery update over one step. Battery terminal power is the motor
// electrical power divided by the inverter efficiency while motoring
// (T_m >= 0) and multiplied by it while regenerating; terminal voltage and
// current solve v_oc - i r = v_b with P = v_b i (physical root); SOC by
// coulomb counting. Charge power is clamped to the regen power limit and
// SOC saturates at 1. Throws SocDepleted when the SOC reaches zero during
// discharge.
BatteryState battery_step(double motor_electrical_power, double motor_torque,
                          bool regen_enabled, const BatteryState& batt,
                          const BatteryParams& bp, const PowertrainParams& p,
                          double dt);

}  // namespace evflow
