#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evflow/types.hpp"

namespace evflow {

// Instantaneous powers for one integration step, all in W. Sampled on the
// integrator grid; consecutive samples advance the ledger by trapezoid.
struct PowerSample {
    double t = 0.0;

    WheelArray wheel_in{};       // (T_w - T_b - T_R) omega
    WheelArray wheel_in_axle{};  // T_w omega (powertrain input to wheel)
    WheelArray wheel_rot{};      // (T_w - T_b - T_R - F^x r_w) omega
    WheelArray wheel_loss{};     // F^x (r_w omega - v^x)
    WheelArray wheel_out_x{};    // F^x v^x
    WheelArray wheel_out_y{};    // F^y v^y

    double maneuver = 0.0;   // wheel-contact resultants: F_x v_x + F_y v_y + M_z psi_dot
    double drag = 0.0;       // F_a v_x
    double diff_out = 0.0;   // sum of rear T_w omega
    double motor_out = 0.0;  // T_m omega_m
    double motor_in = 0.0;   // motor electrical power
    double battery = 0.0;    // v_b i_b

    double motor_torque = 0.0;     // T_m, for traction/regen gating
    double chassis_kinetic = 0.0;  // chassis KE at the sample time [J]
};

struct IdentityResidual {
    std::string name;
    double lhs = 0.0;       // [J]
    double rhs = 0.0;       // [J]
    double residual = 0.0;  // |lhs - rhs| [J]
    double relative = 0.0;  // residual / max(scale, 1 kJ)
    bool pass = true;
};

struct BalanceReport {
    std::vector<IdentityResidual> identities;
    double tolerance = 0.0;

    bool all_pass() const;
    double worst_relative() const;
};

struct SignSummary {
    WheelArray wheel_out_x{};          // cumulative per-wheel E_out^x [J]
    double battery_energy = 0.0;       // E_b,out [J]
    double battery_power_min = 0.0;    // min v_b i_b over the run [W]
    bool battery_power_ever_negative = false;
};

// Running energy ledger: every E_* accumulator advanced once per
// integration step by trapezoid on the shared grid. Totals in J.
class EnergyLedger {
public:
    explicit EnergyLedger(double dt);

    // Throws GridMismatch if dt differs from the construction-time step.
    void accumulate(const PowerSample& s, double dt);

    // Totals.
    double maneuver() const { return maneuver_; }            // E_w,m
    double drag_work() const { return drag_; }
    double diff_out() const { return diff_out_; }            // E_d,out
    double motor_out() const { return motor_out_; }          // E_m,out
    double motor_in() const { return motor_in_; }            // E_m,in
    double battery_out() const { return battery_; }          // E_b,out
    const WheelArray& wheel_in() const { return wheel_in_; }
    const WheelArray& wheel_in_axle() const { return wheel_in_axle_; }
    const WheelArray& wheel_rot() const { return wheel_rot_; }
    const WheelArray& wheel_loss() const { return wheel_loss_; }
    const WheelArray& wheel_out_x() const { return wheel_out_x_; }
    const WheelArray& wheel_out_y() const { return wheel_out_y_; }
    double wheel_out_total() const;  // sum over wheels of E_out^x + E_out^y

    double kinetic_delta() const { return kinetic_last_ - kinetic_first_; }
    std::uint64_t samples() const { return count_; }
    double dt() const { return dt_; }

    // Identity residuals of the energy-flow chain; each flagged against
    // tol * max(|scale|, 1 kJ).
    BalanceReport balance_report(double tol) const;
    SignSummary classify_signs() const;

    // 95th percentile of (slip friction loss + wheel rotation power) /
    // battery power over traction samples (T_m > 0, battery power above a
    // small floor).
    double traction_share_p95() const;

private:
    double dt_ = 0.0;
    bool has_prev_ = false;
    PowerSample prev_;
    std::uint64_t count_ = 0;

    WheelArray wheel_in_{}, wheel_in_axle_{}, wheel_rot_{}, wheel_loss_{},
        wheel_out_x_{}, wheel_out_y_{};
    double maneuver_ = 0.0, drag_ = 0.0, diff_out_ = 0.0, motor_out_ = 0.0,
           motor_in_ = 0.0, battery_ = 0.0;

    // Direction-gated accumulators for the differential efficiency check;
    // steps whose endpoints disagree on the torque sign are skipped on both
    // sides so the identity stays exact.
    double diff_out_traction_ = 0.0, motor_out_traction_ = 0.0;
    double diff_out_regen_ = 0.0, motor_out_regen_ = 0.0;
    double diff_efficiency_ = 1.0;  // captured from the first sample's context

    double kinetic_first_ = 0.0, kinetic_last_ = 0.0;
    double battery_power_min_ = 0.0;

    // Histogram of the traction loss share, 4000 bins over [0, 0.2],
    // overflow in the last bin.
    std::vector<std::uint32_t> share_hist_;
    std::uint64_t share_count_ = 0;

public:
    // The differential efficiency used by the gated identity check. Set
    // once by the simulation loop before accumulation begins.
    void set_diff_efficiency(double eta) { diff_efficiency_ = eta; }
};

}  // namespace evflow
