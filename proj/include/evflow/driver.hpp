#pragma once

#include <utility>
#include <vector>

#include "evflow/tire.hpp"
#include "evflow/types.hpp"

namespace evflow {

struct DriverParams {
    double kp = 0.3;               // pedal per m/s of speed error
    double ki = 0.05;              // pedal per m of integrated error
    double pedal_deadband = 0.02;  // speed error below which both pedals rest [m/s]
    double pedal_tau = 0.15;       // first-order pedal response lag [s], 0 = none
    double preview_time = 0.45;    // lateral preview horizon [s]
    double lateral_gain = 0.15;    // steering per m of preview error [rad/m]
    double steer_max = 0.6;        // [rad]
    double steer_rate_max = 0.8;   // [rad/s]

    void validate() const;
};

// One lane-change segment: a quintic blend from the current lane offset to
// offset + delta_y over [start_s, start_s + length] of arc length.
struct LaneChangeSegment {
    double start_s = 0.0;  // [m]
    double length = 0.0;   // [m]
    double delta_y = 0.0;  // signed offset change [m]
};

// Piecewise lateral reference over arc length: constant lane offset outside
// segments, C2 quintic blends inside. Segments must be ordered and
// non-overlapping.
class LateralReference {
public:
    LateralReference() = default;
    explicit LateralReference(std::vector<LaneChangeSegment> segments);

    // y_ref(s) and its slope dy/ds.
    std::pair<double, double> evaluate(double s) const;
    double offset_at(double s) const { return evaluate(s).first; }
    // d2y/ds2; zero outside segments and at their ends.
    double curvature_at(double s) const;

    const std::vector<LaneChangeSegment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }

private:
    std::vector<LaneChangeSegment> segments_;
    std::vector<double> base_offset_;  // lane offset before each segment
};

// PI speed tracking with anti-windup. Positive controller output maps to
// the accelerator, negative to the brake; inside the deadband both pedals
// are zero and the integrator bleeds off. The signed output passes through
// a first-order lag (driver foot response) before the pedal split, so the
// pedals never overlap.
class SpeedController {
public:
    explicit SpeedController(const DriverParams& p) : p_(p) {}

    // Returns {accel_pedal, brake_pedal}, each in [0, 1], never both nonzero.
    std::pair<double, double> update(double v_target, double v, double dt);
    void reset() {
        integral_ = 0.0;
        output_ = 0.0;
    }

private:
    DriverParams p_;
    double integral_ = 0.0;
    double output_ = 0.0;  // lagged signed pedal command
};

// Preview steering with an internal-model feedforward: the reference
// curvature at the preview point maps to a steer angle through the
// steady-state cornering inverse of the configured vehicle (wheelbase term
// plus the per-axle slip angles needed for the cornering forces, tire
// saturation included), and a proportional term on the preview-point error
// corrects the residual. Output clamped and rate limited.
class LateralController {
public:
    LateralController(const DriverParams& p, const VehicleParams& vehicle,
                      const TireParams& tire);

    double update(const ChassisState& chassis, const LateralReference& ref,
                  double s, double dt);
    void reset() { steer_ = 0.0; }

private:
    // Slip angle that produces lateral force F on one axle, inverting the
    // combined-slip saturation law.
    double axle_slip_for_force(double force, double axle_load) const;
    double steady_state_steer(double curvature, double vx) const;

    DriverParams p_;
    double wheelbase_;        // [m]
    double mass_;             // [kg]
    double front_share_;      // b / (a+b)
    double rear_share_;       // a / (a+b)
    double axle_stiffness_;   // 2 C_alpha [N/rad]
    double friction_;         // mu [-]
    double front_axle_load_;  // [N]
    double rear_axle_load_;   // [N]
    double lead_coeff_;       // response-lag lead per unit speed [s^2/m]
    double steer_ = 0.0;
};

}  // namespace evflow
