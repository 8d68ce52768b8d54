#pragma once

#include "evflow/types.hpp"

namespace evflow {

struct TireParams {
    double slip_stiffness = 80e3;       // C_kappa [N per unit slip]
    double cornering_stiffness = 60e3;  // C_alpha [N/rad]
    double friction = 0.9;              // mu [-]
    double low_speed_eps = 0.3;         // eps_v, regularization velocity [m/s]

    void validate() const;
};

struct SlipState {
    double kappa = 0.0;  // slip ratio [-]
    double alpha = 0.0;  // slip angle [rad]
};

// Slip ratio and slip angle from wheel-frame contact velocity and wheel
// spin. Saturated to |kappa| <= 1, |alpha| <= pi/2.
SlipState slip_state(const Vec2& wheel_vel, double omega, double wheel_radius,
                     double eps_v);

// Combined-slip Dugoff force. Returns wheel-frame {fx, fy}; the resultant
// never exceeds mu * fz, and below half the friction limit the output
// equals the unsaturated linear forces exactly.
Vec2 tire_force(const SlipState& slip, double fz, const TireParams& p);

// Rolling resistance moment f_r * fz * r_w, smoothly signed so it opposes
// rotation and vanishes at standstill. The transition scale is eps_v
// expressed as a wheel speed.
double rolling_resistance(double fz, double omega, double rolling_coeff,
                          double wheel_radius, double eps_v);

}  // namespace evflow
