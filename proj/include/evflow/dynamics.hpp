#pragma once

#include "evflow/tire.hpp"
#include "evflow/types.hpp"

namespace evflow {

// Wheel-frame contact-point velocities for the four wheels: the COG
// velocity transported to each contact point and, for the front wheels,
// rotated by the steering angle.
WheelVelocities wheel_velocities(const ChassisState& chassis, double delta,
                                 const VehicleParams& p);

// Static vertical load distribution (no load transfer): front wheels carry
// m g b / (2(a+b)) each, rear wheels m g a / (2(a+b)) each.
WheelArray static_wheel_loads(const VehicleParams& p);

// F_a = 1/2 rho (C_d A) vx^2, >= 0 for vx >= 0.
double aero_drag(double vx, const VehicleParams& p);

// Resultant force and yaw moment at the COG from tire-frame wheel forces.
// Front forces are rotated by delta into the body frame; the yaw moment is
// the sum over wheels of the planar cross product r_i x F_i with
// r_lf = (a, +l), r_rf = (a, -l), r_lr = (-b, +l), r_rr = (-b, -l).
BodyForces aggregate_forces(const WheelForces& wheels, double delta, double drag,
                            const VehicleParams& p);

// One semi-implicit Euler step of the planar chassis dynamics:
//   m (vx_dot - psi_dot vy) = F_x
//   m (vy_dot + psi_dot vx) = F_y
//   I_z psi_ddot            = M_z
// The yaw coupling advances as an exact velocity-vector rotation (it
// preserves kinetic energy, so the ledger's trapezoid power balance
// telescopes on the grid); pose integrates from the updated velocities.
// When braking would push vx through zero it clamps to standstill and
// returns true. Throws NonFiniteState when the state leaves the finite
// range.
bool step_chassis(ChassisState& chassis, const BodyForces& body,
                  const VehicleParams& p, double dt);

// One wheel-spin update over dt:
//   J_w omega_dot = T_axle - T_brake - T_R(omega) - F^x(omega) r_w
// with the contact velocity, load and applied torques frozen across the
// step. The slip force is re-evaluated on internally chosen explicit
// substeps: the slip stiffness makes a single millisecond step unstable
// below a few m/s of contact speed. Returns the new omega, clamped at zero
// against reversal under braking.
double step_wheel_spin(double omega, double axle_torque, double brake_torque,
                       const Vec2& contact_vel, double fz, const TireParams& tire,
                       const VehicleParams& p, double dt);

}  // namespace evflow
