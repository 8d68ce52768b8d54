#include "evflow/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "evflow/errors.hpp"

namespace evflow {

WheelVelocities wheel_velocities(const ChassisState& chassis, double delta,
                                 const VehicleParams& p) {
    const double vx = chassis.vx;
    const double vy = chassis.vy;
    const double r = chassis.yaw_rate;
    const double cd = std::cos(delta);
    const double sd = std::sin(delta);

    // Contact-point velocities in the body frame; left wheels sit at +l.
    const double vx_left = vx - r * p.half_track;
    const double vx_right = vx + r * p.half_track;
    const double vy_front = vy + r * p.a;
    const double vy_rear = vy - r * p.b;

    WheelVelocities w;
    // Front wheels: rotate into the steered wheel frame.
    w[kFrontLeft] = {vx_left * cd + vy_front * sd, -vx_left * sd + vy_front * cd};
    w[kFrontRight] = {vx_right * cd + vy_front * sd, -vx_right * sd + vy_front * cd};
    // Rear wheels are unsteered.
    w[kRearLeft] = {vx_left, vy_rear};
    w[kRearRight] = {vx_right, vy_rear};
    return w;
}

WheelArray static_wheel_loads(const VehicleParams& p) {
    const double total = p.mass * kGravity;
    const double front_each = total * p.b / (2.0 * p.wheelbase());
    const double rear_each = total * p.a / (2.0 * p.wheelbase());
    return {front_each, front_each, rear_each, rear_each};
}

double aero_drag(double vx, const VehicleParams& p) {
    return 0.5 * p.air_density * p.drag_coeff_area * vx * vx;
}

BodyForces aggregate_forces(const WheelForces& wheels, double delta, double drag,
                            const VehicleParams& p) {
    const double cd = std::cos(delta);
    const double sd = std::sin(delta);

    // Wheel positions relative to the COG (x forward, y left).
    const std::array<Vec2, 4> pos = {{{p.a, p.half_track},
                                      {p.a, -p.half_track},
                                      {-p.b, p.half_track},
                                      {-p.b, -p.half_track}}};

    BodyForces body;
    body.drag = drag;
    for (int i = 0; i < 4; ++i) {
        double fx_b = wheels.fx[i];
        double fy_b = wheels.fy[i];
        if (i == kFrontLeft || i == kFrontRight) {
            fx_b = wheels.fx[i] * cd - wheels.fy[i] * sd;
            fy_b = wheels.fx[i] * sd + wheels.fy[i] * cd;
        }
        body.fx += fx_b;
        body.fy += fy_b;
        body.mz += pos[i].x * fy_b - pos[i].y * fx_b;
    }
    body.fx -= drag;
    return body;
}

bool step_chassis(ChassisState& chassis, const BodyForces& body,
                  const VehicleParams& p, double dt) {
    const double vx = chassis.vx;
    const double vy = chassis.vy;
    const double r = chassis.yaw_rate;

    const double r_new = r + dt * body.mz / p.yaw_inertia;
    // Force impulse, then the exact body-frame rotation for the yaw advance.
    // The rotation preserves translational kinetic energy, so the energy
    // ledger's trapezoid power balance telescopes on the integration grid.
    const double vx_imp = vx + dt * body.fx / p.mass;
    const double vy_imp = vy + dt * body.fy / p.mass;
    const double theta = dt * r_new;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    double vx_new = ct * vx_imp + st * vy_imp;
    double vy_new = -st * vx_imp + ct * vy_imp;

    // Standstill: braking through zero clamps forward speed; the caller
    // zeroes undriven wheels so the slip model produces no force at rest.
    const bool braking_stop = vx_new < 0.0 && vx >= 0.0;
    if (vx_new < 0.0) {
        vx_new = 0.0;
    }

    chassis.vx = vx_new;
    chassis.vy = vy_new;
    chassis.yaw_rate = r_new;
    chassis.yaw += dt * r_new;
    chassis.x += dt * (vx_new * std::cos(chassis.yaw) - vy_new * std::sin(chassis.yaw));
    chassis.y += dt * (vx_new * std::sin(chassis.yaw) + vy_new * std::cos(chassis.yaw));

    if (!chassis.finite()) {
        throw NonFiniteState("chassis state left the finite range");
    }
    return braking_stop;
}

double step_wheel_spin(double omega, double axle_torque, double brake_torque,
                       const Vec2& contact_vel, double fz, const TireParams& tire,
                       const VehicleParams& p, double dt) {
    const double r_w = p.wheel_radius;
    // Explicit substeps sized from the local slip-stiffness rate
    // C r^2 / (J max(|v|, eps)); a half-unit substep rate keeps the
    // relaxation well resolved.
    const double den = std::max(std::abs(contact_vel.x), tire.low_speed_eps);
    const double rate = tire.slip_stiffness * r_w * r_w / (p.wheel_inertia * den);
    const int substeps = std::clamp(static_cast<int>(std::ceil(2.0 * rate * dt)), 1, 128);
    const double h = dt / substeps;

    double w = omega;
    for (int k = 0; k < substeps; ++k) {
        const SlipState slip = slip_state(contact_vel, w, r_w, tire.low_speed_eps);
        const double fx = tire_force(slip, fz, tire).x;
        const double rolling =
            rolling_resistance(fz, w, p.rolling_coeff, r_w, tire.low_speed_eps);
        const double net = axle_torque - brake_torque - rolling - fx * r_w;
        w += h * net / p.wheel_inertia;
        if (w < 0.0) {
            w = 0.0;
        }
    }
    if (!std::isfinite(w)) {
        throw NonFiniteState("wheel spin state left the finite range");
    }
    return w;
}

}  // namespace evflow
