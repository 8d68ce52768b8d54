#pragma once

#include <array>
#include <cmath>

namespace evflow {

inline constexpr double kGravity = 9.81;  // m/s^2

// Wheel index order used by every per-wheel array in the project.
enum Wheel : int { kFrontLeft = 0, kFrontRight = 1, kRearLeft = 2, kRearRight = 3 };

inline constexpr std::array<const char*, 4> kWheelNames{"lf", "rf", "lr", "rr"};

using WheelArray = std::array<double, 4>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

using WheelVelocities = std::array<Vec2, 4>;

struct VehicleParams {
    double a = 1.2;                 // COG to front axle [m]
    double b = 1.4;                 // COG to rear axle [m]
    double half_track = 0.8;        // l [m]
    double wheel_radius = 0.31;     // r_w, same for all wheels [m]
    double mass = 1600.0;           // m_veh [kg]
    double yaw_inertia = 2500.0;    // I_z [kg m^2]
    double wheel_inertia = 1.5;     // J_w, per wheel [kg m^2]
    double drag_coeff_area = 0.72;  // C_d * A [m^2]
    double air_density = 1.2;       // rho [kg/m^3]
    double rolling_coeff = 0.01;    // f_r [-]

    double wheelbase() const { return a + b; }
    void validate() const;  // throws ConfigError with the offending key
};

// Planar rigid-body state of the chassis. Velocities in the body frame
// (x forward, y left), pose in the inertial frame.
struct ChassisState {
    double vx = 0.0;        // longitudinal velocity [m/s]
    double vy = 0.0;        // lateral velocity [m/s]
    double yaw_rate = 0.0;  // psi_dot [rad/s]
    double yaw = 0.0;       // psi [rad]
    double x = 0.0;         // inertial X [m]
    double y = 0.0;         // inertial Y [m]

    bool finite() const {
        return std::isfinite(vx) && std::isfinite(vy) && std::isfinite(yaw_rate) &&
               std::isfinite(yaw) && std::isfinite(x) && std::isfinite(y);
    }
    double kinetic_energy(const VehicleParams& p) const {
        return 0.5 * p.mass * (vx * vx + vy * vy) +
               0.5 * p.yaw_inertia * yaw_rate * yaw_rate;
    }
};

struct WheelState {
    WheelArray omega{};  // rotational speeds [rad/s]

    bool finite() const {
        for (double w : omega) {
            if (!std::isfinite(w)) return false;
        }
        return true;
    }
};

// Tire-frame contact forces and vertical loads, one entry per wheel.
struct WheelForces {
    WheelArray fx{};  // wheel-frame longitudinal [N]
    WheelArray fy{};  // wheel-frame lateral [N]
    WheelArray fz{};  // vertical load [N]
};

// Resultants at the COG. fx includes the aerodynamic drag term; drag is
// also kept separately so the energy ledger can split wheel-contact work
// from drag work.
struct BodyForces {
    double fx = 0.0;    // resultant longitudinal force [N]
    double fy = 0.0;    // resultant lateral force [N]
    double mz = 0.0;    // resultant yaw moment [N m]
    double drag = 0.0;  // aerodynamic drag F_a >= 0 [N]
};

struct WheelTorques {
    WheelArray axle{};     // T_w, from the driveline [N m]
    WheelArray brake{};    // T_b, friction brake, >= 0 [N m]
    WheelArray rolling{};  // T_R, rolling resistance moment [N m]
};

}  // namespace evflow
