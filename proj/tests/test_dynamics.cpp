#include <cmath>
#include <random>

#include "doctest.h"

#include "evflow/driver.hpp"
#include "evflow/dynamics.hpp"
#include "evflow/errors.hpp"
#include "evflow/powertrain.hpp"
#include "evflow/tire.hpp"

using namespace evflow;

namespace {
VehicleParams default_vehicle() { return VehicleParams{}; }
}

TEST_CASE("wheel velocities: zero yaw and steer is the identity") {
    ChassisState c;
    c.vx = 10.0;
    const auto w = wheel_velocities(c, 0.0, default_vehicle());
    for (const auto& v : w) {
        CHECK(v.x == doctest::Approx(10.0).epsilon(1e-14));
        CHECK(v.y == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("wheel velocities: rear wheels by direct substitution") {
    ChassisState c;
    c.vx = 10.0;
    c.vy = 0.5;
    c.yaw_rate = 0.2;
    VehicleParams p;
    p.a = 1.2;
    p.b = 1.4;
    p.half_track = 0.8;
    const auto w = wheel_velocities(c, 0.0, p);
    CHECK(w[kRearLeft].x == doctest::Approx(9.84).epsilon(1e-12));
    CHECK(w[kRearLeft].y == doctest::Approx(0.22).epsilon(1e-12));
    CHECK(w[kRearRight].x == doctest::Approx(10.16).epsilon(1e-12));
    CHECK(w[kRearRight].y == doctest::Approx(0.22).epsilon(1e-12));
}

TEST_CASE("wheel velocities: steered front-left wheel matches the scripted value") {
    ChassisState c;
    c.vx = 10.0;
    c.vy = 0.5;
    c.yaw_rate = 0.2;
    VehicleParams p;
    p.a = 1.2;
    p.half_track = 0.8;
    const auto w = wheel_velocities(c, 0.1, p);
    CHECK(w[kFrontLeft].x == doctest::Approx(9.864717714654).epsilon(1e-10));
    CHECK(w[kFrontLeft].y == doctest::Approx(-0.246057737499).epsilon(1e-8));
}

TEST_CASE("wheel velocities: front formulas reduce to rear ones with a in place of -b") {
    ChassisState c;
    c.vx = 7.0;
    c.vy = -0.3;
    c.yaw_rate = 0.15;
    VehicleParams p;
    const auto w = wheel_velocities(c, 0.0, p);
    // At delta = 0 the front pair differs from the rear pair only through
    // the axle arm: vy +/- yaw_rate * arm; the left/right vx terms match.
    CHECK(w[kFrontLeft].x == doctest::Approx(w[kRearLeft].x).epsilon(1e-15));
    CHECK(w[kFrontRight].x == doctest::Approx(w[kRearRight].x).epsilon(1e-15));
    CHECK(w[kFrontLeft].y == doctest::Approx(c.vy + c.yaw_rate * p.a).epsilon(1e-15));
    CHECK(w[kRearLeft].y == doctest::Approx(c.vy - c.yaw_rate * p.b).epsilon(1e-15));
}

TEST_CASE("aggregate forces: zero wheel forces give zero resultants") {
    const auto body = aggregate_forces(WheelForces{}, 0.0, 0.0, default_vehicle());
    CHECK(body.fx == 0.0);
    CHECK(body.fy == 0.0);
    CHECK(body.mz == 0.0);
}

TEST_CASE("aggregate forces: symmetric front lateral force") {
    WheelForces wf;
    wf.fy[kFrontLeft] = 1000.0;
    wf.fy[kFrontRight] = 1000.0;
    VehicleParams p;
    p.a = 1.2;
    const auto body = aggregate_forces(wf, 0.0, 0.0, p);
    CHECK(body.fy == doctest::Approx(2000.0).epsilon(1e-14));
    CHECK(body.mz == doctest::Approx(2400.0).epsilon(1e-14));
    CHECK(body.fx == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("aggregate forces: matches the brute-force r x F oracle on random inputs") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> force(-5000.0, 5000.0);
    std::uniform_real_distribution<double> steer(-0.5, 0.5);
    VehicleParams p;
    const double pos_x[4] = {p.a, p.a, -p.b, -p.b};
    const double pos_y[4] = {p.half_track, -p.half_track, p.half_track, -p.half_track};

    for (int trial = 0; trial < 1000; ++trial) {
        WheelForces wf;
        for (int i = 0; i < 4; ++i) {
            wf.fx[i] = force(rng);
            wf.fy[i] = force(rng);
        }
        const double delta = steer(rng);
        const double drag = std::abs(force(rng));
        const auto body = aggregate_forces(wf, delta, drag, p);

        // Independent route: rotate each wheel force into the body frame and
        // sum force and moment directly.
        double fx = -drag, fy = 0.0, mz = 0.0;
        for (int i = 0; i < 4; ++i) {
            const bool front = i == kFrontLeft || i == kFrontRight;
            const double cd = front ? std::cos(delta) : 1.0;
            const double sd = front ? std::sin(delta) : 0.0;
            const double fxb = wf.fx[i] * cd - wf.fy[i] * sd;
            const double fyb = wf.fx[i] * sd + wf.fy[i] * cd;
            fx += fxb;
            fy += fyb;
            mz += pos_x[i] * fyb - pos_y[i] * fxb;
        }
        CHECK(body.fx == doctest::Approx(fx).epsilon(1e-12));
        CHECK(body.fy == doctest::Approx(fy).epsilon(1e-12));
        CHECK(body.mz == doctest::Approx(mz).epsilon(1e-12));
    }
}

TEST_CASE("chassis step: force-free motion keeps the state") {
    ChassisState c;
    c.vx = 10.0;
    const VehicleParams p;
    for (int i = 0; i < 1000; ++i) {
        step_chassis(c, BodyForces{}, p, 1e-3);
    }
    CHECK(c.vx == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(c.y == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(c.yaw_rate == 0.0);
}

TEST_CASE("chassis step: constant longitudinal force integrates exactly") {
    ChassisState c;
    c.vx = 10.0;
    const VehicleParams p;
    BodyForces body;
    body.fx = p.mass * 1.0;
    for (int i = 0; i < 1000; ++i) {
        step_chassis(c, body, p, 1e-3);
    }
    CHECK(std::abs(c.vx - 11.0) < 1e-9);
}

TEST_CASE("chassis step: braking clamps at standstill, never reverses") {
    ChassisState c;
    c.vx = 0.5;
    const VehicleParams p;
    BodyForces body;
    body.fx = -4000.0;
    bool stopped = false;
    for (int i = 0; i < 500; ++i) {
        stopped = step_chassis(c, body, p, 1e-3) || stopped;
        if (c.vx == 0.0) {
            body.fx = 0.0;  // tire forces vanish at rest
        }
    }
    CHECK(stopped);
    CHECK(c.vx == 0.0);
}

TEST_CASE("chassis step: non-finite input raises") {
    ChassisState c;
    c.vx = 1.0;
    BodyForces body;
    body.fx = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(step_chassis(c, body, VehicleParams{}, 1e-3), NonFiniteState);
}

TEST_CASE("chassis step: zero steer with symmetric forces stays longitudinal") {
    ChassisState c;
    c.vx = 12.0;
    const VehicleParams p;
    WheelForces wf;
    wf.fx = {100.0, 100.0, 400.0, 400.0};
    const auto body = aggregate_forces(wf, 0.0, 60.0, p);
    CHECK(body.mz == doctest::Approx(0.0).epsilon(1e-14));
    for (int i = 0; i < 2000; ++i) {
        step_chassis(c, body, p, 1e-3);
    }
    CHECK(c.vy == 0.0);
    CHECK(c.yaw_rate == 0.0);
    CHECK(c.y == 0.0);
}

TEST_CASE("wheel spin: free rolling converges to the contact speed") {
    const VehicleParams p;
    const TireParams tire;
    const Vec2 contact{15.0, 0.0};
    double omega = 10.0;  // starts with heavy negative slip
    for (int i = 0; i < 3000; ++i) {
        omega = step_wheel_spin(omega, 0.0, 0.0, contact, 4200.0, tire, p, 1e-3);
    }
    // Free rolling settles just below v/r where the slip force balances
    // rolling resistance.
    const double kappa = (p.wheel_radius * omega - contact.x) / contact.x;
    CHECK(std::abs(kappa * tire.slip_stiffness +
                   p.rolling_coeff * 4200.0) < 1e-6 * tire.slip_stiffness);
}

TEST_CASE("wheel spin: hard braking locks the wheel, drive torque spins it up") {
    const VehicleParams p;
    const TireParams tire;
    const Vec2 contact{20.0, 0.0};
    double omega = 20.0 / p.wheel_radius;
    for (int i = 0; i < 2000; ++i) {
        omega = step_wheel_spin(omega, 0.0, 1500.0, contact, 4200.0, tire, p, 1e-3);
    }
    CHECK(omega == 0.0);  // locked

    omega = 0.0;
    const Vec2 at_rest{0.0, 0.0};
    for (int i = 0; i < 500; ++i) {
        omega = step_wheel_spin(omega, 300.0, 0.0, at_rest, 4200.0, tire, p, 1e-3);
    }
    CHECK(omega > 0.0);
}

TEST_CASE("kinetic-energy identity over a forced interval") {
    // Trapezoid of (F_x vx + F_y vy + M_z r) on the integration grid against
    // the chassis kinetic-energy change, time-varying forces.
    ChassisState c;
    c.vx = 15.0;
    WheelState w;
    const VehicleParams p;
    const double dt = 1e-3;
    double energy = 0.0;
    const double ke0 = c.kinetic_energy(p);

    // Forward-driving excitation: yaw moment zero-mean so the body-frame
    // longitudinal speed stays positive (the standstill clamp is for stop
    // events, not part of this identity).
    auto forces_at = [&](double t) {
        BodyForces b;
        b.fx = 1200.0 * std::sin(0.8 * t) + 200.0;
        b.fy = 900.0 * std::sin(1.7 * t + 0.3);
        b.mz = 600.0 * std::cos(0.9 * t);
        return b;
    };

    double t = 0.0;
    BodyForces b = forces_at(t);
    double p_prev = b.fx * c.vx + b.fy * c.vy + b.mz * c.yaw_rate;
    for (int i = 0; i < 20000; ++i) {
        step_chassis(c, b, p, dt);
        t += dt;
        b = forces_at(t);
        const double p_now = b.fx * c.vx + b.fy * c.vy + b.mz * c.yaw_rate;
        energy += 0.5 * dt * (p_prev + p_now);
        p_prev = p_now;
    }
    const double dke = c.kinetic_energy(p) - ke0;
    CHECK(std::abs(energy - dke) < 1e-3 * std::max(std::abs(dke), 1e3));
}

TEST_CASE("per-wheel rotational energy identity on the slip-coupled path") {
    // Trapezoid of (T_w - T_b - T_R - F^x r) omega on the grid against the
    // wheel kinetic-energy change, with the slip force fed back from the
    // tire model exactly as in the closed loop.
    const VehicleParams p;
    const TireParams tire;
    const double dt = 1e-3;
    const double fz = 4200.0;
    const Vec2 contact{14.0, 0.0};

    double omega = contact.x / p.wheel_radius;
    const double ke0 = 0.5 * p.wheel_inertia * omega * omega;
    auto torque_at = [&](double t) { return 90.0 * std::sin(0.9 * t) + 25.0; };

    auto net_power = [&](double t, double w) {
        const SlipState slip = slip_state(contact, w, p.wheel_radius, tire.low_speed_eps);
        const double fx = tire_force(slip, fz, tire).x;
        const double rolling = rolling_resistance(fz, w, p.rolling_coeff,
                                                  p.wheel_radius, tire.low_speed_eps);
        return (torque_at(t) - rolling - fx * p.wheel_radius) * w;
    };

    double t = 0.0, energy = 0.0;
    double p_prev = net_power(t, omega);
    for (int i = 0; i < 20000; ++i) {
        omega = step_wheel_spin(omega, torque_at(t), 0.0, contact, fz, tire, p, dt);
        t += dt;
        const double p_now = net_power(t, omega);
        energy += 0.5 * dt * (p_prev + p_now);
        p_prev = p_now;
    }
    const double dke = 0.5 * p.wheel_inertia * omega * omega - ke0;
    CHECK(std::abs(energy - dke) < 1e-3 * std::max(std::abs(dke), 1e3));
}

TEST_CASE("steady-state cornering matches the linear-tire oracle") {
    // Constant steer, speed held by a PI on the rear axle torque; compare
    // the settled yaw rate and lateral velocity against the frozen values
    // from the scripted linear two-track steady-state solve.
    const VehicleParams veh;
    TireParams tire;
    const double dt = 1e-3;
    const double delta = 0.02;
    const double v_target = 15.0;

    ChassisState c;
    c.vx = v_target;
    WheelState w;
    for (auto& o : w.omega) o = v_target / veh.wheel_radius;

    const auto loads = static_wheel_loads(veh);
    double integral = 0.0;
    double r_avg = 0.0, vy_avg = 0.0;
    int n_avg = 0;
    const int steps = 40000;
    for (int i = 0; i < steps; ++i) {
        const double err = v_target - c.vx;
        integral += err * dt;
        const double axle = 2000.0 * err + 400.0 * integral;

        const auto wv = wheel_velocities(c, delta, veh);
        WheelForces wf;
        WheelArray axle_torque{0.0, 0.0, axle / 2.0, axle / 2.0};
        for (int k = 0; k < 4; ++k) {
            wf.fz[k] = loads[k];
            const auto slip =
                slip_state(wv[k], w.omega[k], veh.wheel_radius, tire.low_speed_eps);
            const auto f = tire_force(slip, wf.fz[k], tire);
            wf.fx[k] = f.x;
            wf.fy[k] = f.y;
        }
        const auto body = aggregate_forces(wf, delta, aero_drag(c.vx, veh), veh);
        step_chassis(c, body, veh, dt);
        for (int k = 0; k < 4; ++k) {
            w.omega[k] = step_wheel_spin(w.omega[k], axle_torque[k], 0.0, wv[k],
                                         wf.fz[k], tire, veh, dt);
        }
        if (i >= steps - 5000) {
            r_avg += c.yaw_rate;
            vy_avg += c.vy;
            ++n_avg;
        }
    }
    r_avg /= n_avg;
    vy_avg /= n_avg;
    CHECK(r_avg == doctest::Approx(0.105894).epsilon(5e-3));
    CHECK(vy_avg == doctest::Approx(0.001629).epsilon(0.2));
    // Trajectory radius consistency.
    const double radius = std::hypot(c.vx, c.vy) / c.yaw_rate;
    CHECK(radius == doctest::Approx(141.652).epsilon(5e-3));
}

TEST_CASE("vertical loads: positive and summing to the weight") {
    const VehicleParams p;
    const auto loads = static_wheel_loads(p);
    double total = 0.0;
    for (double fz : loads) {
        CHECK(fz > 0.0);
        total += fz;
    }
    CHECK(total == doctest::Approx(p.mass * kGravity).epsilon(1e-9));
}
