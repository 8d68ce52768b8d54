#include "evflow/driver.hpp"

#include <algorithm>
#include <cmath>

#include "evflow/errors.hpp"

namespace evflow {

void DriverParams::validate() const {
    auto nonneg = [](double v, const char* key) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError(std::string(key) + ": must be nonnegative and finite");
        }
    };
    nonneg(kp, "driver.kp");
    nonneg(ki, "driver.ki");
    nonneg(pedal_deadband, "driver.pedal_deadband");
    nonneg(pedal_tau, "driver.pedal_tau");
    nonneg(lateral_gain, "driver.k_lat");
    if (!(preview_time > 0.0) || !std::isfinite(preview_time)) {
        throw ConfigError("driver.preview_time: must be positive and finite");
    }
    if (!(steer_max > 0.0) || !std::isfinite(steer_max)) {
        throw ConfigError("driver.delta_max: must be positive and finite");
    }
    if (!(steer_rate_max > 0.0) || !std::isfinite(steer_rate_max)) {
        throw ConfigError("driver.delta_rate_max: must be positive and finite");
    }
}

namespace {

// C2 quintic blend: 10u^3 - 15u^4 + 6u^5 on [0, 1].
double quintic(double u) {
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double quintic_derivative(double u) {
    // 30u^2 - 60u^3 + 30u^4 = 30 u^2 (1 - u)^2
    const double w = u * (1.0 - u);
    return 30.0 * w * w;
}

double quintic_second_derivative(double u) {
    return 60.0 * u - 180.0 * u * u + 120.0 * u * u * u;
}

}  // namespace

LateralReference::LateralReference(std::vector<LaneChangeSegment> segments)
    : segments_(std::move(segments)) {
    double offset = 0.0;
    base_offset_.reserve(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (i > 0) {
            const double prev_end = segments_[i - 1].start_s + segments_[i - 1].length;
            if (segments_[i].start_s < prev_end) {
                throw ValidationError("lane-change segments overlap");
            }
        }
        if (segments_[i].length <= 0.0) {
            throw ValidationError("lane-change segment length must be positive");
        }
        base_offset_.push_back(offset);
        offset += segments_[i].delta_y;
    }
}

std::pair<double, double> LateralReference::evaluate(double s) const {
    // Segments are ordered; find the last one starting at or before s.
    double offset = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& seg = segments_[i];
        if (s < seg.start_s) {
            break;
        }
        if (s < seg.start_s + seg.length) {
            const double u = (s - seg.start_s) / seg.length;
            return {base_offset_[i] + seg.delta_y * quintic(u),
                    seg.delta_y * quintic_derivative(u) / seg.length};
        }
        offset = base_offset_[i] + seg.delta_y;
    }
    return {offset, 0.0};
}

double LateralReference::curvature_at(double s) const {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& seg = segments_[i];
        if (s < seg.start_s) {
            break;
        }
        if (s < seg.start_s + seg.length) {
            const double u = (s - seg.start_s) / seg.length;
            return seg.delta_y * quintic_second_derivative(u) / (seg.length * seg.length);
        }
    }
    return 0.0;
}

std::pair<double, double> SpeedController::update(double v_target, double v,
                                                  double dt) {
    const double error = v_target - v;
    double u = 0.0;
    if (std::abs(error) <= p_.pedal_deadband) {
        // Rest inside the deadband and bleed stale windup.
        integral_ *= std::max(0.0, 1.0 - dt / 2.0);
    } else {
        const double unsat = p_.kp * error + p_.ki * integral_;
        u = std::clamp(unsat, -1.0, 1.0);
        // Conditional anti-windup: stop integrating into the saturation.
        if (u == unsat || u * error < 0.0) {
            integral_ += error * dt;
        }
    }
    if (p_.pedal_tau > 0.0) {
        output_ += dt / (p_.pedal_tau + dt) * (u - output_);
    } else {
        output_ = u;
    }
    if (output_ >= 0.0) {
        return {output_, 0.0};
    }
    return {0.0, -output_};
}

LateralController::LateralController(const DriverParams& p,
                                     const VehicleParams& vehicle,
                                     const TireParams& tire)
    : p_(p),
      wheelbase_(vehicle.wheelbase()),
      mass_(vehicle.mass),
      front_share_(vehicle.b / vehicle.wheelbase()),
      rear_share_(vehicle.a / vehicle.wheelbase()),
      axle_stiffness_(2.0 * tire.cornering_stiffness),
      friction_(tire.friction),
      front_axle_load_(vehicle.mass * kGravity * vehicle.b / vehicle.wheelbase()),
      rear_axle_load_(vehicle.mass * kGravity * vehicle.a / vehicle.wheelbase()),
      // Sideslip and yaw time constants both scale with speed over the
      // axle stiffness; their sum sets the lead horizon.
      lead_coeff_(vehicle.mass / (2.0 * axle_stiffness_) +
                  vehicle.yaw_inertia /
                      (axle_stiffness_ * (vehicle.a * vehicle.a + vehicle.b * vehicle.b))) {}

double LateralController::axle_slip_for_force(double force, double axle_load) const {
    const double limit = friction_ * axle_load;
    const double magnitude = std::abs(force);
    double unsaturated = magnitude;
    if (magnitude >= 0.97 * limit) {
        // Demand at or beyond the friction limit: steer for the last
        // invertible point of the saturation curve.
        unsaturated = limit / (4.0 * 0.03);
    } else if (magnitude > 0.5 * limit) {
        unsaturated = limit * limit / (4.0 * (limit - magnitude));
    }
    const double alpha = std::min(unsaturated / axle_stiffness_, 0.35);
    return std::copysign(alpha, force);
}

double LateralController::steady_state_steer(double curvature, double vx) const {
    const double lat_accel = vx * vx * curvature;
    const double front_force = mass_ * lat_accel * front_share_;
    const double rear_force = mass_ * lat_accel * rear_share_;
    return wheelbase_ * curvature +
           axle_slip_for_force(front_force, front_axle_load_) -
           axle_slip_for_force(rear_force, rear_axle_load_);
}

double LateralController::update(const ChassisState& chassis,
                                 const LateralReference& ref, double s,
                                 double dt) {
    // Preview scales with speed: the yaw response lag it compensates does.
    const double vx = std::max(chassis.vx, 2.0);
    const double lookahead = p_.preview_time * vx;
    const double target = ref.offset_at(s + lookahead);
    const double projected = chassis.y + lookahead * std::sin(chassis.yaw);
    const double error = target - projected;

    // Steady-state cornering inverse for the previewed curvature, plus a
    // first-order lead over the vehicle's sideslip and yaw response lags so
    // the inverse stays usable at lane-change frequencies.
    const double feedforward = steady_state_steer(ref.curvature_at(s + lookahead), vx);

    double steer = std::clamp(feedforward + p_.lateral_gain * error,
                              -p_.steer_max, p_.steer_max);
    const double max_delta = p_.steer_rate_max * dt;
    steer = std::clamp(steer, steer_ - max_delta, steer_ + max_delta);
    steer_ = steer;
    return steer;
}

}  // namespace evflow
