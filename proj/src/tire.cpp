#include "evflow/tire.hpp"

#include <algorithm>
#include <cmath>

#include "evflow/errors.hpp"

namespace evflow {

namespace {
constexpr double kHalfPi = 1.5707963267948966;
}

void TireParams::validate() const {
    if (!(slip_stiffness > 0.0) || !std::isfinite(slip_stiffness)) {
        throw ConfigError("tire.C_kappa: must be positive and finite");
    }
    if (!(cornering_stiffness > 0.0) || !std::isfinite(cornering_stiffness)) {
        throw ConfigError("tire.C_alpha: must be positive and finite");
    }
    if (!(friction > 0.0) || !(friction <= 1.5)) {
        throw ConfigError("tire.mu: must be in (0, 1.5]");
    }
    if (!(low_speed_eps > 0.0) || !std::isfinite(low_speed_eps)) {
        throw ConfigError("tire.eps_v: must be positive and finite");
    }
}

SlipState slip_state(const Vec2& wheel_vel, double omega, double wheel_radius,
                     double eps_v) {
    const double vx_reg = std::max(std::abs(wheel_vel.x), eps_v);
    SlipState s;
    s.kappa = (wheel_radius * omega - wheel_vel.x) / vx_reg;
    s.kappa = std::clamp(s.kappa, -1.0, 1.0);
    s.alpha = std::atan2(wheel_vel.y, vx_reg);
    s.alpha = std::clamp(s.alpha, -kHalfPi, kHalfPi);
    return s;
}

Vec2 tire_force(const SlipState& slip, double fz, const TireParams& p) {
    const double fx0 = p.slip_stiffness * slip.kappa;
    const double fy0 = -p.cornering_stiffness * std::tan(slip.alpha);
    const double resultant = std::hypot(fx0, fy0);
    const double limit = p.friction * fz;
    if (resultant <= 0.0 || limit <= 0.0) {
        return {0.0, 0.0};
    }
    // Dugoff saturation: scale once the unsaturated resultant passes half
    // the friction limit; the scaled resultant approaches mu fz from below.
    const double lambda = limit / (2.0 * resultant);
    double scale = 1.0;
    if (lambda < 1.0) {
        scale = lambda * (2.0 - lambda);
    }
    return {fx0 * scale, fy0 * scale};
}

double rolling_resistance(double fz, double omega, double rolling_coeff,
                          double wheel_radius, double eps_v) {
    const double omega_eps = eps_v / wheel_radius;
    const double sign_smooth = std::tanh(omega / omega_eps);
    return rolling_coeff * fz * wheel_radius * sign_smooth;
}

}  // namespace evflow
