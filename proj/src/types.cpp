#include "evflow/types.hpp"

#include <string>

#include "evflow/errors.hpp"

namespace evflow {

namespace {

void require_positive(double value, const char* key) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw ConfigError(std::string(key) + ": must be positive and finite");
    }
}

void require_nonnegative(double value, const char* key) {
    if (!std::isfinite(value) || value < 0.0) {
        throw ConfigError(std::string(key) + ": must be nonnegative and finite");
    }
}

}  // namespace

void VehicleParams::validate() const {
    require_positive(a, "vehicle.a");
    require_positive(b, "vehicle.b");
    require_positive(half_track, "vehicle.l");
    require_positive(wheel_radius, "vehicle.r_w");
    require_positive(mass, "vehicle.m_veh");
    require_positive(yaw_inertia, "vehicle.I_z");
    require_positive(wheel_inertia, "vehicle.J_w");
    require_nonnegative(drag_coeff_area, "vehicle.drag_coeff_area");
    require_positive(air_density, "vehicle.air_density");
    require_nonnegative(rolling_coeff, "vehicle.f_r");
}

}  // namespace evflow
