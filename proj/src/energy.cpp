#include "evflow/energy.hpp"

#include <algorithm>
#include <cmath>

#include "evflow/errors.hpp"

namespace evflow {

namespace {
constexpr double kFloorJ = 1e3;        // 1 kJ relative-residual floor
constexpr int kShareBins = 4000;
constexpr double kShareMax = 0.2;      // histogram range [0, 0.2]
constexpr double kSharePowerFloor = 50.0;  // W, ignore near-zero battery power
}  // namespace

EnergyLedger::EnergyLedger(double dt) : dt_(dt), share_hist_(kShareBins, 0) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw GridMismatch("energy ledger: step size must be positive");
    }
}

void EnergyLedger::accumulate(const PowerSample& s, double dt) {
    if (std::abs(dt - dt_) > 1e-12 * dt_) {
        throw GridMismatch("energy ledger: sample step differs from the integration grid");
    }
    ++count_;
    if (!has_prev_) {
        has_prev_ = true;
        prev_ = s;
        kinetic_first_ = s.chassis_kinetic;
        kinetic_last_ = s.chassis_kinetic;
        battery_power_min_ = s.battery;
        return;
    }

    const double h = 0.5 * dt;
    for (int i = 0; i < 4; ++i) {
        wheel_in_[i] += h * (prev_.wheel_in[i] + s.wheel_in[i]);
        wheel_in_axle_[i] += h * (prev_.wheel_in_axle[i] + s.wheel_in_axle[i]);
        wheel_rot_[i] += h * (prev_.wheel_rot[i] + s.wheel_rot[i]);
        wheel_loss_[i] += h * (prev_.wheel_loss[i] + s.wheel_loss[i]);
        wheel_out_x_[i] += h * (prev_.wheel_out_x[i] + s.wheel_out_x[i]);
        wheel_out_y_[i] += h * (prev_.wheel_out_y[i] + s.wheel_out_y[i]);
    }
    maneuver_ += h * (prev_.maneuver + s.maneuver);
    drag_ += h * (prev_.drag + s.drag);
    diff_out_ += h * (prev_.diff_out + s.diff_out);
    motor_out_ += h * (prev_.motor_out + s.motor_out);
    motor_in_ += h * (prev_.motor_in + s.motor_in);
    battery_ += h * (prev_.battery + s.battery);

    // Direction-gated accumulation for the differential efficiency
    // identity; mixed-sign steps are skipped on both sides.
    if (prev_.motor_torque >= 0.0 && s.motor_torque >= 0.0) {
        diff_out_traction_ += h * (prev_.diff_out + s.diff_out);
        motor_out_traction_ += h * (prev_.motor_out + s.motor_out);
    } else if (prev_.motor_torque < 0.0 && s.motor_torque < 0.0) {
        diff_out_regen_ += h * (prev_.diff_out + s.diff_out);
        motor_out_regen_ += h * (prev_.motor_out + s.motor_out);
    }

    kinetic_last_ = s.chassis_kinetic;
    battery_power_min_ = std::min(battery_power_min_, s.battery);

    if (s.motor_torque > 0.0 && s.battery > kSharePowerFloor) {
        double loss_power = 0.0;
        for (int i = 0; i < 4; ++i) {
            loss_power += s.wheel_loss[i] + s.wheel_rot[i];
        }
        const double share = std::clamp(loss_power / s.battery, 0.0, kShareMax);
        int bin = static_cast<int>(share / kShareMax * kShareBins);
        bin = std::min(bin, kShareBins - 1);
        ++share_hist_[static_cast<std::size_t>(bin)];
        ++share_count_;
    }

    prev_ = s;
}

double EnergyLedger::wheel_out_total() const {
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        total += wheel_out_x_[i] + wheel_out_y_[i];
    }
    return total;
}

bool BalanceReport::all_pass() const {
    return std::all_of(identities.begin(), identities.end(),
                       [](const IdentityResidual& r) { return r.pass; });
}

double BalanceReport::worst_relative() const {
    double worst = 0.0;
    for (const auto& r : identities) {
        worst = std::max(worst, r.relative);
    }
    return worst;
}

BalanceReport EnergyLedger::balance_report(double tol) const {
    BalanceReport report;
    report.tolerance = tol;
    auto add = [&](const std::string& name, double lhs, double rhs, double scale) {
        IdentityResidual r;
        r.name = name;
        r.lhs = lhs;
        r.rhs = rhs;
        r.residual = std::abs(lhs - rhs);
        r.relative = r.residual / std::max(std::abs(scale), kFloorJ);
        r.pass = r.relative <= tol;
        report.identities.push_back(std::move(r));
    };

    add("maneuver_sum", maneuver_, wheel_out_total(), maneuver_);
    for (int i = 0; i < 4; ++i) {
        add(std::string("wheel_decomposition_") + kWheelNames[i], wheel_in_[i],
            wheel_rot_[i] + wheel_out_x_[i] + wheel_loss_[i], wheel_in_[i]);
    }
    add("diff_output_split", diff_out_,
        wheel_in_axle_[kRearLeft] + wheel_in_axle_[kRearRight], diff_out_);
    add("diff_efficiency_traction", diff_out_traction_,
        diff_efficiency_ * motor_out_traction_, diff_out_traction_);
    add("diff_efficiency_regen", diff_out_regen_,
        motor_out_regen_ / diff_efficiency_, diff_out_regen_);
    add("kinetic_balance", maneuver_ - drag_, kinetic_delta(), maneuver_);
    return report;
}

SignSummary EnergyLedger::classify_signs() const {
    SignSummary s;
    s.wheel_out_x = wheel_out_x_;
    s.battery_energy = battery_;
    s.battery_power_min = battery_power_min_;
    s.battery_power_ever_negative = battery_power_min_ < 0.0;
    return s;
}

double EnergyLedger::traction_share_p95() const {
    if (share_count_ == 0) {
        return 0.0;
    }
    const std::uint64_t target =
        static_cast<std::uint64_t>(std::ceil(0.95 * static_cast<double>(share_count_)));
    std::uint64_t seen = 0;
    for (int bin = 0; bin < kShareBins; ++bin) {
        seen += share_hist_[static_cast<std::size_t>(bin)];
        if (seen >= target) {
            return (bin + 1) * kShareMax / kShareBins;
        }
    }
    return kShareMax;
}

}  // namespace evflow
