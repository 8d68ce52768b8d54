#include "evflow/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "evflow/errors.hpp"

namespace evflow {

namespace {

std::string fmt(const char* spec, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, value);
    return buf;
}

// Round the way the CSV will print, so derived columns recompute
// bit-for-bit from the written file.
double round_as_printed(double value, const char* spec) {
    return std::stod(fmt(spec, value));
}

}  // namespace

const std::vector<std::string>& TraceCsvWriter::columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c = {"t",     "vx",    "vy",          "yaw_rate",
                                      "yaw",   "x",     "y",           "delta",
                                      "accel_pedal",    "brake_pedal", "v_target",
                                      "y_ref", "soc"};
        for (const char* base : {"omega", "fx", "fy"}) {
            for (const char* w : kWheelNames) {
                c.push_back(std::string(base) + "_" + w);
            }
        }
        for (const char* base : {"p_in", "p_in_axle", "p_rot", "p_loss",
                                 "p_out_x", "p_out_y"}) {
            for (const char* w : kWheelNames) {
                c.push_back(std::string(base) + "_" + w);
            }
        }
        c.insert(c.end(), {"p_traction_rear", "p_traction_resultant", "p_maneuver",
                           "p_drag", "p_diff_out", "p_motor_out", "p_motor_in",
                           "p_battery"});
        return c;
    }();
    return cols;
}

TraceCsvWriter::TraceCsvWriter(const std::string& path) : out_(path), path_(path) {
    if (!out_) {
        throw IoError("cannot open trace file " + path);
    }
    const auto& cols = columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out_ << (i ? "," : "") << cols[i];
    }
    out_ << "\n";
}

TraceCsvWriter::~TraceCsvWriter() = default;

void TraceCsvWriter::write(const TraceRow& row) {
    std::string line;
    line.reserve(1024);
    auto add = [&](const char* spec, double v) {
        if (!line.empty()) line.push_back(',');
        line += fmt(spec, v);
    };
    add("%.3f", row.t);
    add("%.6f", row.chassis.vx);
    add("%.6f", row.chassis.vy);
    add("%.6f", row.chassis.yaw_rate);
    add("%.6f", row.chassis.yaw);
    add("%.3f", row.chassis.x);
    add("%.4f", row.chassis.y);
    add("%.6f", row.delta);
    add("%.4f", row.accel_pedal);
    add("%.4f", row.brake_pedal);
    add("%.4f", row.v_target);
    add("%.4f", row.y_ref);
    add("%.6f", row.soc);
    for (double v : row.omega) add("%.5f", v);
    for (double v : row.fx) add("%.3f", v);
    for (double v : row.fy) add("%.3f", v);
    const auto& p = row.power;
    for (double v : p.wheel_in) add("%.3f", v);
    for (double v : p.wheel_in_axle) add("%.3f", v);
    for (double v : p.wheel_rot) add("%.3f", v);
    for (double v : p.wheel_loss) add("%.3f", v);
    for (double v : p.wheel_out_x) add("%.3f", v);
    for (double v : p.wheel_out_y) add("%.3f", v);
    const double traction_rear = p.wheel_out_x[kRearLeft] + p.wheel_out_x[kRearRight];
    double traction_resultant = 0.0;
    for (double v : p.wheel_out_x) traction_resultant += v;
    add("%.3f", traction_rear);
    add("%.3f", traction_resultant);
    add("%.3f", p.maneuver);
    add("%.3f", p.drag);
    add("%.3f", p.diff_out);
    add("%.3f", p.motor_out);
    add("%.3f", p.motor_in);
    add("%.3f", p.battery);
    line.push_back('\n');
    out_ << line;
    if (!out_) {
        throw IoError("write failed on trace file " + path_);
    }
}

void TraceCsvWriter::close() {
    if (out_.is_open()) {
        out_.close();
        if (!out_) {
            throw IoError("close failed on trace file " + path_);
        }
    }
}

SummaryRow summarize(const RunResult& result, double capacity_kwh,
                     double identity_tol) {
    SummaryRow row;
    row.name = result.scenario_name;
    row.cycle = result.cycle_name;
    row.lane_change_interval = result.lane_change_interval;
    row.regen = result.regen_enabled;
    row.distance_km = round_as_printed(result.distance_km, "%.6f");
    row.battery_energy_kwh = round_as_printed(result.battery_energy_kwh, "%.6f");
    if (row.distance_km > 0.0 && row.battery_energy_kwh > 0.0) {
        row.range_km = range_extrapolate(capacity_kwh, row.battery_energy_kwh,
                                         row.distance_km);
    }
    row.rms_speed_error = result.rms_speed_error;
    if (result.ledger) {
        row.worst_identity_residual =
            result.ledger->balance_report(identity_tol).worst_relative();
        row.traction_share_p95 = result.ledger->traction_share_p95();
    }
    row.soc_depleted = result.soc_depleted;
    return row;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open summary file " + path);
    }
    out << "name,cycle,lane_change_interval_m,regen,distance_km,battery_energy_kwh,"
           "range_km,rms_speed_error_mps,worst_identity_residual,traction_share_p95,"
           "soc_depleted\n";
    for (const auto& r : rows) {
        out << r.name << ',' << r.cycle << ',' << fmt("%.1f", r.lane_change_interval)
            << ',' << (r.regen ? 1 : 0) << ',' << fmt("%.6f", r.distance_km) << ','
            << fmt("%.6f", r.battery_energy_kwh) << ',' << fmt("%.6f", r.range_km)
            << ',' << fmt("%.4f", r.rms_speed_error) << ','
            << fmt("%.6e", r.worst_identity_residual) << ','
            << fmt("%.4f", r.traction_share_p95) << ',' << (r.soc_depleted ? 1 : 0)
            << "\n";
    }
    if (!out) {
        throw IoError("write failed on summary file " + path);
    }
}

namespace {

std::string pad(const std::string& s, std::size_t width) {
    if (s.size() >= width) return s;
    return s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_summary_table(const std::vector<SummaryRow>& rows) {
    // Group by cycle; a cycle with exactly the four lane/regen variants is
    // rendered in the 2x2 layout, anything else gets one column per run.
    std::map<std::string, std::vector<const SummaryRow*>> by_cycle;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (by_cycle.find(r.cycle) == by_cycle.end()) {
            order.push_back(r.cycle);
        }
        by_cycle[r.cycle].push_back(&r);
    }

    std::ostringstream os;
    for (const auto& cycle : order) {
        auto& group = by_cycle[cycle];
        const SummaryRow* grid[2][2] = {{nullptr, nullptr}, {nullptr, nullptr}};
        bool is_grid = group.size() == 4;
        if (is_grid) {
            for (const SummaryRow* r : group) {
                const int regen = r->regen ? 1 : 0;
                const int lanes = r->lane_change_interval > 0.0 ? 1 : 0;
                if (grid[regen][lanes]) {
                    is_grid = false;
                    break;
                }
                grid[regen][lanes] = r;
            }
        }
        os << "== " << cycle << " ==\n";
        const std::size_t label_w = 22;
        const std::size_t col_w = 14;
        if (is_grid) {
            os << pad("", label_w) << "| " << pad("Without Regeneration", 2 * col_w + 2)
               << "| " << pad("With Regeneration", 2 * col_w + 2) << "\n";
            os << pad("Parameters", label_w);
            for (int i = 0; i < 2; ++i) {
                os << "| " << pad("no lanes", col_w) << "| " << pad("with lanes", col_w);
            }
            os << "\n";
            auto emit = [&](const std::string& label, auto getter, const char* spec) {
                os << pad(label, label_w);
                for (int regen = 0; regen < 2; ++regen) {
                    for (int lanes = 0; lanes < 2; ++lanes) {
                        os << "| " << pad(fmt(spec, getter(*grid[regen][lanes])), col_w);
                    }
                }
                os << "\n";
            };
            emit("Distance (km)", [](const SummaryRow& r) { return r.distance_km; },
                 "%.3f");
            emit("Battery Energy (kWh)",
                 [](const SummaryRow& r) { return r.battery_energy_kwh; }, "%.3f");
            emit("Range (km)", [](const SummaryRow& r) { return r.range_km; }, "%.2f");
            emit("RMS speed err (m/s)",
                 [](const SummaryRow& r) { return r.rms_speed_error; }, "%.3f");
            emit("Identity residual",
                 [](const SummaryRow& r) { return r.worst_identity_residual; },
                 "%.2e");
            emit("Loss share p95",
                 [](const SummaryRow& r) { return r.traction_share_p95; }, "%.4f");
        } else {
            for (const SummaryRow* r : group) {
                os << pad(r->name, 2 * label_w) << " distance " << fmt("%.3f", r->distance_km)
                   << " km, battery " << fmt("%.3f", r->battery_energy_kwh)
                   << " kWh, range " << fmt("%.2f", r->range_km) << " km, rms "
                   << fmt("%.3f", r->rms_speed_error) << " m/s"
                   << (r->soc_depleted ? " [depleted]" : "") << "\n";
            }
        }
        os << "\n";
    }
    return os.str();
}

std::string render_balance_report(const BalanceReport& report) {
    std::ostringstream os;
    for (const auto& r : report.identities) {
        os << pad(r.name, 28) << " lhs " << pad(fmt("%.6f", r.lhs / 3.6e6) + " kWh", 16)
           << " rhs " << pad(fmt("%.6f", r.rhs / 3.6e6) + " kWh", 16) << " residual "
           << pad(fmt("%.3e", r.relative), 11) << (r.pass ? " PASS" : " FAIL") << "\n";
    }
    return os.str();
}

}  // namespace evflow
