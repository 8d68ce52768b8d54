#include "evflow/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

#include "evflow/errors.hpp"

namespace evflow {

namespace {

using nlohmann::json;

class SectionReader {
public:
    SectionReader(const json& j, std::string section, bool strict,
                  std::vector<std::string>* warnings)
        : j_(j), section_(std::move(section)), strict_(strict), warnings_(warnings) {}

    ~SectionReader() = default;

    void get(const char* key, double& value) { fetch(key, value); }
    void get(const char* key, int& value) { fetch(key, value); }
    void get(const char* key, bool& value) { fetch(key, value); }
    void get(const char* key, std::string& value) { fetch(key, value); }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (seen_.count(item.key()) == 0) {
                const std::string msg = section_ + "." + item.key() + ": unknown key";
                if (strict_) {
                    throw ConfigError(msg);
                }
                if (warnings_) {
                    warnings_->push_back(msg);
                }
            }
        }
    }

private:
    template <typename T>
    void fetch(const char* key, T& value) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            value = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(section_ + "." + key + ": wrong type");
        }
    }

    const json& j_;
    std::string section_;
    bool strict_;
    std::vector<std::string>* warnings_;
    std::set<std::string> seen_;
};

void read_vehicle(const json& j, VehicleParams& p, bool strict,
                  std::vector<std::string>* warnings) {
    SectionReader r(j, "vehicle", strict, warnings);
    r.get("a", p.a);
    r.get("b", p.b);
    r.get("l", p.half_track);
    r.get("r_w", p.wheel_radius);
    r.get("m_veh", p.mass);
    r.get("I_z", p.yaw_inertia);
    r.get("J_w", p.wheel_inertia);
    r.get("drag_coeff_area", p.drag_coeff_area);
    r.get("air_density", p.air_density);
    r.get("f_r", p.rolling_coeff);
    r.finish();
}

void read_tire(const json& j, TireParams& p, bool strict,
               std::vector<std::string>* warnings) {
    SectionReader r(j, "tire", strict, warnings);
    r.get("C_kappa", p.slip_stiffness);
    r.get("C_alpha", p.cornering_stiffness);
    r.get("mu", p.friction);
    r.get("eps_v", p.low_speed_eps);
    r.finish();
}

void read_powertrain(const json& j, PowertrainParams& p, std::string& loss_map_csv,
                     bool strict, std::vector<std::string>* warnings) {
    SectionReader r(j, "powertrain", strict, warnings);
    r.get("gear_ratio", p.gear_ratio);
    r.get("eta_diff", p.diff_efficiency);
    r.get("eta_inv", p.inverter_efficiency);
    r.get("motor_torque_max", p.motor_torque_max);
    r.get("motor_power_max", p.motor_power_max);
    r.get("P_regen_max", p.regen_power_max);
    r.get("regen_fade_speed", p.regen_fade_speed);
    r.get("brake_torque_max", p.brake_torque_max);
    r.get("brake_front_share", p.brake_front_share);
    r.get("k_c", p.loss_copper);
    r.get("k_i", p.loss_iron);
    r.get("k_w", p.loss_windage);
    r.get("k_0", p.loss_const);
    r.get("loss_map_csv", loss_map_csv);
    r.finish();
}

void read_battery(const json& j, BatteryParams& p, bool strict,
                  std::vector<std::string>* warnings) {
    SectionReader r(j, "battery", strict, warnings);
    r.get("capacity_kwh", p.capacity_kwh);
    r.get("v_oc_min", p.voc_min);
    r.get("v_oc_max", p.voc_max);
    r.get("r_int", p.internal_resistance);
    r.get("i_max", p.current_max);
    r.get("soc_initial", p.soc_initial);
    r.finish();
}

void read_driver(const json& j, DriverParams& p, bool strict,
                 std::vector<std::string>* warnings) {
    SectionReader r(j, "driver", strict, warnings);
    r.get("kp", p.kp);
    r.get("ki", p.ki);
    r.get("pedal_deadband", p.pedal_deadband);
    r.get("pedal_tau", p.pedal_tau);
    r.get("preview_time", p.preview_time);
    r.get("k_lat", p.lateral_gain);
    r.get("delta_max", p.steer_max);
    r.get("delta_rate_max", p.steer_rate_max);
    r.finish();
}

void read_lane(const json& j, LaneGeometry& p, bool strict,
               std::vector<std::string>* warnings) {
    SectionReader r(j, "lane", strict, warnings);
    r.get("width", p.lane_width);
    r.get("max_lat_accel", p.max_lat_accel);
    r.get("min_length", p.min_length);
    r.get("max_length", p.max_length);
    r.get("min_start_speed", p.min_start_speed);
    r.finish();
}

ScenarioSpec read_scenario(const json& j, int index, bool strict,
                           std::vector<std::string>* warnings) {
    ScenarioSpec spec;
    SectionReader r(j, "scenarios[" + std::to_string(index) + "]", strict, warnings);
    r.get("name", spec.name);
    r.get("cycle", spec.cycle_path);
    r.get("lane_change_interval_m", spec.lane_change_interval);
    r.get("regen", spec.regen);
    r.get("repetitions", spec.repetitions);
    r.get("dt_s", spec.dt);
    r.get("trace_decimation", spec.trace_decimation);
    r.get("run_to_depletion", spec.run_to_depletion);
    r.finish();
    if (spec.cycle_path.empty()) {
        throw ConfigError("scenarios[" + std::to_string(index) + "].cycle: required");
    }
    if (spec.name.empty()) {
        std::string stem = spec.cycle_path;
        const auto slash = stem.find_last_of("/\\");
        if (slash != std::string::npos) stem = stem.substr(slash + 1);
        const auto dot = stem.find_last_of('.');
        if (dot != std::string::npos) stem = stem.substr(0, dot);
        spec.name = stem + (spec.lane_change_interval > 0.0 ? "_lanes" : "_straight") +
                    (spec.regen ? "_regen" : "_noregen");
    }
    return spec;
}

void validate_all(const RunConfig& cfg) {
    cfg.vehicle.validate();
    cfg.tire.validate();
    cfg.powertrain.validate();
    cfg.battery.validate();
    cfg.driver.validate();
    if (!(cfg.lane.lane_width > 0.0)) {
        throw ConfigError("lane.width: must be positive");
    }
    if (!(cfg.lane.max_lat_accel > 0.0)) {
        throw ConfigError("lane.max_lat_accel: must be positive");
    }
    if (!(cfg.lane.min_length > 0.0) || cfg.lane.max_length < cfg.lane.min_length) {
        throw ConfigError("lane.min_length/max_length: need 0 < min <= max");
    }
    for (const auto& spec : cfg.scenarios) {
        const std::string where = "scenarios (" + spec.name + ")";
        if (spec.lane_change_interval < 0.0) {
            throw ConfigError(where + ".lane_change_interval_m: must be >= 0");
        }
        if (spec.repetitions < 1) {
            throw ConfigError(where + ".repetitions: must be >= 1");
        }
        if (!(spec.dt > 0.0) || spec.dt > 0.01) {
            throw ConfigError(where + ".dt_s: must be in (0, 0.01]");
        }
        if (spec.trace_decimation < 1) {
            throw ConfigError(where + ".trace_decimation: must be >= 1");
        }
    }
}

}  // namespace

RunConfig parse_config(const std::string& path, bool strict,
                       std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config: top level must be an object");
    }

    RunConfig cfg;
    const std::set<std::string> known = {"vehicle", "tire",      "powertrain",
                                         "battery", "driver",    "lane",
                                         "scenarios", "cycles",  "output_dir"};
    for (const auto& item : j.items()) {
        if (known.count(item.key()) == 0) {
            const std::string msg = item.key() + ": unknown section";
            if (strict) {
                throw ConfigError(msg);
            }
            if (warnings) warnings->push_back(msg);
        }
    }

    if (j.contains("vehicle")) read_vehicle(j["vehicle"], cfg.vehicle, strict, warnings);
    if (j.contains("tire")) read_tire(j["tire"], cfg.tire, strict, warnings);
    if (j.contains("powertrain")) {
        read_powertrain(j["powertrain"], cfg.powertrain, cfg.motor_loss_map_csv,
                        strict, warnings);
    }
    if (j.contains("battery")) read_battery(j["battery"], cfg.battery, strict, warnings);
    if (j.contains("driver")) read_driver(j["driver"], cfg.driver, strict, warnings);
    if (j.contains("lane")) read_lane(j["lane"], cfg.lane, strict, warnings);
    if (j.contains("output_dir")) {
        try {
            cfg.output_dir = j.at("output_dir").get<std::string>();
        } catch (const json::exception&) {
            throw ConfigError("output_dir: wrong type");
        }
    }
    if (j.contains("cycles")) {
        if (!j["cycles"].is_array()) {
            throw ConfigError("cycles: must be an array of cycle file paths");
        }
        for (const auto& c : j["cycles"]) {
            try {
                cfg.table_cycles.push_back(c.get<std::string>());
            } catch (const json::exception&) {
                throw ConfigError("cycles: entries must be strings");
            }
        }
    }
    if (j.contains("scenarios")) {
        if (!j["scenarios"].is_array()) {
            throw ConfigError("scenarios: must be an array");
        }
        int index = 0;
        for (const auto& sj : j["scenarios"]) {
            cfg.scenarios.push_back(read_scenario(sj, index++, strict, warnings));
        }
    }

    if (!cfg.motor_loss_map_csv.empty()) {
        cfg.powertrain.loss_map = MotorLossMap::load_csv(cfg.motor_loss_map_csv);
    }
    validate_all(cfg);
    return cfg;
}

void echo_config(const RunConfig& cfg, const std::string& path) {
    json j;
    j["vehicle"] = {{"a", cfg.vehicle.a},
                    {"b", cfg.vehicle.b},
                    {"l", cfg.vehicle.half_track},
                    {"r_w", cfg.vehicle.wheel_radius},
                    {"m_veh", cfg.vehicle.mass},
                    {"I_z", cfg.vehicle.yaw_inertia},
                    {"J_w", cfg.vehicle.wheel_inertia},
                    {"drag_coeff_area", cfg.vehicle.drag_coeff_area},
                    {"air_density", cfg.vehicle.air_density},
                    {"f_r", cfg.vehicle.rolling_coeff}};
    j["tire"] = {{"C_kappa", cfg.tire.slip_stiffness},
                 {"C_alpha", cfg.tire.cornering_stiffness},
                 {"mu", cfg.tire.friction},
                 {"eps_v", cfg.tire.low_speed_eps}};
    j["powertrain"] = {{"gear_ratio", cfg.powertrain.gear_ratio},
                       {"eta_diff", cfg.powertrain.diff_efficiency},
                       {"eta_inv", cfg.powertrain.inverter_efficiency},
                       {"motor_torque_max", cfg.powertrain.motor_torque_max},
                       {"motor_power_max", cfg.powertrain.motor_power_max},
                       {"P_regen_max", cfg.powertrain.regen_power_max},
                       {"regen_fade_speed", cfg.powertrain.regen_fade_speed},
                       {"brake_torque_max", cfg.powertrain.brake_torque_max},
                       {"brake_front_share", cfg.powertrain.brake_front_share},
                       {"k_c", cfg.powertrain.loss_copper},
                       {"k_i", cfg.powertrain.loss_iron},
                       {"k_w", cfg.powertrain.loss_windage},
                       {"k_0", cfg.powertrain.loss_const},
                       {"loss_map_csv", cfg.motor_loss_map_csv}};
    j["battery"] = {{"capacity_kwh", cfg.battery.capacity_kwh},
                    {"v_oc_min", cfg.battery.voc_min},
                    {"v_oc_max", cfg.battery.voc_max},
                    {"r_int", cfg.battery.internal_resistance},
                    {"i_max", cfg.battery.current_max},
                    {"soc_initial", cfg.battery.soc_initial}};
    j["driver"] = {{"kp", cfg.driver.kp},
                   {"ki", cfg.driver.ki},
                   {"pedal_deadband", cfg.driver.pedal_deadband},
                   {"pedal_tau", cfg.driver.pedal_tau},
                   {"preview_time", cfg.driver.preview_time},
                   {"k_lat", cfg.driver.lateral_gain},
                   {"delta_max", cfg.driver.steer_max},
                   {"delta_rate_max", cfg.driver.steer_rate_max}};
    j["lane"] = {{"width", cfg.lane.lane_width},
                 {"max_lat_accel", cfg.lane.max_lat_accel},
                 {"min_length", cfg.lane.min_length},
                 {"max_length", cfg.lane.max_length},
                 {"min_start_speed", cfg.lane.min_start_speed}};
    j["output_dir"] = cfg.output_dir;
    j["cycles"] = cfg.table_cycles;
    j["scenarios"] = json::array();
    for (const auto& spec : cfg.scenarios) {
        j["scenarios"].push_back({{"name", spec.name},
                                  {"cycle", spec.cycle_path},
                                  {"lane_change_interval_m", spec.lane_change_interval},
                                  {"regen", spec.regen},
                                  {"repetitions", spec.repetitions},
                                  {"dt_s", spec.dt},
                                  {"trace_decimation", spec.trace_decimation},
                                  {"run_to_depletion", spec.run_to_depletion}});
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write resolved config to " + path);
    }
    out << j.dump(2) << "\n";
}

Scenario make_scenario(const RunConfig& cfg, const ScenarioSpec& spec) {
    Scenario s;
    s.name = spec.name;
    s.cycle = DriveCycle::load(spec.cycle_path);
    s.lane_change_interval = spec.lane_change_interval;
    s.regen_enabled = spec.regen;
    s.repetitions = spec.repetitions;
    s.run_to_depletion = spec.run_to_depletion;
    s.dt = spec.dt;
    s.trace_decimation = spec.trace_decimation;
    s.vehicle = cfg.vehicle;
    s.tire = cfg.tire;
    s.powertrain = cfg.powertrain;
    s.battery = cfg.battery;
    s.driver = cfg.driver;
    s.lane = cfg.lane;
    return s;
}

}  // namespace evflow
