#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "evflow/config.hpp"
#include "evflow/errors.hpp"
#include "evflow/report.hpp"
#include "evflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace evflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSimFault = 2;
constexpr int kExitIdentity = 3;

struct JobResult {
    RunResult run;
    std::string error;
};

// Runs the scenario list on a small worker pool. Result order matches the
// input order regardless of scheduling.
std::vector<JobResult> run_all(const RunConfig& cfg,
                               const std::vector<Scenario>& scenarios,
                               int workers, bool with_traces) {
    std::vector<JobResult> results(scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= scenarios.size()) return;
            try {
                if (with_traces) {
                    const std::string path =
                        (fs::path(cfg.output_dir) / (scenarios[i].name + "_trace.csv"))
                            .string();
                    TraceCsvWriter writer(path);
                    results[i].run = run(scenarios[i],
                                         [&](const TraceRow& row) { writer.write(row); });
                    writer.close();
                    results[i].run.trace_path = path;
                } else {
                    results[i].run = run(scenarios[i]);
                }
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(scenarios.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return results;
}

void write_sidecar(const std::string& dir) {
    // Run metadata lives outside the data files so those stay
    // byte-reproducible.
    std::ofstream meta(fs::path(dir) / "run_info.txt");
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    meta << "generated_at: " << std::ctime(&now);
}

std::vector<Scenario> table_grid(const RunConfig& cfg) {
    std::vector<std::string> cycles = cfg.table_cycles;
    if (cycles.empty()) {
        for (const auto& spec : cfg.scenarios) {
            if (std::find(cycles.begin(), cycles.end(), spec.cycle_path) == cycles.end()) {
                cycles.push_back(spec.cycle_path);
            }
        }
    }
    if (cycles.empty()) {
        throw ConfigError("table: config must list cycles (cycles or scenarios)");
    }
    std::vector<Scenario> scenarios;
    for (const auto& path : cycles) {
        for (const bool regen : {false, true}) {
            for (const bool lanes : {false, true}) {
                ScenarioSpec spec;
                spec.cycle_path = path;
                spec.regen = regen;
                spec.lane_change_interval = lanes ? 1000.0 : 0.0;
                spec.name = "";
                Scenario s = make_scenario(cfg, spec);
                s.name = s.cycle.name() + (lanes ? "_lanes" : "_straight") +
                         (regen ? "_regen" : "_noregen");
                scenarios.push_back(std::move(s));
            }
        }
    }
    return scenarios;
}

int cmd_simulate(const std::string& config_path, const std::string& out_override,
                 int workers, bool lenient, bool full_rate) {
    std::vector<std::string> warnings;
    RunConfig cfg;
    try {
        cfg = parse_config(config_path, !lenient, &warnings);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (cfg.scenarios.empty()) {
        std::cerr << "config error: scenarios: at least one scenario is required\n";
        return kExitConfig;
    }

    try {
        fs::create_directories(cfg.output_dir);
        echo_config(cfg, (fs::path(cfg.output_dir) / "config_resolved.json").string());
        write_sidecar(cfg.output_dir);

        std::vector<Scenario> scenarios;
        for (const auto& spec : cfg.scenarios) {
            Scenario s = make_scenario(cfg, spec);
            if (full_rate) s.trace_decimation = 1;
            scenarios.push_back(std::move(s));
        }
        const auto results = run_all(cfg, scenarios, workers, true);

        std::vector<SummaryRow> rows;
        for (const auto& jr : results) {
            if (!jr.error.empty()) {
                std::cerr << "simulation fault: " << jr.error << "\n";
                return kExitSimFault;
            }
            rows.push_back(summarize(jr.run, cfg.battery.capacity_kwh));
        }
        write_summary_csv(rows, (fs::path(cfg.output_dir) / "summary.csv").string());
        std::cout << render_summary_table(rows);
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "simulation fault: " << e.what() << "\n";
        return kExitSimFault;
    }
}

int cmd_table(const std::string& config_path, const std::string& out_override,
              int workers, bool lenient) {
    std::vector<std::string> warnings;
    RunConfig cfg;
    try {
        cfg = parse_config(config_path, !lenient, &warnings);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (!out_override.empty()) cfg.output_dir = out_override;
    try {
        fs::create_directories(cfg.output_dir);
        echo_config(cfg, (fs::path(cfg.output_dir) / "config_resolved.json").string());
        write_sidecar(cfg.output_dir);
        const auto scenarios = table_grid(cfg);
        const auto results = run_all(cfg, scenarios, workers, false);
        std::vector<SummaryRow> rows;
        for (const auto& jr : results) {
            if (!jr.error.empty()) {
                std::cerr << "simulation fault: " << jr.error << "\n";
                return kExitSimFault;
            }
            rows.push_back(summarize(jr.run, cfg.battery.capacity_kwh));
        }
        write_summary_csv(rows, (fs::path(cfg.output_dir) / "table.csv").string());
        std::cout << render_summary_table(rows);
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "simulation fault: " << e.what() << "\n";
        return kExitSimFault;
    }
}

int cmd_check(const std::string& config_path, int workers, bool lenient, double tol) {
    std::vector<std::string> warnings;
    RunConfig cfg;
    try {
        cfg = parse_config(config_path, !lenient, &warnings);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (cfg.scenarios.empty()) {
        std::cerr << "config error: scenarios: at least one scenario is required\n";
        return kExitConfig;
    }
    try {
        std::vector<Scenario> scenarios;
        for (const auto& spec : cfg.scenarios) {
            scenarios.push_back(make_scenario(cfg, spec));
        }
        const auto results = run_all(cfg, scenarios, workers, false);
        bool all_ok = true;
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (!results[i].error.empty()) {
                std::cerr << "simulation fault: " << results[i].error << "\n";
                return kExitSimFault;
            }
            const auto report = results[i].run.ledger->balance_report(tol);
            std::cout << "[" << scenarios[i].name << "]\n"
                      << render_balance_report(report) << "\n";
            all_ok = all_ok && report.all_pass();
        }
        if (!all_ok) {
            std::cout << "identity check: FAIL\n";
            return kExitIdentity;
        }
        std::cout << "identity check: PASS\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "simulation fault: " << e.what() << "\n";
        return kExitSimFault;
    }
}

int cmd_range(double capacity, double energy, double distance) {
    try {
        const double range = range_extrapolate(capacity, energy, distance);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f", range);
        std::cout << buf << "\n";
        return kExitOk;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV energy-flow simulator: coupled longitudinal/lateral "
                 "maneuvers, battery-to-wheel energy ledger, drive-cycle "
                 "range studies"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    bool lenient = false;
    bool full_rate = false;
    double tol = 1e-3;

    auto* sim = app.add_subcommand("simulate", "Run the configured scenarios, "
                                               "emit traces and a summary table");
    sim->add_option("--config", config_path, "JSON configuration file")->required();
    sim->add_option("--out", out_dir, "Output directory (overrides config)");
    sim->add_option("--workers", workers, "Parallel scenario workers");
    sim->add_flag("--lenient", lenient, "Warn on unknown config keys instead of failing");
    sim->add_flag("--full-rate", full_rate, "Write traces at the full integration rate");

    auto* table = app.add_subcommand("table", "Run the 2x2 lane/regen grid per cycle "
                                              "and print the summary table");
    table->add_option("--config", config_path, "JSON configuration file")->required();
    table->add_option("--out", out_dir, "Output directory (overrides config)");
    table->add_option("--workers", workers, "Parallel scenario workers");
    table->add_flag("--lenient", lenient, "Warn on unknown config keys instead of failing");

    auto* check = app.add_subcommand("check", "Run the energy balance identity suite");
    check->add_option("--config", config_path, "JSON configuration file")->required();
    check->add_option("--workers", workers, "Parallel scenario workers");
    check->add_option("--tol", tol, "Relative identity tolerance");
    check->add_flag("--lenient", lenient, "Warn on unknown config keys instead of failing");

    double capacity = 0.0, energy = 0.0, distance = 0.0;
    auto* range = app.add_subcommand("range", "Extrapolate driving range from one run");
    range->add_option("--capacity-kwh", capacity, "Pack capacity")->required();
    range->add_option("--energy-kwh", energy, "Consumed battery energy")->required();
    range->add_option("--distance-km", distance, "Distance covered")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return cmd_simulate(config_path, out_dir, workers, lenient, full_rate);
    if (table->parsed()) return cmd_table(config_path, out_dir, workers, lenient);
    if (check->parsed()) return cmd_check(config_path, workers, lenient, tol);
    if (range->parsed()) return cmd_range(capacity, energy, distance);
    return kExitConfig;
}
