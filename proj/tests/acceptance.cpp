// Acceptance suite: end-to-end checks of the energy-flow simulator against
// its reference behavior. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "evflow/dynamics.hpp"
#include "evflow/report.hpp"
#include "evflow/scenario.hpp"

using namespace evflow;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

struct GridKey {
    std::string cycle;
    bool lanes;
    bool regen;
    bool operator<(const GridKey& o) const {
        return std::tie(cycle, lanes, regen) < std::tie(o.cycle, o.lanes, o.regen);
    }
};

// --- criterion 1: range arithmetic against the reference tables ---
void check_range_arithmetic() {
    struct Row {
        double energy_kwh;
        double distance_km;
        double range_km;
    };
    const std::vector<Row> rows = {
        // NEDC: without regen (no lanes / lanes), with regen (no lanes / lanes)
        {1.9, 11.764, 336.08},  {2.035, 11.768, 313.82},
        {1.7, 11.715, 373.86},  {1.823, 11.718, 348.94},
        // FTP-75
        {3.101, 19.35, 338.64}, {3.23, 19.264, 323.63},
        {2.652, 19.216, 393.32},{2.708, 19.15, 383.8},
        // HWFET
        {2.77, 16.93, 331.92},  {3.114, 16.94, 295.16},
        {2.66, 16.9, 344.45},   {3.01, 16.92, 304.92},
    };
    double worst = 0.0;
    for (const auto& row : rows) {
        const double range = range_extrapolate(54.28, row.energy_kwh, row.distance_km);
        worst = std::max(worst, std::abs(range - row.range_km) / row.range_km);
    }
    report(1, worst <= 5e-3,
           "range extrapolation matches all 12 reference triples, worst error " +
               fmt("%.3f", worst * 100.0) + "% (tol 0.5%)");
}

// --- criterion 7 helpers: independent oracle implementations ---
bool check_force_oracle() {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> force(-6000.0, 6000.0);
    std::uniform_real_distribution<double> steer(-0.5, 0.5);
    const VehicleParams p;
    const double px[4] = {p.a, p.a, -p.b, -p.b};
    const double py[4] = {p.half_track, -p.half_track, p.half_track, -p.half_track};
    for (int trial = 0; trial < 1000; ++trial) {
        WheelForces wf;
        for (int i = 0; i < 4; ++i) {
            wf.fx[i] = force(rng);
            wf.fy[i] = force(rng);
        }
        const double delta = steer(rng);
        const auto body = aggregate_forces(wf, delta, 0.0, p);
        double fx = 0.0, fy = 0.0, mz = 0.0;
        for (int i = 0; i < 4; ++i) {
            const bool front = i < 2;
            const double cd = front ? std::cos(delta) : 1.0;
            const double sd = front ? std::sin(delta) : 0.0;
            const double fxb = wf.fx[i] * cd - wf.fy[i] * sd;
            const double fyb = wf.fx[i] * sd + wf.fy[i] * cd;
            fx += fxb;
            fy += fyb;
            mz += px[i] * fyb - py[i] * fxb;
        }
        const double scale = std::max({std::abs(fx), std::abs(fy), std::abs(mz), 1.0});
        if (std::abs(body.fx - fx) > 1e-12 * scale ||
            std::abs(body.fy - fy) > 1e-12 * scale ||
            std::abs(body.mz - mz) > 1e-12 * scale) {
            return false;
        }
    }
    return true;
}

bool check_tire_oracle() {
    TireParams p;
    const double fz = 4500.0;
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) {
            const double kappa = -1.0 + 2.0 * i / 49.0;
            const double alpha = -1.5 + 3.0 * j / 49.0;
            const auto f = tire_force({kappa, alpha}, fz, p);
            double ex = p.slip_stiffness * kappa;
            double ey = -p.cornering_stiffness * std::tan(alpha);
            const double resultant = std::hypot(ex, ey);
            if (resultant > 0.0) {
                const double lam = p.friction * fz / (2.0 * resultant);
                if (lam < 1.0) {
                    ex *= lam * (2.0 - lam);
                    ey *= lam * (2.0 - lam);
                }
            }
            const double scale = std::max({std::abs(ex), std::abs(ey), 1.0});
            if (std::abs(f.x - ex) > 1e-12 * scale || std::abs(f.y - ey) > 1e-12 * scale) {
                return false;
            }
        }
    }
    return true;
}

bool check_battery_oracle() {
    std::mt19937_64 rng(7161);
    std::uniform_real_distribution<double> soc(0.1, 0.95);
    std::uniform_real_distribution<double> power(-60e3, 100e3);
    BatteryParams bp;
    PowertrainParams p;
    p.inverter_efficiency = 1.0;
    p.regen_power_max = 1e9;
    for (int i = 0; i < 100; ++i) {
        BatteryState b;
        b.soc = soc(rng);
        const double pw = power(rng);
        const auto next = battery_step(pw, pw >= 0.0 ? 1.0 : -1.0, true, b, bp, p, 1e-4);
        const double voc = bp.open_circuit_voltage(b.soc);
        const double r = bp.internal_resistance;
        const double expected = (voc - std::sqrt(voc * voc - 4.0 * r * pw)) / (2.0 * r);
        if (std::abs(next.current - expected) > 1e-9 * std::max(std::abs(expected), 1.0)) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main() {
    check_range_arithmetic();

    // Run the full 2x2 grid for the three bundled cycles once; every
    // simulation-based criterion reads from these results.
    const std::vector<std::string> cycle_paths = {
        "data/cycles/nedc.csv", "data/cycles/ftp75.csv", "data/cycles/hwfet.csv"};
    struct Job {
        GridKey key;
        Scenario scenario;
    };
    std::vector<Job> jobs;
    for (const auto& path : cycle_paths) {
        const DriveCycle cycle = DriveCycle::load(path);
        for (const bool lanes : {false, true}) {
            for (const bool regen : {false, true}) {
                Scenario s;
                s.cycle = cycle;
                s.lane_change_interval = lanes ? 1000.0 : 0.0;
                s.regen_enabled = regen;
                s.name = cycle.name() + (lanes ? "_lanes" : "_straight") +
                         (regen ? "_regen" : "_noregen");
                jobs.push_back({GridKey{cycle.name(), lanes, regen}, std::move(s)});
            }
        }
    }

    std::vector<RunResult> results(jobs.size());
    {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                results[i] = run(jobs[i].scenario);
            }
        };
        unsigned n = std::thread::hardware_concurrency();
        if (n == 0) n = 2;
        n = std::min<unsigned>(n, static_cast<unsigned>(jobs.size()));
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::map<GridKey, const RunResult*> grid;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        grid[jobs[i].key] = &results[i];
    }

    // --- criterion 2: balance identities on the full closed-loop runs ---
    {
        bool pass = true;
        double worst = 0.0;
        std::string worst_where;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto rep = results[i].ledger->balance_report(1e-3);
            for (const auto& identity : rep.identities) {
                if (identity.name == "diff_efficiency_traction" ||
                    identity.name == "diff_efficiency_regen") {
                    continue;  // exact by construction; covered in unit tests
                }
                if (identity.relative > worst) {
                    worst = identity.relative;
                    worst_where = jobs[i].scenario.name + "/" + identity.name;
                }
                pass = pass && identity.pass;
            }
        }
        report(2, pass,
               "balance identities on all 12 cycle runs at dt=1ms, worst residual " +
                   fmt("%.2e", worst) + " (" + worst_where + ", tol 1e-3)");
    }

    // --- criterion 3: lane changes strictly cost energy; HWFET band ---
    {
        bool sign_ok = true;
        for (const auto& path : cycle_paths) {
            const DriveCycle c = DriveCycle::load(path);
            for (const bool regen : {false, true}) {
                const double with = grid[{c.name(), true, regen}]->battery_energy_kwh;
                const double without = grid[{c.name(), false, regen}]->battery_energy_kwh;
                sign_ok = sign_ok && with > without;
            }
        }
        const double hw_with = grid[{"hwfet", true, false}]->battery_energy_kwh;
        const double hw_without = grid[{"hwfet", false, false}]->battery_energy_kwh;
        const double uplift = (hw_with - hw_without) / hw_without;
        const bool band_ok = uplift >= 0.03 && uplift <= 0.20;
        report(3, sign_ok && band_ok,
               std::string("lane-change uplift positive on all 6 pairs") +
                   (sign_ok ? "" : " VIOLATED") + "; HWFET no-regen uplift " +
                   fmt("%.1f", uplift * 100.0) + "% (band [3, 20]%)");
    }

    // --- criterion 4: regeneration strictly saves energy; NEDC band ---
    {
        bool sign_ok = true;
        for (const auto& path : cycle_paths) {
            const DriveCycle c = DriveCycle::load(path);
            for (const bool lanes : {false, true}) {
                const double with = grid[{c.name(), lanes, true}]->battery_energy_kwh;
                const double without = grid[{c.name(), lanes, false}]->battery_energy_kwh;
                sign_ok = sign_ok && with < without;
            }
        }
        const double nedc_regen = grid[{"nedc", false, true}]->battery_energy_kwh;
        const double nedc_plain = grid[{"nedc", false, false}]->battery_energy_kwh;
        const double saving = (nedc_plain - nedc_regen) / nedc_plain;
        const bool band_ok = saving >= 0.03 && saving <= 0.25;
        report(4, sign_ok && band_ok,
               std::string("regen saves energy on all 6 pairs") +
                   (sign_ok ? "" : " VIOLATED") + "; NEDC no-lane reduction " +
                   fmt("%.1f", saving * 100.0) + "% (band [3, 25]%)");
    }

    // --- criterion 5: sign structure ---
    {
        bool front_neg = true, rear_pos = true, noregen_nonneg = true;
        double min_power = 0.0;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto signs = results[i].ledger->classify_signs();
            front_neg = front_neg && signs.wheel_out_x[kFrontLeft] < 0.0 &&
                        signs.wheel_out_x[kFrontRight] < 0.0;
            rear_pos = rear_pos && signs.wheel_out_x[kRearLeft] > 0.0 &&
                       signs.wheel_out_x[kRearRight] > 0.0;
            if (!jobs[i].scenario.regen_enabled) {
                noregen_nonneg = noregen_nonneg && signs.battery_power_min >= 0.0;
                min_power = std::min(min_power, signs.battery_power_min);
            }
        }
        report(5, front_neg && rear_pos && noregen_nonneg,
               std::string("front E_out_x < 0 and rear E_out_x > 0 on all runs; ") +
                   "battery power >= 0 at every step without regen (min " +
                   fmt("%.3f", min_power) + " W)");
    }

    // --- criterion 6: friction + rotation share of battery power ---
    {
        const double p95 =
            grid[{"ftp75", false, false}]->ledger->traction_share_p95();
        const double p95_lanes =
            grid[{"ftp75", true, false}]->ledger->traction_share_p95();
        report(6, p95 <= 0.05,
               "FTP-75 traction-interval p95 of (friction+rotation)/battery = " +
                   fmt("%.4f", p95) + " (tol 0.05; with lanes " +
                   fmt("%.4f", p95_lanes) + ")");
    }

    // --- criterion 7: oracle equivalence ---
    {
        const bool forces = check_force_oracle();
        const bool tires = check_tire_oracle();
        const bool battery = check_battery_oracle();
        report(7, forces && tires && battery,
               std::string("oracle equivalence: r x F ") + (forces ? "ok" : "FAIL") +
                   ", Dugoff grid " + (tires ? "ok" : "FAIL") + ", battery root " +
                   (battery ? "ok" : "FAIL"));
    }

    // --- criterion 8: driver tracking quality ---
    {
        bool rms_ok = true;
        double worst_rms = 0.0;
        for (const auto& path : cycle_paths) {
            const DriveCycle c = DriveCycle::load(path);
            const double rms = grid[{c.name(), false, false}]->rms_speed_error;
            worst_rms = std::max(worst_rms, rms);
            rms_ok = rms_ok && rms < 0.5;
        }
        Scenario lane_track;
        lane_track.cycle = DriveCycle("const25", {0.0, 120.0}, {25.0, 25.0});
        lane_track.lane_change_interval = 1000.0;
        lane_track.regen_enabled = false;
        const auto lt = run(lane_track);
        const bool lat_ok = lt.peak_lateral_error < 0.3 && lt.peak_lateral_error > 0.0;
        report(8, rms_ok && lat_ok,
               "worst cycle RMS speed error " + fmt("%.3f", worst_rms) +
                   " m/s (tol 0.5); lane-change peak lateral error at 25 m/s " +
                   fmt("%.3f", lt.peak_lateral_error) + " m (tol 0.3)");
    }

    // --- criterion 9: determinism ---
    {
        Scenario s;
        s.cycle = DriveCycle::load("data/cycles/hwfet.csv");
        s.lane_change_interval = 1000.0;
        s.regen_enabled = true;
        s.name = "hwfet_repeat";
        auto render = [&](const char* path) {
            const auto result = run(s);
            std::vector<SummaryRow> rows{summarize(result, s.battery.capacity_kwh)};
            write_summary_csv(rows, path);
            std::ifstream in(path);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const std::string a = render("build/acceptance_summary_a.csv");
        const std::string b = render("build/acceptance_summary_b.csv");
        report(9, !a.empty() && a == b,
               "repeated identical runs produce byte-identical summary CSVs");
    }

    if (g_failures == 0) {
        std::printf("acceptance: all criteria PASS\n");
    } else {
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
