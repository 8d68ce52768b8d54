#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "evflow/scenario.hpp"

namespace evflow {

// Streaming trace writer with a fixed, documented column schema. Numbers
// are formatted with fixed precision so identical runs produce
// byte-identical files.
class TraceCsvWriter {
public:
    explicit TraceCsvWriter(const std::string& path);  // throws IoError
    ~TraceCsvWriter();

    void write(const TraceRow& row);
    void close();

    static const std::vector<std::string>& columns();

private:
    std::ofstream out_;
    std::string path_;
};

// One scenario's line of the summary table.
struct SummaryRow {
    std::string name;
    std::string cycle;
    double lane_change_interval = 0.0;
    bool regen = false;
    double distance_km = 0.0;
    double battery_energy_kwh = 0.0;
    double range_km = 0.0;
    double rms_speed_error = 0.0;
    double worst_identity_residual = 0.0;  // relative
    double traction_share_p95 = 0.0;
    bool soc_depleted = false;
};

SummaryRow summarize(const RunResult& result, double capacity_kwh,
                     double identity_tol = 1e-3);

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path);  // throws IoError

// Console rendering. When all four lane/regen variants of a cycle are
// present they are arranged as the 2x2 grid (without/with regeneration x
// without/with lane changes); other scenarios get one column each.
std::string render_summary_table(const std::vector<SummaryRow>& rows);

std::string render_balance_report(const BalanceReport& report);

}  // namespace evflow
