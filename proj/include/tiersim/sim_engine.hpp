#pragma once

#include "tiersim/policies.hpp"
#include "tiersim/tier_model.hpp"
#include "tiersim/workload.hpp"

#include <map>
#include <string>
#include <vector>

namespace tiersim {

struct SimConfig {
    std::string run_id; // conventionally <workload>_<policy>_s<seed>
    std::uint64_t horizon_epochs = 0;
    double epoch_s = 0.0005;
    std::uint64_t seed = 1;
    PerTier<TierSpec> tiers;
    std::string policy = "admdefault";
    std::map<std::string, std::string> policy_params;

    void validate() const;
};

// One row per epoch per tier in the per-epoch metrics output.
struct EpochTierRow {
    std::uint64_t epoch = 0;
    TierId tier = TierId::Fast;
    double offered_mbps = 0;  // application + migration + carried backlog
    double achieved_mbps = 0; // serviced this epoch, all provenances
    double latency_ns = 0;
    double app_read_mbps = 0; // routed application traffic, this epoch only
    double app_write_mbps = 0;
    double app_achieved_mbps = 0; // application share of serviced bytes
    double migration_mbps = 0;    // migration traffic injected this epoch
    double backlog_mb = 0;        // carried into the next epoch
    double energy_mj = 0;
    std::uint64_t used_pages = 0;
};

struct RegionRow {
    std::string region;
    std::uint64_t pages = 0;
    double routed_mb = 0;
    double serviced_mb = 0; // routed bytes scaled by the tier service ratio
    double mean_latency_ns = 0;
    double peak_achieved_mbps = 0;
    double fast_byte_share = 0; // routed bytes that hit the fast tier
};

struct RunSummary {
    std::string run_id;
    std::string workload;
    std::string policy;
    std::uint64_t seed = 0;
    std::uint64_t epochs = 0;
    double epoch_s = 0;
    double app_offered_mb = 0;
    double app_serviced_mb = 0;
    double achieved_mbps = 0;       // application bytes serviced per second
    double total_achieved_mbps = 0; // including migration traffic
    double mean_latency_ns = 0;     // weighted by application serviced bytes
    double energy_j = 0;
    std::uint64_t migrated_pages = 0;
    double migration_mb = 0;
    std::uint64_t fast_used_final = 0;
    std::uint64_t slow_used_final = 0;
    double backlog_final_mb = 0;
    bool demand_clamped = false;
};

struct RunResult {
    RunSummary summary;
    std::vector<EpochTierRow> epochs;
    std::vector<RegionRow> regions;
    std::string event_log;
};

RunResult run_simulation(const SimConfig& cfg, const Workload& workload);

// CSV renderers (stable formatting; see docs/FORMATS.md).
std::string metrics_csv(const RunResult& r);
std::string region_csv(const RunResult& r);
std::string summary_csv_header();
std::string summary_csv_row(const RunSummary& s);

// Cross-run comparison against a baseline policy. Rows are per
// (workload, seed, policy); per-policy GEOMEAN rows aggregate the speedup and
// energy ratio over all workload/seed cells.
struct ComparisonRow {
    std::string workload;
    std::uint64_t seed = 0;
    std::string policy;
    double achieved_mbps = 0;
    double baseline_mbps = 0;
    double speedup = 0;
    double energy_j = 0;
    double baseline_energy_j = 0;
    double energy_ratio = 0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;            // per-cell, baseline excluded
    std::map<std::string, double> geomean_speedup; // by policy
    std::map<std::string, double> geomean_energy;  // by policy
};

ComparisonTable build_comparison(const std::vector<RunSummary>& runs,
                                 const std::string& baseline_policy);
std::string comparison_csv(const ComparisonTable& t);
// Spearman rank correlation between speedup and energy ratio per policy.
std::string correlation_csv(const ComparisonTable& t);

double geomean(const std::vector<double>& xs);
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

} // namespace tiersim
