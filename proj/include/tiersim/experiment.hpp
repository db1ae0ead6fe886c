#pragma once

#include "tiersim/sim_engine.hpp"
#include "tiersim/workload.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace tiersim {

// Experiment description file (.exp): a workload set crossed with either a
// policy set (matrix) or a static placement-ratio grid (sweep_ratio), repeated
// over seeds. See docs/FORMATS.md.
struct ExperimentSpec {
    enum class Type { Matrix, SweepRatio };

    struct WorkloadRef {
        enum class Kind { Npb, File, Trace };
        Kind kind = Kind::Npb;
        std::string app;      // npb
        FootprintClass footprint = FootprintClass::Small;
        std::string path;     // file / trace, resolved against the .exp location
    };
    struct PolicyRef {
        std::string name;
        std::map<std::string, std::string> params;
        std::string label; // name plus distinguishing params
    };

    std::string name = "experiment";
    Type type = Type::Matrix;
    std::string calibration = "default";
    double epoch_s = 0.0005;
    std::uint64_t horizon = 4000; // trace workloads with horizon 0 use the trace length
    std::vector<std::uint64_t> seeds = {1};
    std::string baseline = "admdefault";
    std::vector<WorkloadRef> workloads;
    std::vector<PolicyRef> policies;
    std::vector<double> fast_shares; // sweep_ratio grid, descending

    void validate() const;
};

ExperimentSpec parse_experiment(const std::string& text, const std::string& origin);
ExperimentSpec load_experiment_file(const std::string& path);

struct SweepRow {
    std::string workload;
    std::uint64_t seed = 0;
    double fast_share = 0;
    double achieved_mbps = 0;
    double mean_latency_ns = 0;
    double energy_j = 0;
    double gain = 0; // achieved / achieved at the all-fast reference point
    bool best = false;
};

// Highest achieved bandwidth wins; candidates within tie_margin of the best
// resolve by lower mean latency, then by the larger fast share.
std::size_t pick_best_ratio(const std::vector<SweepRow>& rows, double tie_margin = 0.001);

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<RunResult> runs; // cell order: workload-major, then policy/share, then seed
    ComparisonTable comparison;  // matrix runs when the baseline was present
    bool has_comparison = false;
    std::vector<SweepRow> sweep; // sweep_ratio only
};

struct ExperimentOptions {
    std::string out_dir;        // empty = keep results in memory only
    bool write_per_run = true;  // per-run metrics/regions/events under <out>/runs/
    unsigned workers = 1;
    std::vector<std::uint64_t> seeds_override;
    std::string calibration_override;
    bool dry_run = false;       // expand and list cells without running
    bool timestamp_header = true; // "# generated <UTC>" line atop each CSV
    std::ostream* progress = nullptr;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const ExperimentOptions& opt);

// Builds the workload instance for one cell (exposed for tools/tests).
std::unique_ptr<Workload> materialize_workload(const ExperimentSpec::WorkloadRef& ref,
                                               std::uint64_t seed, double epoch_s,
                                               std::uint64_t fast_capacity_pages);

std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace tiersim
