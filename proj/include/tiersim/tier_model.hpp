#pragma once

#include "tiersim/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tiersim {

// One measured operating point on a fixed read-fraction line.
struct SurfaceAnchor {
    double demand_mbps = 0;   // offered demand
    double latency_ns = 0;    // mean access latency at that demand
    double achieved_mbps = 0; // bandwidth actually delivered
};

struct SurfaceLine {
    double read_fraction = 1.0; // reads / (reads + writes)
    std::vector<SurfaceAnchor> anchors;
};

// Loaded-latency / achieved-bandwidth surface over (read_fraction, demand).
// Between anchors the surface is bilinear; past the last anchor of a line the
// bandwidth clamps to the line's peak and latency extrapolates along the last
// segment (open-loop overload shows up as unbounded queueing latency).
class TierPerformanceModel {
public:
    struct Eval {
        double achieved_mbps = 0;
        double latency_ns = 0;
    };

    TierPerformanceModel() = default;
    TierPerformanceModel(std::string name, std::vector<SurfaceLine> lines,
                         double divergence_knee_mbps);

    Eval evaluate(double read_fraction, double demand_mbps) const;
    double peak_bandwidth(double read_fraction) const;

    double peak_read_bw() const;          // all-reads line peak
    double peak_write_limited_bw() const; // lowest read-fraction line peak
    double base_latency_ns() const;
    double divergence_knee_mbps() const { return divergence_knee_; }
    const std::vector<SurfaceLine>& lines() const { return lines_; }
    const std::string& name() const { return name_; }

private:
    struct LineEval {
        double achieved;
        double latency;
    };
    LineEval eval_line(const SurfaceLine& line, double demand) const;
    void validate() const;

    std::string name_;
    std::vector<SurfaceLine> lines_; // sorted by read_fraction ascending
    double divergence_knee_ = 0;
};

struct TierSpec {
    std::uint64_t capacity_pages = 0;
    double read_energy_nj = 0;  // per 64B access
    double write_energy_nj = 0; // per 64B access
    TierPerformanceModel perf;
};

// Outcome of servicing one epoch of offered traffic on one tier.
struct ServiceResult {
    double offered_mbps = 0;
    double achieved_mbps = 0;
    double mean_latency_ns = 0;
    double energy_nj = 0;
    Traffic serviced; // bytes completed this epoch (<= offered, 64B-granular)
};

class TierModel {
public:
    explicit TierModel(PerTier<TierSpec> specs) : specs_(std::move(specs)) {}

    const TierSpec& spec(TierId t) const { return specs_[t]; }

    // Pure function: surplus demand is not dropped here; the caller carries the
    // unserviced remainder as backlog into the next epoch.
    ServiceResult service_epoch(TierId t, const Traffic& offered, double epoch_s) const;

private:
    PerTier<TierSpec> specs_;
};

// Windowed per-tier application-traffic rates (the performance-counter stand-in
// that placement decisions read). Records routed application traffic only —
// migration traffic is never included.
struct BandwidthCounters {
    struct Rates {
        double read_mbps = 0;
        double write_mbps = 0;
    };
    PerTier<Rates> tiers;
    std::size_t window_epochs = 0; // epochs actually averaged
    bool short_window = false;     // true when fewer epochs had elapsed than requested
};

class BandwidthMonitor {
public:
    explicit BandwidthMonitor(double epoch_s) : epoch_s_(epoch_s) {}

    void record_epoch(const PerTier<Traffic>& routed) { history_.push_back(routed); }
    BandwidthCounters sample(std::size_t window) const;
    void reset() { history_.clear(); }
    std::size_t epochs() const { return history_.size(); }

private:
    double epoch_s_;
    std::vector<PerTier<Traffic>> history_;
};

} // namespace tiersim
