#pragma once

#include "tiersim/access.hpp"
#include "tiersim/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tiersim {

enum class AccessPattern { Sequential, Random };
enum class FootprintClass { Small, Medium, Large };

const char* footprint_name(FootprintClass c);
FootprintClass footprint_from_name(const std::string& s);

// Footprint sizing relative to fast-tier capacity:
//   SMALL fits entirely (<= 1x), MEDIUM ~1.5x, LARGE ~3.5x.
double footprint_multiplier(FootprintClass c);

struct PhaseChange {
    std::uint64_t start_epoch = 0;
    double demand_mbps = 0;
    std::optional<double> read_fraction; // empty = keep current
};

struct RegionSpec {
    std::string name;
    Pid pid = 1;
    std::uint64_t pages = 0;
    double read_fraction = 1.0; // reads / (reads + writes)
    double demand_mbps = 0;
    AccessPattern pattern = AccessPattern::Random;
    bool active = true;
    bool prefault = true; // allocate at epoch 0 in declaration order, no traffic
    std::vector<PhaseChange> phase_schedule;
};

struct WorkloadSpec {
    std::string name;
    FootprintClass footprint = FootprintClass::Small;
    std::vector<RegionSpec> regions;

    std::uint64_t total_pages() const;
};

// Declared class bounds vs. actual page count; throws ConfigError on mismatch.
void validate_footprint(const WorkloadSpec& spec, std::uint64_t fast_capacity_pages);

struct RegionLayout {
    std::string name;
    Pid pid = 1;
    VPage first_vpage = 0;
    std::uint64_t pages = 0;
    bool prefault = true;
    bool write_first = false; // first-access kind when prefaulted
    PageId first_page_id() const { return make_page_id(pid, first_vpage); }
    PageId last_page_id() const { return make_page_id(pid, first_vpage + pages - 1); }
};

struct EffectiveRate {
    double demand_mbps = 0;
    double read_fraction = 1.0;
};

// Epoch-indexed batch source. Pure per epoch: same (spec, seed, epoch) always
// produces the same bytes.
class Workload {
public:
    virtual ~Workload() = default;
    virtual AccessBatch generate(std::uint64_t epoch) const = 0;
    virtual const std::vector<RegionLayout>& layouts() const = 0;
    virtual std::uint64_t declared_pages() const = 0;
    virtual const std::string& name() const = 0;
    // Index into layouts() for a page, or -1 when unknown.
    int region_of(PageId id) const;
};

class SyntheticWorkload : public Workload {
public:
    SyntheticWorkload(WorkloadSpec spec, std::uint64_t seed, double epoch_s);

    AccessBatch generate(std::uint64_t epoch) const override;
    const std::vector<RegionLayout>& layouts() const override { return layouts_; }
    std::uint64_t declared_pages() const override;
    const std::string& name() const override { return spec_.name; }

    const WorkloadSpec& spec() const { return spec_; }
    EffectiveRate effective(std::size_t region, std::uint64_t epoch) const;
    // Regions whose peak demand cannot be realized at page-touch granularity
    // (charged traffic saturates at one page per kind per epoch); such demand
    // is clamped during generation.
    const std::vector<std::string>& demand_warnings() const { return warnings_; }

private:
    WorkloadSpec spec_;
    std::uint64_t seed_;
    double epoch_s_;
    std::vector<RegionLayout> layouts_;
    std::vector<std::string> warnings_;
};

class TraceWorkload : public Workload {
public:
    TraceWorkload(std::string name, double epoch_s, std::vector<AccessBatch> batches);

    AccessBatch generate(std::uint64_t epoch) const override;
    const std::vector<RegionLayout>& layouts() const override { return layouts_; }
    std::uint64_t declared_pages() const override;
    const std::string& name() const override { return name_; }

    std::uint64_t epochs() const { return batches_.size(); }
    double epoch_s() const { return epoch_s_; }

private:
    std::string name_;
    double epoch_s_;
    std::vector<AccessBatch> batches_;
    std::vector<RegionLayout> layouts_; // traces carry no region structure
};

// Region-structured profiles for the four reference kernels (bt, ft, mg, cg).
// Aggregate read:write ratios follow the published per-app mixes; demand levels
// and hot-set fractions are desk-scale calibration documented in the profile.
WorkloadSpec npb_profile(const std::string& app, FootprintClass footprint,
                         std::uint64_t fast_capacity_pages);

// Workload file format (.wl) — see docs/FORMATS.md.
WorkloadSpec parse_workload(const std::string& text, const std::string& origin,
                            std::uint64_t fast_capacity_pages);
std::string write_workload(const WorkloadSpec& spec);

// Trace file format — header (page size, epoch length) + one access tuple per
// line with non-decreasing epochs.
std::string write_trace(const Workload& w, std::uint64_t horizon_epochs, double epoch_s);
std::unique_ptr<TraceWorkload> parse_trace(const std::string& text, const std::string& origin);

} // namespace tiersim
