#pragma once

#include "tiersim/access.hpp"
#include "tiersim/event_log.hpp"
#include "tiersim/selection.hpp"
#include "tiersim/tier_model.hpp"
#include "tiersim/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tiersim {

// Full = one page read on the source tier plus one page write on the
// destination; None models an inclusive-cache clean eviction (the lower copy
// is still valid, nothing is transferred).
enum class MigrationCharge { Full, None };

// Per-epoch view handed to policies. Migration traffic goes into a separate
// pool: it shares tier bandwidth with application traffic during service but
// is never visible through the bandwidth counters policies sample.
class PolicyContext {
public:
    PolicyContext(PageSystem& pages, PageSelector& selector, const TierModel& tiers,
                  const BandwidthMonitor& monitor, EventLog& log, std::uint64_t epoch,
                  SimMs now_ms, double epoch_s, PerTier<Traffic>& migration_out)
        : pages_(pages), selector_(selector), tiers_(tiers), monitor_(monitor), log_(log),
          epoch_(epoch), now_ms_(now_ms), epoch_s_(epoch_s), migration_(migration_out) {}

    PageSystem& pages() { return pages_; }
    PageSelector& selector() { return selector_; }
    const TierModel& tiers() const { return tiers_; }
    EventLog& log() { return log_; }
    std::uint64_t epoch() const { return epoch_; }
    SimMs now_ms() const { return now_ms_; }
    double epoch_s() const { return epoch_s_; }

    bool counters_ready() const { return monitor_.epochs() > 0; }
    BandwidthCounters bandwidth(std::size_t window_epochs) const {
        return monitor_.sample(window_epochs);
    }
    TierOccupancy occupancy() const { return pages_.occupancy(); }

    MigrationReport migrate(std::span<const PageId> pages, TierId dest, MigrationCharge charge,
                            const std::string& what);
    MigrationReport exchange(std::span<const PageId> fast_pages,
                             std::span<const PageId> slow_pages, const std::string& what);

private:
    PageSystem& pages_;
    PageSelector& selector_;
    const TierModel& tiers_;
    const BandwidthMonitor& monitor_;
    EventLog& log_;
    std::uint64_t epoch_;
    SimMs now_ms_;
    double epoch_s_;
    PerTier<Traffic>& migration_;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual const char* name() const = 0;
    // Placement hint for a page seen for the first time; the page system falls
    // back to the other tier when the hinted one is full.
    virtual TierId allocation_hint(PageId page, AccessKind first_kind);
    // Runs before traffic is generated for the epoch: period decisions and
    // delayed executions live here.
    virtual void on_epoch_begin(PolicyContext& ctx);
    // Runs after allocation but before the batch is applied; the cache
    // emulation uses it to fill/evict against the incoming accesses.
    virtual void pre_apply(PolicyContext& ctx, const AccessBatch& batch);
};

struct HyPlacerParams {
    double fast_usage_threshold = 0.95;
    double demote_hysteresis = 0.02;   // demote down to threshold - hysteresis
    double slow_write_mbps = 10.0;     // write-pressure cut between quadrants
    std::uint64_t period_epochs = 200; // decision cadence (100ms at 0.5ms epochs)
    SimMs classify_delay_ms = 50;      // slow-tier clear -> classify delay
    std::size_t window_epochs = 200;   // counter averaging window
    std::uint64_t max_pages = 131072;  // decision counts never exceed this
};

struct HyPlacerDecision {
    PageFindMode mode = PageFindMode::Promote;
    std::uint64_t count = 0;
};

// Pure decision quadrant: slow-tier write pressure picks the family
// (write-aware exchange vs. plain promotion), fast-tier usage picks the
// direction within it.
HyPlacerDecision hyplacer_decide(const HyPlacerParams& p, double slow_write_mbps,
                                 std::uint64_t fast_used, std::uint64_t fast_capacity);

class HyPlacerPolicy : public Policy {
public:
    explicit HyPlacerPolicy(HyPlacerParams params) : params_(params) {}
    const char* name() const override { return "hyplacer"; }
    void on_epoch_begin(PolicyContext& ctx) override;
    const HyPlacerParams& params() const { return params_; }

private:
    struct PendingAction {
        PageFindMode mode = PageFindMode::Promote;
        std::uint64_t count = 0;
        SimMs execute_at_ms = 0;
    };
    void execute_pending(PolicyContext& ctx);

    HyPlacerParams params_;
    std::optional<PendingAction> pending_;
};

// Names every shipped policy; factory below accepts exactly these.
const std::vector<std::string>& policy_names();

std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const std::map<std::string, std::string>& params,
                                    const TierModel& tiers);

} // namespace tiersim
