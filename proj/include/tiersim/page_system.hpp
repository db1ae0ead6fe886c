#pragma once

#include "tiersim/access.hpp"
#include "tiersim/types.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <unordered_map>
#include <string>
#include <vector>

namespace tiersim {

enum class AccessKind { Read, Write };

struct PageDescriptor {
    PageId id = 0;
    TierId tier = TierId::Fast;
    bool referenced = false; // sticky until explicitly cleared
    bool dirty = false;      // a store sets both bits
    // Ground truth for the current epoch only (reset lazily on first touch of a
    // new epoch; reads of a stale epoch report zero).
    std::uint32_t truth_reads = 0;
    std::uint32_t truth_writes = 0;
    std::uint64_t truth_epoch = 0;

    Pid pid() const { return page_pid(id); }
    VPage vpage() const { return page_vpage(id); }
};

struct TierUsage {
    std::uint64_t used_pages = 0;
    std::uint64_t capacity_pages = 0;
};
using TierOccupancy = PerTier<TierUsage>;

// Resume point for tiered walks: the next walk starts strictly after this
// (pid, vaddr) position and wraps.
struct WalkCursor {
    std::optional<PageId> last; // empty = start of canonical order
};

struct MigrationReport {
    std::uint64_t moved_pages = 0;
    std::uint64_t bytes = 0; // page copies: 4 KiB per page movement
    std::string reason;      // empty on success
    bool ok() const { return reason.empty(); }
};

struct WalkResult {
    WalkCursor cursor;
    std::uint64_t visited = 0;
};

class PageSystem {
public:
    explicit PageSystem(PerTier<std::uint64_t> capacity_pages);

    // First-touch placement: the hint tier if it has room, the other tier
    // otherwise; throws RunError when both are full. Allocation counts as a
    // touch typed by the first access.
    PageDescriptor& allocate(Pid pid, VPage vpage, TierId hint, AccessKind first_access);

    bool exists(PageId id) const { return pages_.count(id) != 0; }
    const PageDescriptor& page(PageId id) const;
    PageDescriptor& page_mut(PageId id);

    void set_epoch(std::uint64_t epoch) { epoch_ = epoch; }
    std::uint64_t epoch() const { return epoch_; }

    // Routes the batch by current residency, sets R/D bits and truth counters,
    // and returns per-tier charged traffic: one page (4096B) per touched page
    // per access kind per epoch, regardless of touch count.
    PerTier<Traffic> apply_access_batch(const AccessBatch& batch);

    // Visits up to `budget` descriptors of `tier` in canonical (pid, vaddr)
    // order, starting strictly after the cursor and wrapping; each resident
    // descriptor is visited at most once per call. The visitor returns false to
    // stop early. The returned cursor points at the last visited descriptor.
    WalkResult walk(TierId tier, WalkCursor cursor,
                    const std::function<bool(PageDescriptor&)>& visit, std::uint64_t budget);

    // All-or-nothing: every page must be resident in the other tier and the
    // destination must have room, otherwise nothing moves and reason is set.
    MigrationReport migrate(std::span<const PageId> pages, TierId dest);

    // Swaps residency of two equal-length disjoint page lists; occupancy of
    // both tiers is unchanged (validated).
    MigrationReport exchange(std::span<const PageId> fast_pages,
                             std::span<const PageId> slow_pages);

    std::uint64_t clear_bits(TierId tier); // returns descriptors visited

    TierOccupancy occupancy() const;
    std::uint64_t resident_pages(TierId t) const { return tier_index_[int(t)].size(); }
    std::uint64_t total_pages() const { return pages_.size(); }
    std::uint64_t migrated_pages() const { return migrated_pages_; } // lifetime total

    // One line per page: pid vaddr tier R D (canonical order).
    void dump(std::ostream& os) const;

    std::uint32_t truth_reads(const PageDescriptor& d) const {
        return d.truth_epoch == epoch_ ? d.truth_reads : 0;
    }
    std::uint32_t truth_writes(const PageDescriptor& d) const {
        return d.truth_epoch == epoch_ ? d.truth_writes : 0;
    }

private:
    std::unordered_map<PageId, PageDescriptor> pages_;
    std::set<PageId> tier_index_[2];
    PerTier<std::uint64_t> capacity_;
    std::uint64_t epoch_ = 0;
    std::uint64_t migrated_pages_ = 0;
};

} // namespace tiersim
