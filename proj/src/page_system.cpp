#include "tiersim/page_system.hpp"

#include <algorithm>

namespace tiersim {

PageSystem::PageSystem(PerTier<std::uint64_t> capacity_pages) : capacity_(capacity_pages) {
    if (capacity_.fast == 0 || capacity_.slow == 0)
        throw ConfigError("PageSystem: zero tier capacity");
}

PageDescriptor& PageSystem::allocate(Pid pid, VPage vpage, TierId hint, AccessKind first_access) {
    PageId id = make_page_id(pid, vpage);
    if (pages_.count(id)) throw RunError("allocate: page already bound");
    TierId t = hint;
    if (tier_index_[int(t)].size() >= capacity_[t]) t = other_tier(t);
    if (tier_index_[int(t)].size() >= capacity_[t])
        throw RunError("allocate: both tiers full (pid " + std::to_string(pid) + ")");
    PageDescriptor d;
    d.id = id;
    d.tier = t;
    d.referenced = true;
    d.dirty = first_access == AccessKind::Write;
    d.truth_epoch = epoch_;
    auto [it, ok] = pages_.emplace(id, d);
    (void)ok;
    tier_index_[int(t)].insert(id);
    return it->second;
}

const PageDescriptor& PageSystem::page(PageId id) const {
    auto it = pages_.find(id);
    if (it == pages_.end()) throw RunError("unknown page id");
    return it->second;
}

PageDescriptor& PageSystem::page_mut(PageId id) {
    auto it = pages_.find(id);
    if (it == pages_.end()) throw RunError("unknown page id");
    return it->second;
}

PerTier<Traffic> PageSystem::apply_access_batch(const AccessBatch& batch) {
    PerTier<Traffic> routed;
    for (const auto& e : batch.entries) {
        auto it = pages_.find(e.page);
        if (it == pages_.end())
            throw RunError("apply_access_batch: access to unbound page");
        PageDescriptor& d = it->second;
        if (d.truth_epoch != epoch_) {
            d.truth_epoch = epoch_;
            d.truth_reads = 0;
            d.truth_writes = 0;
        }
        if (e.reads) {
            d.referenced = true;
            d.truth_reads += e.reads;
            routed[d.tier].read_bytes += kPageBytes;
        }
        if (e.writes) {
            d.referenced = true;
            d.dirty = true;
            d.truth_writes += e.writes;
            routed[d.tier].write_bytes += kPageBytes;
        }
    }
    return routed;
}

WalkResult PageSystem::walk(TierId tier, WalkCursor cursor,
                            const std::function<bool(PageDescriptor&)>& visit,
                            std::uint64_t budget) {
    auto& index = tier_index_[int(tier)];
    WalkResult res{cursor, 0};
    if (index.empty() || budget == 0) return res;
    std::uint64_t limit = std::min<std::uint64_t>(budget, index.size());

    auto it = cursor.last ? index.upper_bound(*cursor.last) : index.begin();
    while (res.visited < limit) {
        if (it == index.end()) it = index.begin();
        PageId id = *it;
        ++it; // advance before the visitor so bit mutation cannot invalidate us
        ++res.visited;
        res.cursor.last = id;
        if (!visit(pages_.find(id)->second)) break;
    }
    return res;
}

MigrationReport PageSystem::migrate(std::span<const PageId> pages, TierId dest) {
    MigrationReport rep;
    TierId src = other_tier(dest);
    std::set<PageId> seen;
    for (PageId id : pages) {
        auto it = pages_.find(id);
        if (it == pages_.end()) {
            rep.reason = "unknown page";
            return rep;
        }
        if (it->second.tier != src) {
            rep.reason = "page not resident in source tier";
            return rep;
        }
        if (!seen.insert(id).second) {
            rep.reason = "duplicate page in request";
            return rep;
        }
    }
    if (tier_index_[int(dest)].size() + pages.size() > capacity_[dest]) {
        rep.reason = "destination capacity exceeded";
        return rep;
    }
    for (PageId id : pages) {
        pages_.find(id)->second.tier = dest;
        tier_index_[int(src)].erase(id);
        tier_index_[int(dest)].insert(id);
    }
    rep.moved_pages = pages.size();
    rep.bytes = pages.size() * kPageBytes;
    migrated_pages_ += rep.moved_pages;
    return rep;
}

MigrationReport PageSystem::exchange(std::span<const PageId> fast_pages,
                                     std::span<const PageId> slow_pages) {
    MigrationReport rep;
    if (fast_pages.size() != slow_pages.size()) {
        rep.reason = "unequal exchange lists";
        return rep;
    }
    std::set<PageId> seen;
    auto check = [&](std::span<const PageId> list, TierId expect) -> bool {
        for (PageId id : list) {
            auto it = pages_.find(id);
            if (it == pages_.end() || it->second.tier != expect) {
                rep.reason = "page not resident in expected tier";
                return false;
            }
            if (!seen.insert(id).second) {
                rep.reason = "duplicate page in request";
                return false;
            }
        }
        return true;
    };
    if (!check(fast_pages, TierId::Fast) || !check(slow_pages, TierId::Slow)) return rep;

    TierOccupancy before = occupancy();
    for (PageId id : fast_pages) {
        pages_.find(id)->second.tier = TierId::Slow;
        tier_index_[0].erase(id);
        tier_index_[1].insert(id);
    }
    for (PageId id : slow_pages) {
        pages_.find(id)->second.tier = TierId::Fast;
        tier_index_[1].erase(id);
        tier_index_[0].insert(id);
    }
    TierOccupancy after = occupancy();
    if (before.fast.used_pages != after.fast.used_pages ||
        before.slow.used_pages != after.slow.used_pages)
        throw std::logic_error("exchange changed tier occupancy");
    rep.moved_pages = fast_pages.size() + slow_pages.size();
    rep.bytes = rep.moved_pages * kPageBytes;
    migrated_pages_ += rep.moved_pages;
    return rep;
}

std::uint64_t PageSystem::clear_bits(TierId tier) {
    std::uint64_t n = 0;
    for (PageId id : tier_index_[int(tier)]) {
        PageDescriptor& d = pages_.find(id)->second;
        d.referenced = false;
        d.dirty = false;
        ++n;
    }
    return n;
}

TierOccupancy PageSystem::occupancy() const {
    TierOccupancy occ;
    occ.fast = {std::uint64_t(tier_index_[0].size()), capacity_.fast};
    occ.slow = {std::uint64_t(tier_index_[1].size()), capacity_.slow};
    return occ;
}

void PageSystem::dump(std::ostream& os) const {
    std::vector<PageId> ids;
    ids.reserve(pages_.size());
    for (const auto& [id, d] : pages_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (PageId id : ids) {
        const PageDescriptor& d = pages_.find(id)->second;
        os << d.pid() << ' ' << d.vpage() << ' ' << tier_name(d.tier) << ' '
           << int(d.referenced) << ' ' << int(d.dirty) << '\n';
    }
}

} // namespace tiersim
