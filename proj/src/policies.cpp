#include "tiersim/policies.hpp"

#include "tiersim/text_util.hpp"

#include <algorithm>
#include <cmath>

namespace tiersim {

MigrationReport PolicyContext::migrate(std::span<const PageId> pages, TierId dest,
                                       MigrationCharge charge, const std::string& what) {
    MigrationReport rep = pages_.migrate(pages, dest);
    if (!rep.ok()) {
        log_.record("migrate_failed", epoch_)
            .field("what", what)
            .field("pages", pages.size())
            .field("reason", rep.reason);
        return rep;
    }
    if (charge == MigrationCharge::Full) {
        const TierId src = other_tier(dest);
        migration_[src].read_bytes += rep.bytes;
        migration_[dest].write_bytes += rep.bytes;
    }
    if (rep.moved_pages > 0)
        log_.record("migrate", epoch_)
            .field("what", what)
            .field("dest", tier_name(dest))
            .field("pages", rep.moved_pages)
            .field("charged", charge == MigrationCharge::Full ? "full" : "none");
    return rep;
}

MigrationReport PolicyContext::exchange(std::span<const PageId> fast_pages,
                                        std::span<const PageId> slow_pages,
                                        const std::string& what) {
    MigrationReport rep = pages_.exchange(fast_pages, slow_pages);
    if (!rep.ok()) {
        log_.record("exchange_failed", epoch_)
            .field("what", what)
            .field("pairs", fast_pages.size())
            .field("reason", rep.reason);
        return rep;
    }
    // Both directions copy: each tier sees one page read out and one written in
    // per exchanged pair.
    const std::uint64_t bytes = fast_pages.size() * kPageBytes;
    migration_[TierId::Fast].read_bytes += bytes;
    migration_[TierId::Fast].write_bytes += bytes;
    migration_[TierId::Slow].read_bytes += bytes;
    migration_[TierId::Slow].write_bytes += bytes;
    if (!fast_pages.empty())
        log_.record("exchange", epoch_).field("what", what).field("pairs", fast_pages.size());
    return rep;
}

TierId Policy::allocation_hint(PageId, AccessKind) { return TierId::Fast; }
void Policy::on_epoch_begin(PolicyContext&) {}
void Policy::pre_apply(PolicyContext&, const AccessBatch&) {}

namespace {

std::vector<PageId> to_ids(const std::vector<SelectedPage>& sel) {
    std::vector<PageId> ids;
    ids.reserve(sel.size());
    for (const auto& s : sel) ids.push_back(s.page);
    return ids;
}

std::uint64_t floor_frac(double frac, std::uint64_t total) {
    return std::uint64_t(std::floor(frac * double(total)));
}

KvPairs wrap_params(const std::map<std::string, std::string>& params) {
    KvPairs kv;
    kv.kv = params;
    return kv;
}

void reject_unknown(const std::string& policy, const std::map<std::string, std::string>& params,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params) {
        bool ok = false;
        for (const char* a : allowed)
            if (k == a) ok = true;
        if (!ok)
            throw ConfigError("policy '" + policy + "' does not accept parameter '" + k + "'");
    }
}

} // namespace

HyPlacerDecision hyplacer_decide(const HyPlacerParams& p, double slow_write_mbps,
                                 std::uint64_t fast_used, std::uint64_t fast_capacity) {
    // Page-discrete boundary conventions: write bandwidth exactly at the
    // threshold counts as not-above. "Fast full" is asymmetric by design —
    // the write-pressure branch asks whether any promotion room remains below
    // the usage target (room == 0 → SWITCH, else the tier would deadlock at
    // exactly the target with write-hot pages stuck in slow), while the quiet
    // branch demotes only when usage runs strictly past the target.
    const std::uint64_t target = floor_frac(p.fast_usage_threshold, fast_capacity);
    const std::uint64_t room = target > fast_used ? target - fast_used : 0;
    HyPlacerDecision d;
    if (slow_write_mbps > p.slow_write_mbps) {
        if (room == 0) {
            d.mode = PageFindMode::Switch;
            d.count = fast_capacity;
        } else {
            d.mode = PageFindMode::PromoteIntensive;
            d.count = room;
        }
    } else {
        if (fast_used > target) {
            d.mode = PageFindMode::Demote;
            const std::uint64_t low =
                floor_frac(p.fast_usage_threshold - p.demote_hysteresis, fast_capacity);
            d.count = fast_used > low ? fast_used - low : 0;
        } else {
            d.mode = PageFindMode::Promote;
            d.count = room;
        }
    }
    d.count = std::min(d.count, p.max_pages);
    return d;
}

void HyPlacerPolicy::on_epoch_begin(PolicyContext& ctx) {
    if (pending_ && ctx.now_ms() >= pending_->execute_at_ms) execute_pending(ctx);
    if (ctx.epoch() == 0 || ctx.epoch() % params_.period_epochs != 0) return;
    if (pending_ || !ctx.counters_ready()) return;

    const BandwidthCounters bw = ctx.bandwidth(params_.window_epochs);
    const TierOccupancy occ = ctx.occupancy();
    const HyPlacerDecision d = hyplacer_decide(params_, bw.tiers.slow.write_mbps,
                                               occ.fast.used_pages, occ.fast.capacity_pages);
    ctx.log()
        .record("decision", ctx.epoch())
        .field("policy", name())
        .field("mode", page_find_mode_name(d.mode))
        .field("count", d.count)
        .field("slow_write_mbps", fmt_double(bw.tiers.slow.write_mbps, 6))
        .field("fast_used", occ.fast.used_pages);

    if (d.mode == PageFindMode::Demote) {
        if (d.count == 0) return;
        // Fast-side state is local; no classification delay needed.
        PageFindReply reply = ctx.selector().find_demote(d.count);
        if (!reply.selected.empty())
            ctx.migrate(to_ids(reply.selected), TierId::Slow, MigrationCharge::Full, "demote");
        return;
    }
    if (d.count == 0 && d.mode != PageFindMode::Switch) return;
    // Promotion-family actions read slow-tier recency, which is only
    // meaningful after a clear + settle delay.
    ctx.selector().clear_slow_bits(ctx.now_ms());
    ctx.log()
        .record("slow_clear", ctx.epoch())
        .field("policy", name())
        .field("execute_in_ms", fmt_double(params_.classify_delay_ms, 6));
    pending_ = PendingAction{d.mode, d.count, ctx.now_ms() + params_.classify_delay_ms};
}

void HyPlacerPolicy::execute_pending(PolicyContext& ctx) {
    const PendingAction act = *pending_;
    pending_.reset();
    // Validates the clear->delay protocol and gives the log a class census.
    const auto classes = ctx.selector().classify_after_delay(ctx.now_ms(), params_.classify_delay_ms);
    std::uint64_t wi = 0, ri = 0;
    for (const auto& [id, c] : classes) {
        if (c == PageClass::WriteIntensive) ++wi;
        else if (c == PageClass::ReadIntensive) ++ri;
    }
    ctx.log()
        .record("classified", ctx.epoch())
        .field("policy", name())
        .field("mode", page_find_mode_name(act.mode))
        .field("write_intensive", wi)
        .field("read_intensive", ri)
        .field("cold", classes.size() - wi - ri);

    if (act.mode == PageFindMode::Switch) {
        SwitchReply sw = ctx.selector().find_switch(act.count);
        if (!sw.promote.selected.empty())
            ctx.exchange(to_ids(sw.demote.selected), to_ids(sw.promote.selected), "switch");
        return;
    }
    // Usage may have drifted during the delay; never promote past the target.
    const TierOccupancy occ = ctx.occupancy();
    const std::uint64_t target =
        floor_frac(params_.fast_usage_threshold, occ.fast.capacity_pages);
    const std::uint64_t room = target > occ.fast.used_pages ? target - occ.fast.used_pages : 0;
    const std::uint64_t count = std::min(act.count, room);
    if (count == 0) return;
    PageFindReply reply =
        ctx.selector().find_promote(count, act.mode == PageFindMode::PromoteIntensive);
    if (!reply.selected.empty())
        ctx.migrate(to_ids(reply.selected), TierId::Fast, MigrationCharge::Full, "promote");
}

namespace {

// Fill-first allocation, never migrates. The reference point every comparison
// is anchored to.
class DefaultPolicy : public Policy {
public:
    const char* name() const override { return "admdefault"; }
};

// Direct-mapped-by-set LRU emulation of a hardware-managed fast tier: every
// access must hit fast, so slow-resident pages are filled on touch and set
// overflow evicts the least recently used page. Clean evictions move no data
// (the slow copy is still valid); dirty ones write back a full page.
class MemmPolicy : public Policy {
public:
    MemmPolicy(std::uint64_t fast_capacity, std::uint64_t assoc)
        : assoc_(assoc ? assoc : 16), nsets_(std::max<std::uint64_t>(1, fast_capacity / assoc_)),
          sets_(nsets_) {}

    const char* name() const override { return "memm"; }
    TierId allocation_hint(PageId, AccessKind) override { return TierId::Slow; }

    void pre_apply(PolicyContext& ctx, const AccessBatch& batch) override {
        PageSystem& ps = ctx.pages();
        for (const auto& e : batch.entries) {
            const PageDescriptor& d = ps.page(e.page);
            auto& set = sets_[e.page % nsets_];
            if (d.tier == TierId::Fast) {
                touch(set, e.page);
                continue;
            }
            if (set.size() >= assoc_) {
                const PageId victim = set.back();
                const bool dirty = ps.page(victim).dirty;
                const PageId vp[] = {victim};
                MigrationReport rep = ctx.migrate(
                    vp, TierId::Slow, dirty ? MigrationCharge::Full : MigrationCharge::None,
                    dirty ? "evict_dirty" : "evict_clean");
                if (!rep.ok()) continue; // keep servicing from slow
                ps.page_mut(victim).dirty = false;
                set.pop_back();
            }
            const PageId fp[] = {e.page};
            MigrationReport rep = ctx.migrate(fp, TierId::Fast, MigrationCharge::Full, "fill");
            if (rep.ok()) set.insert(set.begin(), e.page);
        }
    }

private:
    static void touch(std::vector<PageId>& set, PageId id) {
        auto it = std::find(set.begin(), set.end(), id);
        if (it != set.end()) set.erase(it);
        set.insert(set.begin(), id);
    }

    std::uint64_t assoc_;
    std::uint64_t nsets_;
    std::vector<std::vector<PageId>> sets_; // MRU at front
};

// Strict write/read partition: write-intensive pages go fast, everything else
// goes slow, re-evaluated every period from freshly cleared bits.
class PartitionedPolicy : public Policy {
public:
    PartitionedPolicy(std::uint64_t period, SimMs delay_ms, double threshold)
        : period_(period), delay_ms_(delay_ms), threshold_(threshold) {}

    const char* name() const override { return "partitioned"; }
    TierId allocation_hint(PageId, AccessKind first_kind) override {
        return first_kind == AccessKind::Write ? TierId::Fast : TierId::Slow;
    }

    void on_epoch_begin(PolicyContext& ctx) override {
        if (pending_at_ && ctx.now_ms() >= *pending_at_) execute(ctx);
        if (ctx.epoch() == 0 || ctx.epoch() % period_ != 0 || pending_at_) return;
        ctx.pages().clear_bits(TierId::Fast);
        ctx.selector().clear_slow_bits(ctx.now_ms());
        pending_at_ = ctx.now_ms() + delay_ms_;
    }

private:
    void execute(PolicyContext& ctx) {
        pending_at_.reset();
        const auto slow_classes = ctx.selector().classify_after_delay(ctx.now_ms(), delay_ms_);
        PageSystem& ps = ctx.pages();

        std::vector<PageId> demote;
        ps.walk(
            TierId::Fast, WalkCursor{},
            [&](PageDescriptor& d) {
                if (classify_bits(d.referenced, d.dirty) != PageClass::WriteIntensive)
                    demote.push_back(d.id);
                return true;
            },
            ps.resident_pages(TierId::Fast));
        std::vector<PageId> promote;
        for (const auto& [id, cls] : slow_classes)
            if (cls == PageClass::WriteIntensive) promote.push_back(id);

        const std::uint64_t cap = ctx.selector().max_pages_per_activation();
        const TierOccupancy occ = ctx.occupancy();
        const std::uint64_t slow_room = occ.slow.capacity_pages - occ.slow.used_pages;
        if (demote.size() > slow_room) demote.resize(slow_room);
        if (demote.size() > cap) demote.resize(cap);
        if (!demote.empty())
            ctx.migrate(demote, TierId::Slow, MigrationCharge::Full, "partition_demote");

        const TierOccupancy after = ctx.occupancy();
        const std::uint64_t target = floor_frac(threshold_, after.fast.capacity_pages);
        const std::uint64_t room =
            target > after.fast.used_pages ? target - after.fast.used_pages : 0;
        if (promote.size() > room) promote.resize(room);
        if (promote.size() > cap) promote.resize(cap);
        if (!promote.empty())
            ctx.migrate(promote, TierId::Fast, MigrationCharge::Full, "partition_promote");
    }

    std::uint64_t period_;
    SimMs delay_ms_;
    double threshold_;
    std::optional<SimMs> pending_at_;
};

// Fill-fast-first with periodic recency sweeps. A slow page referenced in two
// consecutive periods is promotion-worthy; promotions evict the oldest-stamped
// fast pages that went unreferenced this period. Dirtiness plays no part —
// that blindness is exactly what separates this baseline from hyplacer.
class FillFirstPolicy : public Policy {
public:
    FillFirstPolicy(std::uint64_t period, double threshold, double hysteresis)
        : period_(period), threshold_(threshold), hysteresis_(hysteresis) {}

    const char* name() const override { return "fillfirst_lru"; }

    void on_epoch_begin(PolicyContext& ctx) override {
        if (ctx.epoch() == 0 || ctx.epoch() % period_ != 0) return;
        PageSystem& ps = ctx.pages();
        const std::uint64_t now = ctx.epoch();

        std::vector<std::pair<std::uint64_t, PageId>> by_age; // (stamp, page)
        ps.walk(
            TierId::Fast, WalkCursor{},
            [&](PageDescriptor& d) {
                if (d.referenced) {
                    stamps_[d.id] = now;
                    d.referenced = false;
                }
                auto it = stamps_.find(d.id);
                by_age.emplace_back(it == stamps_.end() ? 0 : it->second, d.id);
                return true;
            },
            ps.resident_pages(TierId::Fast));
        std::sort(by_age.begin(), by_age.end());

        std::vector<PageId> cand;
        ps.walk(
            TierId::Slow, WalkCursor{},
            [&](PageDescriptor& d) {
                if (d.referenced) {
                    d.referenced = false;
                    auto it = seen_.find(d.id);
                    if (it != seen_.end() && it->second + period_ == now) cand.push_back(d.id);
                    seen_[d.id] = now;
                }
                return true;
            },
            ps.resident_pages(TierId::Slow));

        const TierOccupancy occ = ctx.occupancy();
        const std::uint64_t cap = ctx.selector().max_pages_per_activation();
        const std::uint64_t target = floor_frac(threshold_, occ.fast.capacity_pages);

        // Overflow trim (prefault can overshoot the occupancy target), then
        // further stale evictions as needed to house the confirmed-hot set.
        std::uint64_t trim = 0;
        if (occ.fast.used_pages > target) {
            const std::uint64_t low =
                floor_frac(threshold_ - hysteresis_, occ.fast.capacity_pages);
            trim = occ.fast.used_pages - low;
        }
        const std::uint64_t after_trim = occ.fast.used_pages - std::min(trim, occ.fast.used_pages);
        const std::uint64_t room = target > after_trim ? target - after_trim : 0;
        std::uint64_t evict = cand.size() > room ? std::uint64_t(cand.size()) - room : 0;

        std::vector<PageId> demote;
        for (const auto& [stamp, id] : by_age) {
            if (demote.size() < trim) {
                demote.push_back(id);
                continue;
            }
            if (evict == 0 || stamp >= now) break; // stale pages only beyond the trim
            demote.push_back(id);
            --evict;
        }
        if (demote.size() > cap) demote.resize(cap);
        const TierOccupancy snap = ctx.occupancy();
        const std::uint64_t slow_free = snap.slow.capacity_pages - snap.slow.used_pages;
        if (demote.size() > slow_free) demote.resize(slow_free);
        if (!demote.empty() &&
            ctx.migrate(demote, TierId::Slow, MigrationCharge::Full, "lru_demote").ok())
            for (PageId id : demote) stamps_.erase(id);

        const TierOccupancy after = ctx.occupancy();
        std::uint64_t n = target > after.fast.used_pages ? target - after.fast.used_pages : 0;
        n = std::min({n, std::uint64_t(cand.size()), cap});
        if (n == 0) return;
        std::vector<PageId> promote(cand.begin(), cand.begin() + n);
        if (ctx.migrate(promote, TierId::Fast, MigrationCharge::Full, "fill_promote").ok())
            for (PageId id : promote) {
                stamps_[id] = now;
                seen_.erase(id);
            }
    }

private:
    std::uint64_t period_;
    double threshold_;
    double hysteresis_;
    std::map<PageId, std::uint64_t> stamps_;
    std::map<PageId, std::uint64_t> seen_; // last period a slow page was referenced
};

// Picks the traffic split that maximizes modeled aggregate bandwidth over a
// small ratio grid, then rebalances referenced pages toward that split.
class BwBalancePolicy : public Policy {
public:
    BwBalancePolicy(std::uint64_t period, std::size_t window, double tie_margin, double threshold)
        : period_(period), window_(window), tie_margin_(tie_margin), threshold_(threshold) {}

    const char* name() const override { return "bwbalance"; }

    void on_epoch_begin(PolicyContext& ctx) override {
        if (ctx.epoch() == 0 || ctx.epoch() % period_ != 0 || !ctx.counters_ready()) return;
        const BandwidthCounters bw = ctx.bandwidth(window_);
        const double reads = bw.tiers.fast.read_mbps + bw.tiers.slow.read_mbps;
        const double writes = bw.tiers.fast.write_mbps + bw.tiers.slow.write_mbps;
        const double demand = reads + writes;
        if (demand <= 0) return;
        const double rf = reads / demand;

        // Grid walk from all-fast down; a smaller fast share must win by the
        // tie margin to displace the current best.
        double best_ratio = 1.0;
        double best_score = modeled(ctx, rf, demand, 1.0);
        for (double ratio = 0.95; ratio >= 0.4999; ratio -= 0.05) {
            const double score = modeled(ctx, rf, demand, ratio);
            if (score > best_score * (1.0 + tie_margin_)) {
                best_score = score;
                best_ratio = ratio;
            }
        }
        ctx.log()
            .record("decision", ctx.epoch())
            .field("policy", name())
            .field("fast_share", fmt_double(best_ratio, 4))
            .field("modeled_mbps", fmt_double(best_score, 6));

        PageSystem& ps = ctx.pages();
        std::vector<PageId> hot_fast, cold_fast, hot_slow;
        ps.walk(
            TierId::Fast, WalkCursor{},
            [&](PageDescriptor& d) {
                (d.referenced ? hot_fast : cold_fast).push_back(d.id);
                d.referenced = false;
                return true;
            },
            ps.resident_pages(TierId::Fast));
        // Slow pages count as hot only when referenced in two consecutive
        // periods; one-shot touches stay put.
        ps.walk(
            TierId::Slow, WalkCursor{},
            [&](PageDescriptor& d) {
                if (d.referenced) {
                    d.referenced = false;
                    auto it = seen_.find(d.id);
                    if (it != seen_.end() && it->second + period_ == ctx.epoch())
                        hot_slow.push_back(d.id);
                    seen_[d.id] = ctx.epoch();
                }
                return true;
            },
            ps.resident_pages(TierId::Slow));

        const TierOccupancy occ = ctx.occupancy();
        const std::uint64_t cap = ctx.selector().max_pages_per_activation();
        const std::uint64_t hot_total = hot_fast.size() + hot_slow.size();
        const std::uint64_t target_cap = floor_frac(threshold_, occ.fast.capacity_pages);
        const std::uint64_t desired =
            std::min(std::uint64_t(std::llround(best_ratio * double(hot_total))), target_cap);

        if (hot_fast.size() < desired) {
            std::uint64_t deficit = std::min(desired - hot_fast.size(), std::uint64_t(hot_slow.size()));
            deficit = std::min(deficit, cap);
            std::uint64_t free =
                target_cap > occ.fast.used_pages ? target_cap - occ.fast.used_pages : 0;
            if (free < deficit) {
                std::uint64_t need = std::min(deficit - free, std::uint64_t(cold_fast.size()));
                std::vector<PageId> demote(cold_fast.begin(), cold_fast.begin() + need);
                if (!demote.empty() &&
                    ctx.migrate(demote, TierId::Slow, MigrationCharge::Full, "balance_demote").ok())
                    free += need;
            }
            const std::uint64_t n = std::min(deficit, free);
            if (n > 0) {
                std::vector<PageId> promote(hot_slow.begin(), hot_slow.begin() + n);
                if (ctx.migrate(promote, TierId::Fast, MigrationCharge::Full, "balance_promote")
                        .ok())
                    for (PageId id : promote) seen_.erase(id);
            }
        } else if (hot_fast.size() > desired) {
            std::uint64_t surplus = std::min(hot_fast.size() - desired, cap);
            const TierOccupancy now = ctx.occupancy();
            surplus = std::min(surplus, now.slow.capacity_pages - now.slow.used_pages);
            std::vector<PageId> demote(hot_fast.end() - surplus, hot_fast.end());
            if (!demote.empty())
                ctx.migrate(demote, TierId::Slow, MigrationCharge::Full, "balance_demote");
        }
    }

private:
    double modeled(PolicyContext& ctx, double rf, double demand, double ratio) const {
        const auto f = ctx.tiers().spec(TierId::Fast).perf.evaluate(rf, ratio * demand);
        const auto s = ctx.tiers().spec(TierId::Slow).perf.evaluate(rf, (1.0 - ratio) * demand);
        return f.achieved_mbps + s.achieved_mbps;
    }

    std::uint64_t period_;
    std::size_t window_;
    double tie_margin_;
    double threshold_;
    std::map<PageId, std::uint64_t> seen_;
};

// Weighted-interleave first-touch placement, no migration: allocation n goes
// fast when the cumulative fast share crosses the next integer.
class StaticRatioPolicy : public Policy {
public:
    explicit StaticRatioPolicy(double fast_share) : share_(fast_share) {
        if (share_ < 0 || share_ > 1)
            throw ConfigError("static_ratio: fast_share outside [0, 1]");
    }

    const char* name() const override { return "static_ratio"; }
    TierId allocation_hint(PageId, AccessKind) override {
        const std::uint64_t before = std::uint64_t(std::floor(double(n_) * share_));
        const std::uint64_t after = std::uint64_t(std::floor(double(n_ + 1) * share_));
        ++n_;
        return after > before ? TierId::Fast : TierId::Slow;
    }

private:
    double share_;
    std::uint64_t n_ = 0;
};

} // namespace

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names = {
        "hyplacer", "admdefault", "memm", "partitioned", "fillfirst_lru", "bwbalance",
        "static_ratio"};
    return names;
}

std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const std::map<std::string, std::string>& params,
                                    const TierModel& tiers) {
    KvPairs kv = wrap_params(params);
    if (name == "hyplacer") {
        reject_unknown(name, params,
                       {"threshold", "hysteresis", "slow_write_mbps", "period", "delay_ms",
                        "window"});
        HyPlacerParams p;
        p.fast_usage_threshold = kv.get_double_or("threshold", p.fast_usage_threshold);
        p.demote_hysteresis = kv.get_double_or("hysteresis", p.demote_hysteresis);
        p.slow_write_mbps = kv.get_double_or("slow_write_mbps", p.slow_write_mbps);
        p.period_epochs = kv.get_u64_or("period", p.period_epochs);
        p.classify_delay_ms = kv.get_double_or("delay_ms", p.classify_delay_ms);
        p.window_epochs = std::size_t(kv.get_u64_or("window", p.window_epochs));
        if (p.period_epochs == 0) throw ConfigError("hyplacer: period must be positive");
        return std::make_unique<HyPlacerPolicy>(p);
    }
    if (name == "admdefault") {
        reject_unknown(name, params, {});
        return std::make_unique<DefaultPolicy>();
    }
    if (name == "memm") {
        reject_unknown(name, params, {"assoc"});
        return std::make_unique<MemmPolicy>(tiers.spec(TierId::Fast).capacity_pages,
                                            kv.get_u64_or("assoc", 16));
    }
    if (name == "partitioned") {
        reject_unknown(name, params, {"period", "delay_ms", "threshold"});
        return std::make_unique<PartitionedPolicy>(kv.get_u64_or("period", 200),
                                                   kv.get_double_or("delay_ms", 50),
                                                   kv.get_double_or("threshold", 0.95));
    }
    if (name == "fillfirst_lru") {
        reject_unknown(name, params, {"period", "threshold", "hysteresis"});
        return std::make_unique<FillFirstPolicy>(kv.get_u64_or("period", 200),
                                                 kv.get_double_or("threshold", 0.95),
                                                 kv.get_double_or("hysteresis", 0.02));
    }
    if (name == "bwbalance") {
        reject_unknown(name, params, {"period", "window", "tie_margin", "threshold"});
        return std::make_unique<BwBalancePolicy>(
            kv.get_u64_or("period", 200), std::size_t(kv.get_u64_or("window", 200)),
            kv.get_double_or("tie_margin", 0.001), kv.get_double_or("threshold", 0.95));
    }
    if (name == "static_ratio") {
        reject_unknown(name, params, {"fast_share"});
        return std::make_unique<StaticRatioPolicy>(kv.get_double("fast_share"));
    }
    throw ConfigError("unknown policy '" + name + "'");
}

} // namespace tiersim
