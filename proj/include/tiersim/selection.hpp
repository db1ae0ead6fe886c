#pragma once

#include "tiersim/page_system.hpp"
#include "tiersim/types.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace tiersim {

enum class PageClass { Cold, ReadIntensive, WriteIntensive };

inline const char* page_class_name(PageClass c) {
    switch (c) {
        case PageClass::Cold: return "cold";
        case PageClass::ReadIntensive: return "read_intensive";
        case PageClass::WriteIntensive: return "write_intensive";
    }
    return "?";
}

// dirty => write-intensive; referenced-only => read-intensive; untouched => cold.
inline PageClass classify_bits(bool referenced, bool dirty) {
    if (dirty) return PageClass::WriteIntensive;
    if (referenced) return PageClass::ReadIntensive;
    return PageClass::Cold;
}

enum class PageFindMode { Demote, Promote, PromoteIntensive, Switch, SlowClear };

inline const char* page_find_mode_name(PageFindMode m) {
    switch (m) {
        case PageFindMode::Demote: return "DEMOTE";
        case PageFindMode::Promote: return "PROMOTE";
        case PageFindMode::PromoteIntensive: return "PROMOTE_INT";
        case PageFindMode::Switch: return "SWITCH";
        case PageFindMode::SlowClear: return "DCPMM_CLEAR";
    }
    return "?";
}

struct PageFindRequest {
    PageFindMode mode = PageFindMode::Demote;
    std::uint64_t count = 0; // ignored for SlowClear (always whole tier)
    SimMs delay_ms = 0;      // promotion modes: elapsed clear->classify delay
};

struct SelectedPage {
    PageId page = 0;
    PageClass cls = PageClass::Cold;
};

struct PageFindReply {
    std::vector<SelectedPage> selected;
    bool exhausted = false; // walk covered the whole tier
    WalkCursor cursor_advanced_to;
};

struct SwitchReply {
    PageFindReply promote; // slow-tier intensive pages
    PageFindReply demote;  // fast-tier cold pages, truncated to equal length
};

// Kernel-side selection walks. Keeps one resume cursor per tier (the pages not
// inspected for longest are visited first) and tracks the clear->delay protocol
// for slow-tier classification.
class PageSelector {
public:
    PageSelector(PageSystem& ps, std::uint64_t max_pages_per_activation = 131072)
        : ps_(ps), cap_(max_pages_per_activation) {}

    std::uint64_t max_pages_per_activation() const { return cap_; }

    // CLOCK second chance over the fast tier: selects pages with referenced=0 at
    // visit time (class-priority ordered), clears R/D of visited unselected
    // pages, stops at count or after one full wrap.
    PageFindReply find_demote(std::uint64_t count);

    // Clears R/D of every slow-tier page; starts the classification window.
    std::uint64_t clear_slow_bits(SimMs now_ms);

    // Requires a completed clear + delay; read-only (never mutates bits).
    std::map<PageId, PageClass> classify_after_delay(SimMs now_ms, SimMs delay_ms) const;

    // Walks the slow tier collecting promotion candidates: write-intensive
    // first, then read-intensive, then (unless intensive_only) cold pages to
    // fill the count. Never mutates R/D bits.
    PageFindReply find_promote(std::uint64_t count, bool intensive_only);

    // Intensive slow pages paired with an equal number of cold fast pages.
    SwitchReply find_switch(std::uint64_t count);

    const WalkCursor& cursor(TierId t) const { return cursor_[int(t)]; }
    void set_cursor(TierId t, WalkCursor c) { cursor_[int(t)] = c; }

private:
    PageSystem& ps_;
    std::uint64_t cap_;
    WalkCursor cursor_[2];
    bool clear_done_ = false;
    SimMs clear_time_ms_ = 0;
};

} // namespace tiersim
