#include "tiersim/selection.hpp"

#include <algorithm>

namespace tiersim {

namespace {

// Stable class-priority ordering within a candidate list.
void order_by_priority(std::vector<SelectedPage>& v,
                       std::initializer_list<PageClass> priority) {
    std::vector<SelectedPage> out;
    out.reserve(v.size());
    for (PageClass c : priority)
        for (const auto& s : v)
            if (s.cls == c) out.push_back(s);
    v = std::move(out);
}

} // namespace

PageFindReply PageSelector::find_demote(std::uint64_t count) {
    count = std::min(count, cap_);
    PageFindReply reply;
    std::uint64_t resident = ps_.resident_pages(TierId::Fast);
    if (resident == 0 || count == 0) {
        reply.cursor_advanced_to = cursor_[0];
        reply.exhausted = resident == 0;
        return reply;
    }
    auto res = ps_.walk(
        TierId::Fast, cursor_[0],
        [&](PageDescriptor& d) {
            if (!d.referenced) {
                reply.selected.push_back({d.id, classify_bits(d.referenced, d.dirty)});
                return reply.selected.size() < count;
            }
            // Second chance: not selected this pass, becomes a candidate next pass.
            d.referenced = false;
            d.dirty = false;
            return true;
        },
        resident);
    cursor_[0] = res.cursor;
    reply.cursor_advanced_to = res.cursor;
    reply.exhausted = res.visited == resident;
    order_by_priority(reply.selected,
                      {PageClass::Cold, PageClass::ReadIntensive, PageClass::WriteIntensive});
    return reply;
}

std::uint64_t PageSelector::clear_slow_bits(SimMs now_ms) {
    clear_done_ = true;
    clear_time_ms_ = now_ms;
    return ps_.clear_bits(TierId::Slow);
}

std::map<PageId, PageClass> PageSelector::classify_after_delay(SimMs now_ms,
                                                               SimMs delay_ms) const {
    if (!clear_done_)
        throw std::logic_error("classify_after_delay without a preceding DCPMM_CLEAR");
    if (now_ms - clear_time_ms_ + 1e-9 < delay_ms)
        throw std::logic_error("classify_after_delay before the delay elapsed");
    std::map<PageId, PageClass> out;
    // Read-only sweep in canonical order; cursor is not involved.
    const_cast<PageSystem&>(ps_).walk(
        TierId::Slow, WalkCursor{},
        [&](PageDescriptor& d) {
            out[d.id] = classify_bits(d.referenced, d.dirty);
            return true;
        },
        ps_.resident_pages(TierId::Slow));
    return out;
}

PageFindReply PageSelector::find_promote(std::uint64_t count, bool intensive_only) {
    count = std::min(count, cap_);
    PageFindReply reply;
    std::uint64_t resident = ps_.resident_pages(TierId::Slow);
    if (resident == 0 || count == 0) {
        reply.cursor_advanced_to = cursor_[1];
        reply.exhausted = resident == 0;
        return reply;
    }
    std::vector<SelectedPage> seen;
    seen.reserve(std::min<std::uint64_t>(resident, 4096));
    std::uint64_t wi = 0;
    auto res = ps_.walk(
        TierId::Slow, cursor_[1],
        [&](PageDescriptor& d) {
            PageClass c = classify_bits(d.referenced, d.dirty);
            seen.push_back({d.id, c});
            if (c == PageClass::WriteIntensive) ++wi;
            // May stop early only once the top class alone can satisfy the count.
            return wi < count;
        },
        resident);
    cursor_[1] = res.cursor;
    reply.cursor_advanced_to = res.cursor;
    reply.exhausted = res.visited == resident;

    auto take = [&](PageClass c) {
        for (const auto& s : seen) {
            if (reply.selected.size() >= count) return;
            if (s.cls == c) reply.selected.push_back(s);
        }
    };
    take(PageClass::WriteIntensive);
    take(PageClass::ReadIntensive);
    if (!intensive_only) take(PageClass::Cold);
    return reply;
}

SwitchReply PageSelector::find_switch(std::uint64_t count) {
    // Exchange moves two pages per pair; keep a whole activation within the cap.
    count = std::min(count, cap_ / 2);
    SwitchReply reply;
    reply.promote = find_promote(count, /*intensive_only=*/true);
    reply.demote = find_demote(count);
    std::size_t n = std::min(reply.promote.selected.size(), reply.demote.selected.size());
    reply.promote.selected.resize(n);
    reply.demote.selected.resize(n);
    return reply;
}

} // namespace tiersim
