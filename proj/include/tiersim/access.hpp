#pragma once

#include "tiersim/types.hpp"

#include <vector>

namespace tiersim {

// Counts are 64B-cacheline-equivalent touches. Entries are merged per page and
// sorted by page id, so batch application order is deterministic.
struct AccessEntry {
    PageId page = 0;
    std::uint32_t reads = 0;
    std::uint32_t writes = 0;
};

struct AccessBatch {
    std::uint64_t epoch = 0;
    std::vector<AccessEntry> entries;
};

} // namespace tiersim
