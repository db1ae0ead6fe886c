#include "tiersim/workload.hpp"

#include "tiersim/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace tiersim {

const char* footprint_name(FootprintClass c) {
    switch (c) {
    case FootprintClass::Small: return "SMALL";
    case FootprintClass::Medium: return "MEDIUM";
    case FootprintClass::Large: return "LARGE";
    }
    return "?";
}

FootprintClass footprint_from_name(const std::string& s) {
    if (s == "SMALL" || s == "small") return FootprintClass::Small;
    if (s == "MEDIUM" || s == "medium") return FootprintClass::Medium;
    if (s == "LARGE" || s == "large") return FootprintClass::Large;
    throw ConfigError("unknown footprint class '" + s + "'");
}

double footprint_multiplier(FootprintClass c) {
    switch (c) {
    case FootprintClass::Small: return 0.85;
    case FootprintClass::Medium: return 1.5;
    case FootprintClass::Large: return 3.5;
    }
    return 1.0;
}

std::uint64_t WorkloadSpec::total_pages() const {
    std::uint64_t n = 0;
    for (const auto& r : regions) n += r.pages;
    return n;
}

void validate_footprint(const WorkloadSpec& spec, std::uint64_t fast_capacity_pages) {
    const double ratio = double(spec.total_pages()) / double(fast_capacity_pages);
    double lo = 0, hi = 0;
    switch (spec.footprint) {
    case FootprintClass::Small: lo = 0.0; hi = 1.0; break;
    case FootprintClass::Medium: lo = 1.25; hi = 1.75; break;
    case FootprintClass::Large: lo = 3.0; hi = 4.0; break;
    }
    if (ratio < lo || ratio > hi) {
        throw ConfigError("workload '" + spec.name + "' declares footprint " +
                          footprint_name(spec.footprint) + " but spans " +
                          fmt_double(ratio, 4) + "x fast capacity (expected [" +
                          fmt_double(lo, 3) + ", " + fmt_double(hi, 3) + "])");
    }
}

int Workload::region_of(PageId id) const {
    const auto& ls = layouts();
    for (std::size_t i = 0; i < ls.size(); ++i) {
        if (ls[i].pages == 0) continue;
        if (id >= ls[i].first_page_id() && id <= ls[i].last_page_id()) return int(i);
    }
    return -1;
}

namespace {

std::vector<RegionLayout> build_layouts(const WorkloadSpec& spec) {
    std::map<Pid, VPage> next_vpage;
    std::vector<RegionLayout> out;
    out.reserve(spec.regions.size());
    for (const auto& r : spec.regions) {
        RegionLayout l;
        l.name = r.name;
        l.pid = r.pid;
        l.first_vpage = next_vpage[r.pid];
        l.pages = r.pages;
        l.prefault = r.prefault;
        l.write_first = r.read_fraction < 1.0;
        next_vpage[r.pid] += r.pages;
        if (next_vpage[r.pid] >> kVPageBits)
            throw ConfigError("region '" + r.name + "' overflows the virtual page space of pid " +
                              std::to_string(r.pid));
        out.push_back(std::move(l));
    }
    return out;
}

// Demand/read-fraction timeline for one region, resolved from its base values
// plus phase changes. Segment starts are strictly increasing.
struct Segment {
    std::uint64_t start = 0;
    double demand = 0;
    double rf = 1.0;
    double units_per_epoch = 0; // demand expressed in whole-page touches
};

std::vector<Segment> build_segments(const RegionSpec& r, double epoch_s) {
    std::vector<Segment> segs;
    Segment cur;
    cur.start = 0;
    cur.demand = r.demand_mbps;
    cur.rf = r.read_fraction;
    segs.push_back(cur);
    std::uint64_t prev = 0;
    bool first = true;
    for (const auto& ph : r.phase_schedule) {
        if (!first && ph.start_epoch <= prev)
            throw ConfigError("region '" + r.name + "': phase starts must be strictly increasing");
        if (first && ph.start_epoch == 0) {
            // A change at epoch 0 just overrides the base values.
            segs.back().demand = ph.demand_mbps;
            if (ph.read_fraction) segs.back().rf = *ph.read_fraction;
        } else {
            Segment s = segs.back();
            s.start = ph.start_epoch;
            s.demand = ph.demand_mbps;
            if (ph.read_fraction) s.rf = *ph.read_fraction;
            segs.push_back(s);
        }
        prev = ph.start_epoch;
        first = false;
    }
    for (auto& s : segs) s.units_per_epoch = s.demand * kMB * epoch_s / kPageBytes;
    return segs;
}

std::uint64_t units_in(const Segment& s, std::uint64_t epochs) {
    return std::uint64_t(std::floor(double(epochs) * s.units_per_epoch));
}

std::uint64_t rng_seed_for(std::uint64_t seed, std::size_t region, std::uint64_t epoch) {
    std::uint64_t h = seed * 0x9E3779B97F4A7C15ULL;
    h ^= (std::uint64_t(region) + 1) * 0xBF58476D1CE4E5B9ULL;
    h ^= (epoch + 1) * 0x94D049BB133111EBULL;
    h ^= h >> 31;
    return h;
}

} // namespace

SyntheticWorkload::SyntheticWorkload(WorkloadSpec spec, std::uint64_t seed, double epoch_s)
    : spec_(std::move(spec)), seed_(seed), epoch_s_(epoch_s) {
    if (epoch_s_ <= 0) throw ConfigError("epoch length must be positive");
    if (spec_.regions.empty()) throw ConfigError("workload '" + spec_.name + "' has no regions");
    std::set<std::string> names;
    for (const auto& r : spec_.regions) {
        if (!names.insert(r.name).second)
            throw ConfigError("duplicate region name '" + r.name + "'");
        if (r.pages == 0 && r.active && r.demand_mbps > 0)
            throw ConfigError("region '" + r.name + "' has demand but zero pages");
        if (r.read_fraction < 0 || r.read_fraction > 1)
            throw ConfigError("region '" + r.name + "': read_fraction outside [0, 1]");
        if (r.demand_mbps < 0)
            throw ConfigError("region '" + r.name + "': negative demand");
        for (const auto& ph : r.phase_schedule)
            if (ph.read_fraction && (*ph.read_fraction < 0 || *ph.read_fraction > 1))
                throw ConfigError("region '" + r.name + "': phase read_fraction outside [0, 1]");
    }
    layouts_ = build_layouts(spec_);
    // Page-granular traffic saturates at one read-page plus one write-page of
    // charge per page per epoch; demand beyond that cannot be realized.
    for (std::size_t i = 0; i < spec_.regions.size(); ++i) {
        const auto& r = spec_.regions[i];
        if (!r.active || r.pages == 0) continue;
        for (const auto& s : build_segments(r, epoch_s_)) {
            const double reads = s.units_per_epoch * s.rf;
            const double writes = s.units_per_epoch * (1.0 - s.rf);
            if (reads > double(r.pages) || writes > double(r.pages)) {
                warnings_.push_back("region '" + r.name + "': demand " + fmt_double(s.demand, 6) +
                                    " MB/s from epoch " + std::to_string(s.start) +
                                    " exceeds the page-touch capacity of " +
                                    std::to_string(r.pages) + " pages; traffic will be clamped");
                break;
            }
        }
    }
}

std::uint64_t SyntheticWorkload::declared_pages() const { return spec_.total_pages(); }

EffectiveRate SyntheticWorkload::effective(std::size_t region, std::uint64_t epoch) const {
    const auto segs = build_segments(spec_.regions.at(region), epoch_s_);
    const Segment* cur = &segs.front();
    for (const auto& s : segs)
        if (s.start <= epoch) cur = &s;
    return {cur->demand, cur->rf};
}

AccessBatch SyntheticWorkload::generate(std::uint64_t epoch) const {
    AccessBatch batch;
    batch.epoch = epoch;
    for (std::size_t ri = 0; ri < spec_.regions.size(); ++ri) {
        const auto& r = spec_.regions[ri];
        if (!r.active || r.pages == 0) continue;
        const auto segs = build_segments(r, epoch_s_);

        // Locate the live segment and the cumulative unit position before this
        // epoch; cumulative flooring keeps long-run volume equal to demand
        // without any carried state.
        std::size_t si = 0;
        while (si + 1 < segs.size() && segs[si + 1].start <= epoch) ++si;
        const Segment& seg = segs[si];
        std::uint64_t seq_base = 0;
        for (std::size_t q = 0; q < si; ++q) {
            const std::uint64_t end = segs[q + 1].start;
            seq_base += units_in(segs[q], end - segs[q].start);
        }
        const std::uint64_t kb = units_in(seg, epoch - seg.start);
        const std::uint64_t ke = units_in(seg, epoch - seg.start + 1);
        if (ke == kb) continue;
        seq_base += kb;

        std::vector<std::uint32_t> rd(r.pages, 0), wr(r.pages, 0);
        std::vector<std::uint32_t> touched;
        touched.reserve(std::min<std::uint64_t>(ke - kb, r.pages));
        std::mt19937_64 rng(rng_seed_for(seed_, ri, epoch));
        const double wf = 1.0 - seg.rf;
        std::uint64_t reads_left = r.pages, writes_left = r.pages;
        for (std::uint64_t k = kb; k < ke; ++k) {
            const bool is_write =
                std::uint64_t(std::floor(double(k + 1) * wf)) > std::uint64_t(std::floor(double(k) * wf));
            std::uint64_t idx;
            if (r.pattern == AccessPattern::Sequential)
                idx = (seq_base + (k - kb)) % r.pages;
            else
                idx = rng() % r.pages;
            auto& cnt = is_write ? wr[idx] : rd[idx];
            auto& left = is_write ? writes_left : reads_left;
            if (cnt == 0) {
                if (left == 0) continue; // clamped: charge already saturated
                --left;
                if (rd[idx] == 0 && wr[idx] == 0) touched.push_back(std::uint32_t(idx));
            }
            cnt += kLinesPerPage;
        }
        std::sort(touched.begin(), touched.end());
        const auto& lay = layouts_[ri];
        for (std::uint32_t idx : touched) {
            AccessEntry e;
            e.page = make_page_id(lay.pid, lay.first_vpage + idx);
            e.reads = rd[idx];
            e.writes = wr[idx];
            batch.entries.push_back(e);
        }
    }
    if (!std::is_sorted(batch.entries.begin(), batch.entries.end(),
                        [](const AccessEntry& a, const AccessEntry& b) { return a.page < b.page; }))
        std::sort(batch.entries.begin(), batch.entries.end(),
                  [](const AccessEntry& a, const AccessEntry& b) { return a.page < b.page; });
    return batch;
}

TraceWorkload::TraceWorkload(std::string name, double epoch_s, std::vector<AccessBatch> batches)
    : name_(std::move(name)), epoch_s_(epoch_s), batches_(std::move(batches)) {
    for (std::size_t i = 0; i < batches_.size(); ++i) batches_[i].epoch = i;
}

AccessBatch TraceWorkload::generate(std::uint64_t epoch) const {
    if (epoch < batches_.size()) return batches_[epoch];
    AccessBatch empty;
    empty.epoch = epoch;
    return empty;
}

std::uint64_t TraceWorkload::declared_pages() const {
    std::set<PageId> seen;
    for (const auto& b : batches_)
        for (const auto& e : b.entries) seen.insert(e.page);
    return seen.size();
}

WorkloadSpec npb_profile(const std::string& app, FootprintClass footprint,
                         std::uint64_t fast_capacity_pages) {
    // Per-kernel aggregate read:write mixes follow the published profiles
    // (bt 3.5:1, ft 1.7:1, mg 4:1, cg >60:1). Demand levels and hot-set
    // fractions are desk-scale calibration: the hot set is sized to exceed
    // fast capacity at MEDIUM/LARGE so placement quality matters, and the
    // cold region gets a light spray so reference bits stay informative.
    struct Params {
        const char* app;
        double rf_agg;
        double demand;
        double hot_frac;
        double w_page_frac;
    };
    static const Params table[] = {
        {"bt", 0.7778, 30000, 0.55, 0.35},
        {"ft", 0.6296, 26000, 0.55, 0.50},
        {"mg", 0.8000, 36000, 0.55, 0.30},
        {"cg", 0.9850, 34000, 0.60, 0.10},
    };
    const Params* p = nullptr;
    for (const auto& t : table)
        if (app == t.app) p = &t;
    if (!p) throw ConfigError("unknown application profile '" + app + "' (expected bt, ft, mg or cg)");

    // 0.5% of demand sprayed over cold keeps reference bits and the slow
    // tier's write counters alive without drowning single-bit hotness signals.
    const double hot_demand_frac = 0.995;
    const std::uint64_t total = std::uint64_t(footprint_multiplier(footprint) * double(fast_capacity_pages));
    const std::uint64_t hot = std::uint64_t(p->hot_frac * double(total));
    const std::uint64_t cold = total - hot;
    const std::uint64_t w_pages = std::uint64_t(p->w_page_frac * double(hot));
    const std::uint64_t r_pages = hot - w_pages;
    const std::uint64_t wa = w_pages / 2, wb = w_pages - wa;
    const std::uint64_t ra = r_pages / 2, rb = r_pages - ra;

    const double hot_demand = hot_demand_frac * p->demand;
    const double cold_demand = p->demand - hot_demand;
    // Split hot demand so the write-hot half runs at rf 0.5 and the read-hot
    // half at rf 1.0 while the aggregate mix stays at rf_agg.
    const double w_demand = 2.0 * hot_demand * (1.0 - p->rf_agg);
    const double r_demand = hot_demand - w_demand;
    const std::uint64_t flip = 2000; // hot halves swap once, mid-run (1s at 0.5ms epochs)

    WorkloadSpec spec;
    spec.name = app + std::string("_") + footprint_name(footprint);
    for (auto& c : spec.name) c = char(std::tolower((unsigned char)c));
    spec.footprint = footprint;

    auto region = [](std::string name, std::uint64_t pages, double rf, double demand) {
        RegionSpec r;
        r.name = std::move(name);
        r.pages = pages;
        r.read_fraction = rf;
        r.demand_mbps = demand;
        r.pattern = AccessPattern::Random;
        return r;
    };
    // Cold first: a default allocator that fills the fast tier in declaration
    // order ends up with hot data in the slow tier at MEDIUM/LARGE.
    spec.regions.push_back(region("cold", cold, p->rf_agg, cold_demand));
    RegionSpec r_a = region("read_hot_a", ra, 1.0, r_demand);
    r_a.phase_schedule.push_back({flip, 0, std::nullopt});
    RegionSpec r_b = region("read_hot_b", rb, 1.0, 0);
    r_b.phase_schedule.push_back({flip, r_demand, std::nullopt});
    RegionSpec w_a = region("write_hot_a", wa, 0.5, w_demand);
    w_a.phase_schedule.push_back({flip, 0, std::nullopt});
    RegionSpec w_b = region("write_hot_b", wb, 0.5, 0);
    w_b.phase_schedule.push_back({flip, w_demand, std::nullopt});
    spec.regions.push_back(std::move(r_a));
    spec.regions.push_back(std::move(r_b));
    spec.regions.push_back(std::move(w_a));
    spec.regions.push_back(std::move(w_b));
    return spec;
}

WorkloadSpec parse_workload(const std::string& text, const std::string& origin,
                            std::uint64_t fast_capacity_pages) {
    WorkloadSpec spec;
    std::map<std::string, std::size_t> index;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool saw_version = false;
    auto fail = [&](const std::string& msg) {
        throw ParseError(origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = split_ws(line);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (tok[0] == "schema_version") {
            if (tok.size() != 2 || tok[1] != "1") fail("unsupported workload schema version");
            saw_version = true;
        } else if (tok[0] == "name") {
            if (tok.size() != 2) fail("expected: name <id>");
            spec.name = tok[1];
        } else if (tok[0] == "footprint") {
            if (tok.size() != 2) fail("expected: footprint SMALL|MEDIUM|LARGE");
            try {
                spec.footprint = footprint_from_name(tok[1]);
            } catch (const ConfigError& e) {
                fail(e.what());
            }
        } else if (tok[0] == "region") {
            KvPairs kv = parse_kv(tok, 1, origin + ":" + std::to_string(lineno));
            RegionSpec r;
            r.name = kv.get("name");
            if (index.count(r.name)) fail("duplicate region '" + r.name + "'");
            r.pid = Pid(kv.get_u64_or("pid", 1));
            if (kv.has("pages") && kv.has("pages_frac"))
                fail("region '" + r.name + "': give pages or pages_frac, not both");
            if (kv.has("pages_frac"))
                r.pages = std::uint64_t(kv.get_double("pages_frac") * double(fast_capacity_pages));
            else
                r.pages = kv.get_u64("pages");
            r.read_fraction = kv.get_double_or("read_fraction", 1.0);
            r.demand_mbps = kv.get_double_or("demand_mbps", 0.0);
            const std::string pat = kv.get_or("pattern", "random");
            if (pat == "random")
                r.pattern = AccessPattern::Random;
            else if (pat == "sequential")
                r.pattern = AccessPattern::Sequential;
            else
                fail("unknown pattern '" + pat + "'");
            r.active = kv.get_bool_or("active", true);
            r.prefault = kv.get_bool_or("prefault", true);
            index[r.name] = spec.regions.size();
            spec.regions.push_back(std::move(r));
        } else if (tok[0] == "phase") {
            KvPairs kv = parse_kv(tok, 1, origin + ":" + std::to_string(lineno));
            const std::string rname = kv.get("region");
            auto it = index.find(rname);
            if (it == index.end()) fail("phase references unknown region '" + rname + "'");
            PhaseChange ph;
            ph.start_epoch = kv.get_u64("start");
            ph.demand_mbps = kv.get_double("demand_mbps");
            if (kv.has("read_fraction")) ph.read_fraction = kv.get_double("read_fraction");
            spec.regions[it->second].phase_schedule.push_back(ph);
        } else {
            fail("unknown directive '" + tok[0] + "'");
        }
    }
    if (!saw_version) throw ParseError(origin + ": missing schema_version");
    if (spec.regions.empty()) throw ParseError(origin + ": workload defines no regions");
    if (spec.name.empty()) spec.name = "workload";
    return spec;
}

std::string write_workload(const WorkloadSpec& spec) {
    std::string out;
    out += "# tiersim workload\n";
    out += "schema_version 1\n";
    out += "name " + spec.name + "\n";
    out += std::string("footprint ") + footprint_name(spec.footprint) + "\n";
    for (const auto& r : spec.regions) {
        out += "region name=" + r.name + " pid=" + std::to_string(r.pid) +
               " pages=" + std::to_string(r.pages) +
               " read_fraction=" + fmt_double_rt(r.read_fraction) +
               " demand_mbps=" + fmt_double_rt(r.demand_mbps) +
               " pattern=" + (r.pattern == AccessPattern::Random ? "random" : "sequential") +
               " active=" + (r.active ? "1" : "0") + " prefault=" + (r.prefault ? "1" : "0") + "\n";
    }
    for (const auto& r : spec.regions) {
        for (const auto& ph : r.phase_schedule) {
            out += "phase region=" + r.name + " start=" + std::to_string(ph.start_epoch) +
                   " demand_mbps=" + fmt_double_rt(ph.demand_mbps);
            if (ph.read_fraction) out += " read_fraction=" + fmt_double_rt(*ph.read_fraction);
            out += "\n";
        }
    }
    return out;
}

std::string write_trace(const Workload& w, std::uint64_t horizon_epochs, double epoch_s) {
    std::string out;
    out += "# tiersim trace\n";
    out += "schema_version 1\n";
    out += "page_size " + std::to_string(kPageBytes) + "\n";
    out += "epoch_length_s " + fmt_double_rt(epoch_s) + "\n";
    out += "epochs " + std::to_string(horizon_epochs) + "\n";
    char buf[96];
    for (std::uint64_t e = 0; e < horizon_epochs; ++e) {
        const AccessBatch b = w.generate(e);
        for (const auto& a : b.entries) {
            std::snprintf(buf, sizeof buf, "%llu %u %llu %u %u\n", (unsigned long long)e,
                          page_pid(a.page), (unsigned long long)page_vpage(a.page), a.reads,
                          a.writes);
            out += buf;
        }
    }
    return out;
}

std::unique_ptr<TraceWorkload> parse_trace(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool saw_version = false;
    double epoch_s = 0;
    std::uint64_t epochs = 0;
    bool saw_epochs = false;
    std::vector<AccessBatch> batches;
    std::uint64_t prev_epoch = 0;
    bool saw_access = false;
    auto fail = [&](const std::string& msg) {
        throw ParseError(origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = split_ws(line);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (tok[0] == "schema_version") {
            if (tok.size() != 2 || tok[1] != "1") fail("unsupported trace schema version");
            saw_version = true;
        } else if (tok[0] == "page_size") {
            if (tok.size() != 2) fail("expected: page_size <bytes>");
            if (parse_u64(tok[1], origin) != kPageBytes)
                fail("trace page size " + tok[1] + " does not match the simulated page size " +
                     std::to_string(kPageBytes));
        } else if (tok[0] == "epoch_length_s") {
            if (tok.size() != 2) fail("expected: epoch_length_s <seconds>");
            epoch_s = parse_double(tok[1], origin);
            if (epoch_s <= 0) fail("epoch length must be positive");
        } else if (tok[0] == "epochs") {
            if (tok.size() != 2) fail("expected: epochs <count>");
            epochs = parse_u64(tok[1], origin);
            saw_epochs = true;
            batches.resize(epochs);
        } else if (std::isdigit((unsigned char)tok[0][0])) {
            if (!saw_epochs) fail("access record before the epochs header");
            if (tok.size() != 5) fail("expected: <epoch> <pid> <vpage> <reads> <writes>");
            const std::uint64_t e = parse_u64(tok[0], origin);
            const std::uint64_t pid = parse_u64(tok[1], origin);
            const std::uint64_t vpage = parse_u64(tok[2], origin);
            const std::uint64_t reads = parse_u64(tok[3], origin);
            const std::uint64_t writes = parse_u64(tok[4], origin);
            if (saw_access && e < prev_epoch)
                fail("epoch " + std::to_string(e) + " out of order (previous record was epoch " +
                     std::to_string(prev_epoch) + ")");
            if (e >= epochs)
                fail("epoch " + std::to_string(e) + " outside the declared range of " +
                     std::to_string(epochs) + " epochs");
            if (pid > 0xFFFFFFFFULL) fail("pid out of range");
            if (vpage >> kVPageBits) fail("virtual page out of range");
            if (reads > 0xFFFFFFFFULL || writes > 0xFFFFFFFFULL) fail("access count out of range");
            if (reads == 0 && writes == 0) fail("record carries no accesses");
            AccessEntry a;
            a.page = make_page_id(Pid(pid), vpage);
            a.reads = std::uint32_t(reads);
            a.writes = std::uint32_t(writes);
            batches[e].entries.push_back(a);
            prev_epoch = e;
            saw_access = true;
        } else {
            fail("unknown directive '" + tok[0] + "'");
        }
    }
    if (!saw_version) throw ParseError(origin + ": missing schema_version");
    if (epoch_s <= 0) throw ParseError(origin + ": missing epoch_length_s");
    if (!saw_epochs) throw ParseError(origin + ": missing epochs header");
    for (auto& b : batches) {
        std::sort(b.entries.begin(), b.entries.end(),
                  [](const AccessEntry& a, const AccessEntry& c) { return a.page < c.page; });
        // Merge duplicate pages within an epoch.
        std::vector<AccessEntry> merged;
        merged.reserve(b.entries.size());
        for (const auto& a : b.entries) {
            if (!merged.empty() && merged.back().page == a.page) {
                merged.back().reads += a.reads;
                merged.back().writes += a.writes;
            } else {
                merged.push_back(a);
            }
        }
        b.entries = std::move(merged);
    }
    std::string name = origin;
    const auto slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    return std::make_unique<TraceWorkload>(name, epoch_s, std::move(batches));
}

} // namespace tiersim
