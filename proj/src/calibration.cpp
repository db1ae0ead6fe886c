#include "tiersim/calibration.hpp"

#include "tiersim/text_util.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

namespace tiersim {

namespace {

SurfaceLine line(double rf, std::initializer_list<SurfaceAnchor> as) {
    SurfaceLine l;
    l.read_fraction = rf;
    l.anchors = as;
    return l;
}

// Desk-scale surfaces. Shapes encode the qualitative contract: the slow tier's
// all-read peak is half the fast tier's, its saturated all-read latency is well
// above 11.3x the fast tier's at the same demand, write-heavy mixes collapse its
// capability, and both tiers diverge from their all-read curve only above a knee.
PerTier<TierSpec> build_defaults() {
    std::vector<SurfaceLine> fast_lines{
        line(0.0, {{0, 80, 0},
                   {10000, 88, 10000},
                   {20000, 104, 20000},
                   {26000, 150, 26000},
                   {30000, 330, 30000},
                   {36000, 600, 30000}}),
        line(0.5, {{0, 80, 0},
                   {10000, 87, 10000},
                   {20000, 100, 20000},
                   {30000, 130, 30000},
                   {34000, 290, 34000},
                   {40800, 520, 34000}}),
        line(0.667, {{0, 80, 0},
                     {10000, 86, 10000},
                     {20000, 98, 20000},
                     {30000, 120, 30000},
                     {33000, 170, 33000},
                     {36000, 260, 36000},
                     {43200, 470, 36000}}),
        line(1.0, {{0, 80, 0},
                   {10000, 85, 10000},
                   {20000, 95, 20000},
                   {30000, 110, 30000},
                   {36000, 140, 36000},
                   {40000, 220, 40000},
                   {48000, 400, 40000}}),
    };
    std::vector<SurfaceLine> slow_lines{
        line(0.0, {{0, 330, 0},
                   {1500, 390, 1500},
                   {3500, 950, 3500},
                   {7000, 3300, 3500},
                   {14000, 7200, 3500},
                   {24000, 12000, 3500}}),
        line(0.5, {{0, 315, 0},
                   {2000, 350, 2000},
                   {4500, 700, 4500},
                   {8000, 2400, 4500},
                   {16000, 5200, 4500},
                   {24000, 8000, 4500}}),
        line(0.667, {{0, 310, 0},
                     {3000, 340, 3000},
                     {6000, 600, 6000},
                     {9000, 1900, 6000},
                     {15000, 3600, 6000},
                     {24000, 6800, 6000}}),
        line(1.0, {{0, 300, 0},
                   {5000, 320, 5000},
                   {10000, 360, 10000},
                   {15000, 500, 15000},
                   {18000, 800, 18000},
                   {20000, 1500, 20000},
                   {24000, 2600, 20000}}),
    };

    PerTier<TierSpec> specs;
    specs.fast.capacity_pages = 8192;
    specs.fast.read_energy_nj = 1.0;
    specs.fast.write_energy_nj = 1.0;
    specs.fast.perf = TierPerformanceModel("fast", std::move(fast_lines), 30000);
    specs.slow.capacity_pages = 65536;
    specs.slow.read_energy_nj = 2.0;
    specs.slow.write_energy_nj = 6.0;
    specs.slow.perf = TierPerformanceModel("slow", std::move(slow_lines), 10000);
    return specs;
}

void validate_pair(const PerTier<TierSpec>& specs) {
    if (specs.fast.capacity_pages == 0 || specs.slow.capacity_pages == 0)
        throw ConfigError("calibration: zero tier capacity");
    if (specs.slow.capacity_pages < specs.fast.capacity_pages)
        throw ConfigError("calibration: slow tier smaller than fast tier");
    // Divergence above the knee must be strict for every write-bearing mix.
    for (TierId t : {TierId::Fast, TierId::Slow}) {
        const auto& perf = t == TierId::Fast ? specs.fast.perf : specs.slow.perf;
        double knee = perf.divergence_knee_mbps();
        double last = 0;
        for (const auto& l : perf.lines())
            last = std::max(last, l.anchors.back().demand_mbps);
        for (double d = knee; d <= last; d += (last - knee) / 8 + 1) {
            if (perf.evaluate(2.0 / 3.0, d).latency_ns <= perf.evaluate(1.0, d).latency_ns)
                throw ConfigError(std::string("calibration: ") + tier_name(t) +
                                  " mix latency does not diverge above knee");
        }
    }
}

} // namespace

PerTier<TierSpec> default_tier_specs() {
    static const PerTier<TierSpec> specs = [] {
        auto s = build_defaults();
        validate_pair(s);
        return s;
    }();
    return specs;
}

std::string write_calibration(const PerTier<TierSpec>& specs) {
    std::ostringstream os;
    os << "# tiersim calibration\n";
    os << "schema_version 1\n";
    for (TierId t : {TierId::Fast, TierId::Slow}) {
        const TierSpec& s = specs[t];
        os << "tier " << tier_name(t) << "\n";
        os << "capacity_pages " << s.capacity_pages << "\n";
        os << "read_energy_nj " << fmt_double_rt(s.read_energy_nj) << "\n";
        os << "write_energy_nj " << fmt_double_rt(s.write_energy_nj) << "\n";
        os << "divergence_knee_mbps " << fmt_double_rt(s.perf.divergence_knee_mbps()) << "\n";
        for (const auto& l : s.perf.lines()) {
            os << "line " << fmt_double_rt(l.read_fraction) << "\n";
            for (const auto& a : l.anchors)
                os << "anchor " << fmt_double_rt(a.demand_mbps) << " "
                   << fmt_double_rt(a.latency_ns) << " " << fmt_double_rt(a.achieved_mbps)
                   << "\n";
        }
    }
    return os.str();
}

std::string default_calibration_text() { return write_calibration(default_tier_specs()); }

PerTier<TierSpec> parse_calibration(const std::string& text, const std::string& origin) {
    struct RawTier {
        std::uint64_t capacity = 0;
        double re = 0, we = 0, knee = 0;
        std::vector<SurfaceLine> lines;
        bool seen = false;
    };
    RawTier raw[2];
    RawTier* cur = nullptr;
    SurfaceLine* cur_line = nullptr;
    bool versioned = false;

    std::istringstream is(text);
    std::string lntext;
    int lineno = 0;
    while (std::getline(is, lntext)) {
        ++lineno;
        auto where = origin + ":" + std::to_string(lineno);
        auto toks = split_ws(lntext);
        if (toks.empty() || toks[0][0] == '#') continue;
        const std::string& key = toks[0];
        if (key == "schema_version") {
            if (toks.size() != 2 || toks[1] != "1")
                throw ParseError(where + ": unsupported schema_version");
            versioned = true;
        } else if (key == "tier") {
            if (toks.size() != 2) throw ParseError(where + ": tier needs a name");
            if (toks[1] == "fast") cur = &raw[0];
            else if (toks[1] == "slow") cur = &raw[1];
            else throw ParseError(where + ": unknown tier '" + toks[1] + "'");
            cur->seen = true;
            cur_line = nullptr;
        } else if (!cur) {
            throw ParseError(where + ": '" + key + "' outside a tier section");
        } else if (key == "capacity_pages") {
            cur->capacity = parse_u64(toks.at(1), where);
        } else if (key == "read_energy_nj") {
            cur->re = parse_double(toks.at(1), where);
        } else if (key == "write_energy_nj") {
            cur->we = parse_double(toks.at(1), where);
        } else if (key == "divergence_knee_mbps") {
            cur->knee = parse_double(toks.at(1), where);
        } else if (key == "line") {
            cur->lines.push_back({parse_double(toks.at(1), where), {}});
            cur_line = &cur->lines.back();
        } else if (key == "anchor") {
            if (!cur_line) throw ParseError(where + ": anchor outside a line");
            if (toks.size() != 4) throw ParseError(where + ": anchor needs 3 numbers");
            cur_line->anchors.push_back({parse_double(toks[1], where),
                                         parse_double(toks[2], where),
                                         parse_double(toks[3], where)});
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
    if (!versioned) throw ParseError(origin + ": missing schema_version");
    if (!raw[0].seen || !raw[1].seen) throw ParseError(origin + ": both tiers required");

    PerTier<TierSpec> specs;
    for (TierId t : {TierId::Fast, TierId::Slow}) {
        RawTier& r = raw[int(t)];
        TierSpec& s = specs[t];
        s.capacity_pages = r.capacity;
        s.read_energy_nj = r.re;
        s.write_energy_nj = r.we;
        s.perf = TierPerformanceModel(tier_name(t), std::move(r.lines), r.knee);
    }
    validate_pair(specs);
    return specs;
}

PerTier<TierSpec> load_calibration_file(const std::string& path) {
    return parse_calibration(read_file(path), path);
}

PerTier<TierSpec> resolve_calibration(const std::string& nameOrPath) {
    if (nameOrPath.empty() || nameOrPath == "default") {
        if (const char* env = std::getenv("TIERSIM_CALIBRATION"); env && *env)
            return load_calibration_file(env);
        return default_tier_specs();
    }
    return load_calibration_file(nameOrPath);
}

std::string export_measurements_csv(const PerTier<TierSpec>& specs) {
    std::ostringstream os;
    os << "tier,read_fraction,demand_mbps,latency_ns,achieved_mbps\n";
    for (TierId t : {TierId::Fast, TierId::Slow})
        for (const auto& l : specs[t].perf.lines())
            for (const auto& a : l.anchors)
                os << tier_name(t) << "," << fmt_double(l.read_fraction, 10) << ","
                   << fmt_double(a.demand_mbps, 10) << "," << fmt_double(a.latency_ns, 10) << ","
                   << fmt_double(a.achieved_mbps, 10) << "\n";
    return os.str();
}

PerTier<TierSpec> calibrate_from_csv(const std::string& csv_text, const PerTier<TierSpec>& base) {
    struct Row {
        int number;
        double demand, latency, achieved;
    };
    // tier -> read_fraction -> rows
    std::map<int, std::map<double, std::vector<Row>>> grouped;

    std::istringstream is(csv_text);
    std::string lntext;
    int lineno = 0;
    while (std::getline(is, lntext)) {
        ++lineno;
        if (lntext.empty() || lntext[0] == '#') continue;
        if (lineno == 1 && lntext.find("tier,") == 0) continue; // header
        auto cols = split_char(lntext, ',');
        auto where = "measurements:" + std::to_string(lineno);
        if (cols.size() != 5) throw ParseError(where + ": expected 5 columns");
        int t;
        if (cols[0] == "fast") t = 0;
        else if (cols[0] == "slow") t = 1;
        else throw ParseError(where + ": unknown tier '" + cols[0] + "'");
        grouped[t][parse_double(cols[1], where)].push_back(
            {lineno, parse_double(cols[2], where), parse_double(cols[3], where),
             parse_double(cols[4], where)});
    }
    if (grouped.empty()) throw ParseError("measurements: no data rows");

    PerTier<TierSpec> out = base;
    for (TierId t : {TierId::Fast, TierId::Slow}) {
        auto it = grouped.find(int(t));
        if (it == grouped.end()) continue;
        std::vector<SurfaceLine> lines;
        for (auto& [rf, rows] : it->second) {
            std::sort(rows.begin(), rows.end(),
                      [](const Row& a, const Row& b) { return a.demand < b.demand; });
            SurfaceLine l;
            l.read_fraction = rf;
            std::string bad;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (i > 0 && (rows[i].latency < rows[i - 1].latency ||
                              rows[i].achieved < rows[i - 1].achieved)) {
                    if (!bad.empty()) bad += ", ";
                    bad += "row " + std::to_string(rows[i].number);
                }
                l.anchors.push_back({rows[i].demand, rows[i].latency, rows[i].achieved});
            }
            if (!bad.empty())
                throw ParseError(std::string("measurements: non-monotone anchors for ") +
                                 tier_name(t) + " read_fraction " + fmt_double(rf) + " (" + bad +
                                 ")");
            lines.push_back(std::move(l));
        }
        out[t].perf = TierPerformanceModel(tier_name(t), std::move(lines),
                                           base[t].perf.divergence_knee_mbps());
    }
    validate_pair(out);
    return out;
}

} // namespace tiersim
