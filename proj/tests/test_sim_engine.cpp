#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tiersim/calibration.hpp"
#include "tiersim/event_log.hpp"
#include "tiersim/sim_engine.hpp"
#include "tiersim/workload.hpp"

#include <cmath>

using namespace tiersim;

namespace {

constexpr double kEpoch = 0.0005;

SimConfig base_config(const std::string& policy, std::uint64_t horizon,
                      std::map<std::string, std::string> params = {}) {
    SimConfig cfg;
    cfg.horizon_epochs = horizon;
    cfg.epoch_s = kEpoch;
    cfg.seed = 11;
    cfg.tiers = default_tier_specs();
    cfg.policy = policy;
    cfg.policy_params = std::move(params);
    return cfg;
}

WorkloadSpec single_region(const std::string& name, std::uint64_t pages, double rf, double demand,
                           FootprintClass fp) {
    WorkloadSpec ws;
    ws.name = name;
    ws.footprint = fp;
    RegionSpec r;
    r.name = "r0";
    r.pages = pages;
    r.read_fraction = rf;
    r.demand_mbps = demand;
    ws.regions.push_back(r);
    return ws;
}

RunResult run(const WorkloadSpec& ws, const SimConfig& cfg) {
    SyntheticWorkload w(ws, cfg.seed, cfg.epoch_s);
    return run_simulation(cfg, w);
}

// offered = serviced + final backlog, counting both application and migration
// traffic; the per-epoch rows must agree with the same books.
void check_conservation(const RunResult& r, double epoch_s) {
    const double seconds = double(r.summary.epochs) * epoch_s;
    const double serviced_total_mb = r.summary.total_achieved_mbps * seconds;
    const double in = r.summary.app_offered_mb + r.summary.migration_mb;
    const double out = serviced_total_mb + r.summary.backlog_final_mb;
    CHECK(in == doctest::Approx(out).epsilon(1e-9).scale(1.0));

    // Per tier: offered this epoch = app traffic + migration + carried backlog,
    // and what is not serviced becomes the next epoch's carry.
    PerTier<double> carry{};
    for (const auto& row : r.epochs) {
        const double expect_offered = row.app_read_mbps + row.app_write_mbps +
                                      row.migration_mbps + carry[row.tier] / epoch_s;
        CHECK(row.offered_mbps == doctest::Approx(expect_offered).epsilon(1e-9).scale(1.0));
        // Serviced bytes are quantized to 64-byte lines per kind and pool, so
        // the rate identity is exact only to that granularity.
        const double left = (row.offered_mbps - row.achieved_mbps) * epoch_s;
        CHECK(std::fabs(row.backlog_mb - left) <= 1024.0 / kMB);
        CHECK(row.achieved_mbps <= row.offered_mbps * (1 + 1e-12) + 1e-9);
        carry[row.tier] = row.backlog_mb;
    }
    CHECK(carry.fast + carry.slow ==
          doctest::Approx(r.summary.backlog_final_mb).epsilon(1e-9).scale(1.0));
}

} // namespace

TEST_CASE("config validation") {
    SimConfig cfg = base_config("admdefault", 10);
    CHECK_NOTHROW(cfg.validate());
    cfg.horizon_epochs = 0; // a zero-length run is legal
    CHECK_NOTHROW(cfg.validate());

    SimConfig bad = base_config("admdefault", 10);
    bad.epoch_s = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = base_config("admdefault", 10);
    bad.tiers.fast.capacity_pages = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = base_config("mru", 10);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("zero-horizon run produces an empty series") {
    auto ws = single_region("empty", 100, 1.0, 500, FootprintClass::Small);
    auto res = run(ws, base_config("admdefault", 0));
    CHECK(res.epochs.empty());
    CHECK(res.summary.app_offered_mb == 0);
    CHECK(res.summary.achieved_mbps == 0);
    CHECK(res.summary.epochs == 0);
}

TEST_CASE("a workload larger than both tiers is rejected") {
    auto ws = single_region("huge", 8192 + 65536 + 1, 1.0, 10, FootprintClass::Large);
    CHECK_THROWS_AS(run(ws, base_config("admdefault", 10)), ConfigError);
}

TEST_CASE("same seed reproduces a run byte for byte; a different seed does not") {
    auto ws = npb_profile("ft", FootprintClass::Medium, 8192);
    auto cfg = base_config("hyplacer", 500);
    auto a = run(ws, cfg);
    auto b = run(ws, cfg);
    CHECK(metrics_csv(a) == metrics_csv(b));
    CHECK(region_csv(a) == region_csv(b));
    CHECK(a.event_log == b.event_log);
    CHECK(summary_csv_row(a.summary) == summary_csv_row(b.summary));

    cfg.seed = 12;
    auto c = run(ws, cfg);
    CHECK(metrics_csv(a) != metrics_csv(c));
}

TEST_CASE("small footprint under the fill-only policy lives entirely in fast") {
    auto ws = npb_profile("bt", FootprintClass::Small, 8192);
    auto res = run(ws, base_config("admdefault", 300));
    CHECK(res.summary.fast_used_final == ws.total_pages());
    CHECK(res.summary.slow_used_final == 0);
    CHECK(res.summary.migrated_pages == 0);
    // All traffic routes to the fast tier.
    for (const auto& row : res.epochs)
        if (row.tier == TierId::Slow) CHECK(row.app_read_mbps + row.app_write_mbps == 0);
}

TEST_CASE("work is conserved under light load, saturation, and heavy migration") {
    // Light: everything serviced, no backlog.
    auto light = run(single_region("light", 4000, 0.8, 900, FootprintClass::Small),
                     base_config("admdefault", 300));
    check_conservation(light, kEpoch);
    CHECK(light.summary.backlog_final_mb == doctest::Approx(0.0).scale(1.0));
    CHECK(light.summary.app_serviced_mb ==
          doctest::Approx(light.summary.app_offered_mb).epsilon(1e-9));

    // Saturated: sequential scans whose per-tier shares exceed both peaks
    // leave a standing backlog.
    auto sat_spec = single_region("sat", 12000, 1.0, 70000, FootprintClass::Medium);
    sat_spec.regions[0].pattern = AccessPattern::Sequential;
    auto hot = run(sat_spec, base_config("admdefault", 300));
    check_conservation(hot, kEpoch);
    CHECK(hot.summary.backlog_final_mb > 0);

    // Migration-heavy: the write-pressure loop exchanging a hot set.
    WorkloadSpec ws;
    ws.name = "mig";
    ws.footprint = FootprintClass::Medium;
    RegionSpec filler;
    filler.name = "filler";
    filler.pages = 9500;
    filler.read_fraction = 1.0;
    filler.demand_mbps = 0.0;
    ws.regions.push_back(filler);
    RegionSpec hotr;
    hotr.name = "hot";
    hotr.pages = 1000;
    hotr.read_fraction = 0.5;
    hotr.demand_mbps = 800.0;
    ws.regions.push_back(hotr);
    auto mig = run(ws, base_config("hyplacer", 700));
    CHECK(mig.summary.migration_mb > 0);
    check_conservation(mig, kEpoch);

    // Cache emulation: fills and write-backs on every miss.
    auto memm = run(npb_profile("bt", FootprintClass::Medium, 8192),
                    base_config("memm", 300));
    CHECK(memm.summary.migration_mb > 0);
    check_conservation(memm, kEpoch);
}

TEST_CASE("demand clamping is flagged on the summary and logged parseably") {
    auto ws = single_region("tiny", 4, 1.0, 100, FootprintClass::Small);
    auto res = run(ws, base_config("admdefault", 10));
    CHECK(res.summary.demand_clamped);
    auto warns = parse_event_log(res.event_log, "warn");
    REQUIRE(warns.size() == 1);
    const std::string& msg = warns[0].fields.at("message");
    CHECK(msg.find("clamped") != std::string::npos);
    CHECK(msg.find(' ') == std::string::npos); // stays one token

    // Every line the engine writes must be readable by its own parser.
    CHECK_NOTHROW(parse_event_log(res.event_log));
}

TEST_CASE("event line parsing") {
    Event ev = parse_event_line("migrate epoch=3 what=demote pages=5 dest=slow");
    CHECK(ev.kind == "migrate");
    CHECK(ev.epoch == 3);
    CHECK(ev.fields.at("pages") == "5");
    CHECK(ev.fields.at("dest") == "slow");
    CHECK_THROWS_AS(parse_event_line(""), ParseError);
    CHECK_THROWS_AS(parse_event_line("migrate epoch=3 badtoken"), ParseError);
    CHECK_THROWS_AS(parse_event_line("migrate =3"), ParseError);

    EventLog log;
    log.record("warn", 2).field("message", std::string("two words\tand a tab"));
    Event w = parse_event_line(log.text().substr(0, log.text().size() - 1));
    CHECK(w.fields.at("message") == "two_words_and_a_tab");
}

TEST_CASE("geometric mean") {
    CHECK(geomean({2.0, 8.0}) == doctest::Approx(4.0));
    CHECK(geomean({5.0}) == doctest::Approx(5.0));
    CHECK(geomean({1.0, 1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(geomean({}) == 0.0);
    CHECK(geomean({2.0, 0.0}) == 0.0);
    CHECK(geomean({2.0, -1.0}) == 0.0);
}

TEST_CASE("rank correlation") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
    // Monotone in the ranks even when wildly nonlinear in the values.
    CHECK(spearman({1, 2, 3, 4}, {1, 100, 10000, 1000000}) == doctest::Approx(1.0));
    // Hand-ranked tie case: xs ranks {1, 2.5, 2.5, 4}, ys ranks {1, 2, 3, 4};
    // Pearson over those ranks is 4.5 / sqrt(4.5 * 5) ~ 0.94868.
    CHECK(spearman({1, 2, 2, 3}, {1, 2, 3, 4}) ==
          doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)));
    CHECK(std::isnan(spearman({1}, {2})));
    CHECK(std::isnan(spearman({1, 2}, {3})));      // length mismatch
    CHECK(std::isnan(spearman({5, 5, 5}, {1, 2, 3}))); // no rank variance
}

TEST_CASE("comparison table computes per-cell speedups and per-policy geomeans") {
    auto mk = [](std::string wl, std::uint64_t seed, std::string pol, double mbps, double j) {
        RunSummary s;
        s.workload = std::move(wl);
        s.seed = seed;
        s.policy = std::move(pol);
        s.achieved_mbps = mbps;
        s.energy_j = j;
        return s;
    };
    std::vector<RunSummary> runs = {
        mk("a", 1, "admdefault", 100, 2.0), mk("a", 1, "hyplacer", 120, 1.0),
        mk("b", 1, "admdefault", 200, 4.0), mk("b", 1, "hyplacer", 360, 2.0),
    };
    auto t = build_comparison(runs, "admdefault");
    REQUIRE(t.rows.size() == 2); // baseline rows excluded
    CHECK(t.rows[0].speedup == doctest::Approx(1.2));
    CHECK(t.rows[1].speedup == doctest::Approx(1.8));
    CHECK(t.rows[0].energy_ratio == doctest::Approx(0.5));
    CHECK(t.geomean_speedup.at("hyplacer") == doctest::Approx(std::sqrt(1.2 * 1.8)));
    CHECK(t.geomean_energy.at("hyplacer") == doctest::Approx(0.5));

    // A cell without its baseline is a configuration error, not a silent skip.
    runs.push_back(mk("c", 7, "hyplacer", 50, 1.0));
    CHECK_THROWS_AS(build_comparison(runs, "admdefault"), ConfigError);
    CHECK_THROWS_AS(build_comparison(runs, "nosuch"), ConfigError);
}

TEST_CASE("csv output is stable") {
    CHECK(summary_csv_header() ==
          "run_id,workload,policy,seed,epochs,epoch_s,app_offered_mb,app_serviced_mb,"
          "achieved_mbps,total_achieved_mbps,mean_latency_ns,energy_j,migrated_pages,"
          "migration_mb,fast_used_final,slow_used_final,backlog_final_mb,demand_clamped\n");

    RunSummary s;
    s.run_id = "w_p_s1";
    s.workload = "w";
    s.policy = "p";
    s.seed = 1;
    s.epochs = 10;
    s.epoch_s = 0.0005;
    s.app_offered_mb = 12.5;
    s.app_serviced_mb = 12.5;
    s.achieved_mbps = 2500;
    s.total_achieved_mbps = 2500;
    s.mean_latency_ns = 85.25;
    s.energy_j = 0.125;
    s.migrated_pages = 7;
    s.migration_mb = 0.5;
    s.fast_used_final = 4096;
    s.slow_used_final = 64;
    s.backlog_final_mb = 0;
    s.demand_clamped = true;
    CHECK(summary_csv_row(s) ==
          "w_p_s1,w,p,1,10,0.0005,12.5,12.5,2500,2500,85.25,0.125,7,0.5,4096,64,0,1\n");

    RunResult r;
    EpochTierRow row;
    row.epoch = 3;
    row.tier = TierId::Fast;
    row.offered_mbps = 100;
    row.achieved_mbps = 90;
    row.latency_ns = 250.5;
    row.app_read_mbps = 60;
    row.app_write_mbps = 40;
    row.app_achieved_mbps = 85;
    row.migration_mbps = 5;
    row.backlog_mb = 0.05;
    row.energy_mj = 1.25;
    row.used_pages = 4096;
    r.epochs.push_back(row);
    CHECK(metrics_csv(r) ==
          "epoch,tier,offered_mbps,achieved_mbps,latency_ns,app_read_mbps,app_write_mbps,"
          "app_achieved_mbps,migration_mbps,backlog_mb,energy_mj,used_pages\n"
          "3,fast,100,90,250.5,60,40,85,5,0.05,1.25,4096\n");

    RegionRow reg;
    reg.region = "hot";
    reg.pages = 512;
    reg.routed_mb = 10;
    reg.serviced_mb = 9.5;
    reg.mean_latency_ns = 300;
    reg.peak_achieved_mbps = 1200;
    reg.fast_byte_share = 0.75;
    r.regions.push_back(reg);
    CHECK(region_csv(r) ==
          "region,pages,routed_mb,serviced_mb,mean_latency_ns,peak_achieved_mbps,"
          "fast_byte_share\n"
          "hot,512,10,9.5,300,1200,0.75\n");

    ComparisonTable t;
    ComparisonRow cr;
    cr.workload = "w";
    cr.seed = 2;
    cr.policy = "p";
    cr.achieved_mbps = 120;
    cr.baseline_mbps = 100;
    cr.speedup = 1.2;
    cr.energy_j = 1;
    cr.baseline_energy_j = 2;
    cr.energy_ratio = 0.5;
    t.rows.push_back(cr);
    t.geomean_speedup["p"] = 1.2;
    t.geomean_energy["p"] = 0.5;
    CHECK(comparison_csv(t) ==
          "workload,seed,policy,achieved_mbps,baseline_mbps,speedup,energy_j,"
          "baseline_energy_j,energy_ratio\n"
          "w,2,p,120,100,1.2,1,2,0.5\n"
          "GEOMEAN,0,p,0,0,1.2,0,0,0.5\n");

    // One cell per policy: the correlation is undefined, not fabricated.
    CHECK(correlation_csv(t) == "policy,cells,spearman_speedup_energy\np,1,nan\n");
}

TEST_CASE("per-region attribution separates hot and cold traffic") {
    WorkloadSpec ws;
    ws.name = "split";
    ws.footprint = FootprintClass::Small;
    RegionSpec a;
    a.name = "busy";
    a.pages = 2000;
    a.read_fraction = 1.0;
    a.demand_mbps = 1000;
    a.pattern = AccessPattern::Sequential; // distinct pages every epoch: exact volume
    ws.regions.push_back(a);
    RegionSpec b;
    b.name = "idle";
    b.pages = 2000;
    b.read_fraction = 1.0;
    b.demand_mbps = 0;
    ws.regions.push_back(b);

    auto res = run(ws, base_config("admdefault", 200));
    REQUIRE(res.regions.size() == 2);
    CHECK(res.regions[0].region == "busy");
    CHECK(res.regions[1].region == "idle");
    CHECK(res.regions[0].routed_mb > 0);
    CHECK(res.regions[1].routed_mb == 0);
    // Everything fits in fast, so the busy region's bytes all hit fast and the
    // run services them completely.
    CHECK(res.regions[0].fast_byte_share == doctest::Approx(1.0));
    CHECK(res.regions[0].serviced_mb == doctest::Approx(res.regions[0].routed_mb));
    // 1000 MB/s for 200 epochs of 0.5 ms is 100 MB, and 128 whole pages per
    // epoch divides evenly, so the routed volume is exact.
    CHECK(res.regions[0].routed_mb == doctest::Approx(100.0).epsilon(1e-9));
}
