#include "tiersim/sim_engine.hpp"

#include "tiersim/text_util.hpp"

#include <algorithm>
#include <cmath>

namespace tiersim {

void SimConfig::validate() const {
    if (epoch_s <= 0) throw ConfigError("epoch length must be positive");
    if (tiers.fast.capacity_pages == 0 || tiers.slow.capacity_pages == 0)
        throw ConfigError("tier capacities must be positive");
    const auto& names = policy_names();
    if (std::find(names.begin(), names.end(), policy) == names.end())
        throw ConfigError("unknown policy '" + policy + "'");
}

namespace {

struct Pools {
    Traffic app;
    Traffic mig;
};

// Pro-rata split of serviced bytes between the application and migration
// pools, 64B-granular, byte-conserving: serviced == app_out + mig_out exactly
// and neither share exceeds what its pool offered.
std::uint64_t migration_share(std::uint64_t serviced, std::uint64_t app_offered,
                              std::uint64_t mig_offered) {
    const std::uint64_t total = app_offered + mig_offered;
    if (total == 0 || mig_offered == 0) return 0;
    std::uint64_t mig = std::uint64_t(double(serviced) * (double(mig_offered) / double(total)));
    mig -= mig % kLineBytes;
    const std::uint64_t lo = serviced > app_offered ? serviced - app_offered : 0;
    mig = std::max(mig, lo);
    mig = std::min({mig, mig_offered, serviced});
    return mig;
}

} // namespace

RunResult run_simulation(const SimConfig& cfg, const Workload& workload) {
    cfg.validate();
    const TierModel tiers(cfg.tiers);
    PageSystem ps({cfg.tiers.fast.capacity_pages, cfg.tiers.slow.capacity_pages});
    PageSelector selector(ps);
    BandwidthMonitor monitor(cfg.epoch_s);
    RunResult result;
    EventLog log;
    auto policy = make_policy(cfg.policy, cfg.policy_params, tiers);

    const std::uint64_t total_capacity =
        cfg.tiers.fast.capacity_pages + cfg.tiers.slow.capacity_pages;
    if (workload.declared_pages() > total_capacity)
        throw ConfigError("workload '" + workload.name() + "' spans " +
                          std::to_string(workload.declared_pages()) +
                          " pages but the machine holds only " + std::to_string(total_capacity));

    bool clamped = false;
    if (const auto* syn = dynamic_cast<const SyntheticWorkload*>(&workload)) {
        for (const auto& w : syn->demand_warnings()) {
            log.record("warn", 0).field("message", w);
            clamped = true;
        }
    }

    // First-touch placement for prefaulted regions, in declaration order, with
    // the policy's hint; this is the layout a run starts from.
    ps.set_epoch(0);
    std::uint64_t prefaulted = 0;
    for (const auto& lay : workload.layouts()) {
        if (!lay.prefault) continue;
        const AccessKind kind = lay.write_first ? AccessKind::Write : AccessKind::Read;
        for (std::uint64_t i = 0; i < lay.pages; ++i) {
            const PageId id = make_page_id(lay.pid, lay.first_vpage + i);
            ps.allocate(lay.pid, lay.first_vpage + i, policy->allocation_hint(id, kind), kind);
            ++prefaulted;
        }
    }
    if (prefaulted) log.record("prefault", 0).field("pages", prefaulted);

    const std::size_t nregions = workload.layouts().size();
    std::vector<double> region_routed(nregions + 1, 0), region_fast(nregions + 1, 0),
        region_lat_num(nregions + 1, 0), region_served(nregions + 1, 0),
        region_peak(nregions + 1, 0);

    PerTier<Pools> backlog{};
    double lat_weight_sum = 0, lat_weighted = 0;
    double app_offered_bytes = 0, app_served_bytes_total = 0, total_served_bytes = 0;
    double mig_bytes_total = 0, energy_nj_total = 0;

    std::vector<double> reg_epoch_bytes((nregions + 1) * 2, 0);
    for (std::uint64_t e = 0; e < cfg.horizon_epochs; ++e) {
        ps.set_epoch(e);
        const SimMs now = SimMs(double(e) * cfg.epoch_s * 1000.0);
        PerTier<Traffic> mig_new{};
        PolicyContext ctx(ps, selector, tiers, monitor, log, e, now, cfg.epoch_s, mig_new);
        policy->on_epoch_begin(ctx);

        AccessBatch batch = workload.generate(e);
        for (const auto& a : batch.entries) {
            if (ps.exists(a.page)) continue;
            const AccessKind kind = a.writes > 0 ? AccessKind::Write : AccessKind::Read;
            ps.allocate(page_pid(a.page), page_vpage(a.page),
                        policy->allocation_hint(a.page, kind), kind);
        }
        policy->pre_apply(ctx, batch);
        const PerTier<Traffic> routed = ps.apply_access_batch(batch);
        monitor.record_epoch(routed);

        std::fill(reg_epoch_bytes.begin(), reg_epoch_bytes.end(), 0.0);
        for (const auto& a : batch.entries) {
            const TierId t = ps.page(a.page).tier;
            const double bytes =
                double((a.reads ? kPageBytes : 0) + (a.writes ? kPageBytes : 0));
            int r = workload.region_of(a.page);
            if (r < 0) r = int(nregions);
            region_routed[r] += bytes;
            if (t == TierId::Fast) region_fast[r] += bytes;
            reg_epoch_bytes[std::size_t(r) * 2 + std::size_t(t)] += bytes;
        }

        PerTier<double> tier_lat{}, tier_app_served{}, tier_app_routed{};
        for (TierId t : {TierId::Fast, TierId::Slow}) {
            Pools& pool = backlog[t];
            pool.app += routed[t];
            pool.mig += mig_new[t];
            const Traffic offered{pool.app.read_bytes + pool.mig.read_bytes,
                                  pool.app.write_bytes + pool.mig.write_bytes};
            const ServiceResult svc = tiers.service_epoch(t, offered, cfg.epoch_s);

            const std::uint64_t mig_r = migration_share(svc.serviced.read_bytes,
                                                        pool.app.read_bytes, pool.mig.read_bytes);
            const std::uint64_t mig_w = migration_share(
                svc.serviced.write_bytes, pool.app.write_bytes, pool.mig.write_bytes);
            const std::uint64_t app_r = svc.serviced.read_bytes - mig_r;
            const std::uint64_t app_w = svc.serviced.write_bytes - mig_w;
            pool.app.read_bytes -= app_r;
            pool.app.write_bytes -= app_w;
            pool.mig.read_bytes -= mig_r;
            pool.mig.write_bytes -= mig_w;

            const double to_mbps = 1.0 / (kMB * cfg.epoch_s);
            EpochTierRow row;
            row.epoch = e;
            row.tier = t;
            row.offered_mbps = svc.offered_mbps;
            row.achieved_mbps = svc.achieved_mbps;
            row.latency_ns = svc.mean_latency_ns;
            row.app_read_mbps = double(routed[t].read_bytes) * to_mbps;
            row.app_write_mbps = double(routed[t].write_bytes) * to_mbps;
            row.app_achieved_mbps = double(app_r + app_w) * to_mbps;
            row.migration_mbps = double(mig_new[t].total()) * to_mbps;
            row.backlog_mb = double(pool.app.total() + pool.mig.total()) / kMB;
            row.energy_mj = svc.energy_nj * 1e-6;
            row.used_pages = ps.resident_pages(t);
            result.epochs.push_back(row);

            tier_lat[t] = svc.mean_latency_ns;
            tier_app_served[t] = double(app_r + app_w);
            tier_app_routed[t] = double(routed[t].total());
            app_offered_bytes += double(routed[t].total());
            app_served_bytes_total += double(app_r + app_w);
            total_served_bytes += double(svc.serviced.total());
            mig_bytes_total += double(mig_new[t].total());
            energy_nj_total += svc.energy_nj;
            lat_weighted += svc.mean_latency_ns * double(app_r + app_w);
            lat_weight_sum += double(app_r + app_w);
        }

        for (std::size_t r = 0; r <= nregions; ++r) {
            double served_rate = 0;
            for (TierId t : {TierId::Fast, TierId::Slow}) {
                const double b = reg_epoch_bytes[r * 2 + std::size_t(t)];
                if (b <= 0) continue;
                region_lat_num[r] += b * tier_lat[t];
                if (tier_app_routed[t] > 0) {
                    const double served = tier_app_served[t] * (b / tier_app_routed[t]);
                    region_served[r] += served;
                    served_rate += served / (kMB * cfg.epoch_s);
                }
            }
            region_peak[r] = std::max(region_peak[r], served_rate);
        }
    }

    RunSummary& s = result.summary;
    s.run_id = cfg.run_id.empty() ? workload.name() + "_" + cfg.policy : cfg.run_id;
    s.workload = workload.name();
    s.policy = cfg.policy;
    s.seed = cfg.seed;
    s.epochs = cfg.horizon_epochs;
    s.epoch_s = cfg.epoch_s;
    s.app_offered_mb = app_offered_bytes / kMB;
    s.app_serviced_mb = app_served_bytes_total / kMB;
    const double seconds = double(cfg.horizon_epochs) * cfg.epoch_s;
    s.achieved_mbps = seconds > 0 ? s.app_serviced_mb / seconds : 0;
    s.total_achieved_mbps = seconds > 0 ? total_served_bytes / kMB / seconds : 0;
    s.mean_latency_ns = lat_weight_sum > 0 ? lat_weighted / lat_weight_sum : 0;
    s.energy_j = energy_nj_total * 1e-9;
    s.migrated_pages = ps.migrated_pages();
    s.migration_mb = mig_bytes_total / kMB;
    const TierOccupancy occ = ps.occupancy();
    s.fast_used_final = occ.fast.used_pages;
    s.slow_used_final = occ.slow.used_pages;
    s.backlog_final_mb = (double(backlog.fast.app.total() + backlog.fast.mig.total()) +
                          double(backlog.slow.app.total() + backlog.slow.mig.total())) /
                         kMB;
    s.demand_clamped = clamped;

    for (std::size_t r = 0; r <= nregions; ++r) {
        if (r == nregions && region_routed[r] == 0) continue;
        RegionRow row;
        row.region = r < nregions ? workload.layouts()[r].name : "(unattributed)";
        row.pages = r < nregions ? workload.layouts()[r].pages : 0;
        row.routed_mb = region_routed[r] / kMB;
        row.serviced_mb = region_served[r] / kMB;
        row.mean_latency_ns = region_routed[r] > 0 ? region_lat_num[r] / region_routed[r] : 0;
        row.peak_achieved_mbps = region_peak[r];
        row.fast_byte_share = region_routed[r] > 0 ? region_fast[r] / region_routed[r] : 0;
        result.regions.push_back(row);
    }
    result.event_log = log.text();
    return result;
}

std::string metrics_csv(const RunResult& r) {
    std::string out = "epoch,tier,offered_mbps,achieved_mbps,latency_ns,app_read_mbps,"
                      "app_write_mbps,app_achieved_mbps,migration_mbps,backlog_mb,energy_mj,"
                      "used_pages\n";
    for (const auto& row : r.epochs) {
        out += std::to_string(row.epoch);
        out += ',';
        out += tier_name(row.tier);
        out += ',';
        out += fmt_double(row.offered_mbps, 8) + ',' + fmt_double(row.achieved_mbps, 8) + ',' +
               fmt_double(row.latency_ns, 8) + ',' + fmt_double(row.app_read_mbps, 8) + ',' +
               fmt_double(row.app_write_mbps, 8) + ',' + fmt_double(row.app_achieved_mbps, 8) +
               ',' + fmt_double(row.migration_mbps, 8) + ',' + fmt_double(row.backlog_mb, 8) +
               ',' + fmt_double(row.energy_mj, 8) + ',' + std::to_string(row.used_pages) + '\n';
    }
    return out;
}

std::string region_csv(const RunResult& r) {
    std::string out =
        "region,pages,routed_mb,serviced_mb,mean_latency_ns,peak_achieved_mbps,fast_byte_share\n";
    for (const auto& row : r.regions) {
        out += row.region + ',' + std::to_string(row.pages) + ',' + fmt_double(row.routed_mb, 8) +
               ',' + fmt_double(row.serviced_mb, 8) + ',' + fmt_double(row.mean_latency_ns, 8) +
               ',' + fmt_double(row.peak_achieved_mbps, 8) + ',' +
               fmt_double(row.fast_byte_share, 8) + '\n';
    }
    return out;
}

std::string summary_csv_header() {
    return "run_id,workload,policy,seed,epochs,epoch_s,app_offered_mb,app_serviced_mb,"
           "achieved_mbps,total_achieved_mbps,mean_latency_ns,energy_j,migrated_pages,"
           "migration_mb,fast_used_final,slow_used_final,backlog_final_mb,demand_clamped\n";
}

std::string summary_csv_row(const RunSummary& s) {
    return s.run_id + ',' + s.workload + ',' + s.policy + ',' + std::to_string(s.seed) + ',' +
           std::to_string(s.epochs) + ',' + fmt_double(s.epoch_s, 8) + ',' +
           fmt_double(s.app_offered_mb, 8) + ',' + fmt_double(s.app_serviced_mb, 8) + ',' +
           fmt_double(s.achieved_mbps, 8) + ',' + fmt_double(s.total_achieved_mbps, 8) + ',' +
           fmt_double(s.mean_latency_ns, 8) + ',' + fmt_double(s.energy_j, 8) + ',' +
           std::to_string(s.migrated_pages) + ',' + fmt_double(s.migration_mb, 8) + ',' +
           std::to_string(s.fast_used_final) + ',' + std::to_string(s.slow_used_final) + ',' +
           fmt_double(s.backlog_final_mb, 8) + ',' + (s.demand_clamped ? "1" : "0") + '\n';
}

double geomean(const std::vector<double>& xs) {
    if (xs.empty()) return 0;
    double acc = 0;
    for (double x : xs) {
        if (x <= 0) return 0;
        acc += std::log(x);
    }
    return std::exp(acc / double(xs.size()));
}

namespace {

std::vector<double> ranks_of(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> rank(n, 0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double mean_rank = (double(i) + double(j)) / 2.0 + 1.0; // ties share the mean rank
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = mean_rank;
        i = j + 1;
    }
    return rank;
}

} // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) return std::nan("");
    const auto rx = ranks_of(xs), ry = ranks_of(ys);
    const double n = double(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0 || dy == 0) return std::nan("");
    return num / std::sqrt(dx * dy);
}

ComparisonTable build_comparison(const std::vector<RunSummary>& runs,
                                 const std::string& baseline_policy) {
    ComparisonTable t;
    std::map<std::pair<std::string, std::uint64_t>, const RunSummary*> baseline;
    for (const auto& r : runs)
        if (r.policy == baseline_policy) baseline[{r.workload, r.seed}] = &r;
    std::map<std::string, std::vector<double>> sp, en;
    for (const auto& r : runs) {
        if (r.policy == baseline_policy) continue;
        auto it = baseline.find({r.workload, r.seed});
        if (it == baseline.end())
            throw ConfigError("no '" + baseline_policy + "' baseline run for workload '" +
                              r.workload + "' seed " + std::to_string(r.seed));
        const RunSummary& b = *it->second;
        ComparisonRow row;
        row.workload = r.workload;
        row.seed = r.seed;
        row.policy = r.policy;
        row.achieved_mbps = r.achieved_mbps;
        row.baseline_mbps = b.achieved_mbps;
        row.speedup = b.achieved_mbps > 0 ? r.achieved_mbps / b.achieved_mbps : 0;
        row.energy_j = r.energy_j;
        row.baseline_energy_j = b.energy_j;
        row.energy_ratio = b.energy_j > 0 ? r.energy_j / b.energy_j : 0;
        sp[row.policy].push_back(row.speedup);
        en[row.policy].push_back(row.energy_ratio);
        t.rows.push_back(row);
    }
    for (const auto& [policy, xs] : sp) {
        t.geomean_speedup[policy] = geomean(xs);
        t.geomean_energy[policy] = geomean(en[policy]);
    }
    return t;
}

std::string comparison_csv(const ComparisonTable& t) {
    std::string out = "workload,seed,policy,achieved_mbps,baseline_mbps,speedup,energy_j,"
                      "baseline_energy_j,energy_ratio\n";
    for (const auto& r : t.rows) {
        out += r.workload + ',' + std::to_string(r.seed) + ',' + r.policy + ',' +
               fmt_double(r.achieved_mbps, 8) + ',' + fmt_double(r.baseline_mbps, 8) + ',' +
               fmt_double(r.speedup, 8) + ',' + fmt_double(r.energy_j, 8) + ',' +
               fmt_double(r.baseline_energy_j, 8) + ',' + fmt_double(r.energy_ratio, 8) + '\n';
    }
    for (const auto& [policy, g] : t.geomean_speedup) {
        out += "GEOMEAN,0," + policy + ",0,0," + fmt_double(g, 8) + ",0,0," +
               fmt_double(t.geomean_energy.at(policy), 8) + '\n';
    }
    return out;
}

std::string correlation_csv(const ComparisonTable& t) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_policy;
    for (const auto& r : t.rows) {
        by_policy[r.policy].first.push_back(r.speedup);
        by_policy[r.policy].second.push_back(r.energy_ratio);
    }
    std::string out = "policy,cells,spearman_speedup_energy\n";
    for (const auto& [policy, v] : by_policy) {
        out += policy + ',' + std::to_string(v.first.size()) + ',' +
               fmt_double(spearman(v.first, v.second), 6) + '\n';
    }
    return out;
}

} // namespace tiersim
