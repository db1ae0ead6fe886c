#include "tiersim/experiment.hpp"

#include "tiersim/calibration.hpp"
#include "tiersim/policies.hpp"
#include "tiersim/text_util.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace tiersim {

void ExperimentSpec::validate() const {
    if (workloads.empty()) throw ConfigError("experiment '" + name + "' lists no workloads");
    if (seeds.empty()) throw ConfigError("experiment '" + name + "' lists no seeds");
    if (epoch_s <= 0) throw ConfigError("epoch length must be positive");
    if (type == Type::Matrix) {
        if (policies.empty()) throw ConfigError("matrix experiment '" + name + "' lists no policies");
        // Catch bad policy names here so a dry run rejects them too, instead of
        // the first worker thread finding out mid-run.
        const auto& known = policy_names();
        for (const auto& p : policies)
            if (std::find(known.begin(), known.end(), p.name) == known.end())
                throw ConfigError("unknown policy '" + p.name + "' in experiment '" + name + "'");
        std::vector<std::string> labels;
        for (const auto& p : policies) labels.push_back(p.label);
        std::sort(labels.begin(), labels.end());
        if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
            throw ConfigError("experiment '" + name + "' repeats a policy configuration");
    } else {
        if (fast_shares.empty())
            throw ConfigError("sweep experiment '" + name + "' lists no ratios");
        bool has_all_fast = false;
        for (double s : fast_shares) {
            if (s < 0 || s > 1) throw ConfigError("fast share outside [0, 1]");
            if (std::abs(s - 1.0) < 1e-9) has_all_fast = true;
        }
        if (!has_all_fast)
            throw ConfigError("ratio sweep must include 100 (the all-fast reference point)");
    }
    if (horizon == 0)
        for (const auto& w : workloads)
            if (w.kind != WorkloadRef::Kind::Trace)
                throw ConfigError("horizon 0 is only meaningful for trace replay");
}

namespace {

std::string policy_label(const ExperimentSpec::PolicyRef& p) {
    if (p.params.empty()) return p.name;
    std::string label = p.name;
    for (const auto& [k, v] : p.params) label += ":" + k + "=" + v;
    return label;
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (auto& c : out)
        if (!std::isalnum((unsigned char)c) && c != '.' && c != '_' && c != '-') c = '-';
    return out;
}

std::string resolve_path(const std::string& origin, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute()) return path;
    fs::path base = fs::path(origin).parent_path();
    return (base / p).string();
}

} // namespace

ExperimentSpec parse_experiment(const std::string& text, const std::string& origin) {
    ExperimentSpec spec;
    spec.seeds.clear();
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
        const std::string& d = tok[0];
        if (d == "schema_version") {
            if (tok.size() != 2 || tok[1] != "1") fail("unsupported experiment schema version");
            saw_version = true;
        } else if (d == "name") {
            if (tok.size() != 2) fail("expected: name <id>");
            spec.name = tok[1];
        } else if (d == "type") {
            if (tok.size() != 2) fail("expected: type matrix|sweep_ratio");
            if (tok[1] == "matrix")
                spec.type = ExperimentSpec::Type::Matrix;
            else if (tok[1] == "sweep_ratio")
                spec.type = ExperimentSpec::Type::SweepRatio;
            else
                fail("unknown experiment type '" + tok[1] + "'");
        } else if (d == "calibration") {
            if (tok.size() != 2) fail("expected: calibration default|<path>");
            spec.calibration =
                tok[1] == "default" ? tok[1] : resolve_path(origin, tok[1]);
        } else if (d == "epoch_s") {
            if (tok.size() != 2) fail("expected: epoch_s <seconds>");
            spec.epoch_s = parse_double(tok[1], origin);
        } else if (d == "horizon") {
            if (tok.size() != 2) fail("expected: horizon <epochs>");
            spec.horizon = parse_u64(tok[1], origin);
        } else if (d == "seeds") {
            if (tok.size() < 2) fail("expected: seeds <s1> [s2 ...]");
            for (std::size_t i = 1; i < tok.size(); ++i)
                spec.seeds.push_back(parse_u64(tok[i], origin));
        } else if (d == "baseline") {
            if (tok.size() != 2) fail("expected: baseline <policy>");
            spec.baseline = tok[1];
        } else if (d == "workload") {
            if (tok.size() != 2) fail("expected: workload npb:<app>:<class>|file:<path>|trace:<path>");
            auto parts = split_char(tok[1], ':');
            ExperimentSpec::WorkloadRef ref;
            if (parts[0] == "npb") {
                if (parts.size() != 3) fail("expected: workload npb:<app>:<class>");
                ref.kind = ExperimentSpec::WorkloadRef::Kind::Npb;
                ref.app = parts[1];
                try {
                    ref.footprint = footprint_from_name(parts[2]);
                } catch (const ConfigError& e) {
                    fail(e.what());
                }
            } else if (parts[0] == "file" || parts[0] == "trace") {
                if (parts.size() != 2) fail("expected: workload " + parts[0] + ":<path>");
                ref.kind = parts[0] == "file" ? ExperimentSpec::WorkloadRef::Kind::File
                                              : ExperimentSpec::WorkloadRef::Kind::Trace;
                ref.path = resolve_path(origin, parts[1]);
            } else {
                fail("unknown workload source '" + parts[0] + "'");
            }
            spec.workloads.push_back(std::move(ref));
        } else if (d == "policy") {
            if (tok.size() < 2) fail("expected: policy <name> [key=value ...]");
            ExperimentSpec::PolicyRef p;
            p.name = tok[1];
            if (tok.size() > 2) p.params = parse_kv(tok, 2, origin + ":" + std::to_string(lineno)).kv;
            p.label = policy_label(p);
            spec.policies.push_back(std::move(p));
        } else if (d == "ratios") {
            if (tok.size() < 2) fail("expected: ratios <fast-share-percent ...>");
            for (std::size_t i = 1; i < tok.size(); ++i)
                spec.fast_shares.push_back(parse_double(tok[i], origin) / 100.0);
        } else {
            fail("unknown directive '" + d + "'");
        }
    }
    if (!saw_version) throw ParseError(origin + ": missing schema_version");
    if (spec.seeds.empty()) spec.seeds = {1};
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_file(const std::string& path) {
    return parse_experiment(read_file(path), path);
}

std::unique_ptr<Workload> materialize_workload(const ExperimentSpec::WorkloadRef& ref,
                                               std::uint64_t seed, double epoch_s,
                                               std::uint64_t fast_capacity_pages) {
    using Kind = ExperimentSpec::WorkloadRef::Kind;
    switch (ref.kind) {
    case Kind::Npb: {
        WorkloadSpec spec = npb_profile(ref.app, ref.footprint, fast_capacity_pages);
        validate_footprint(spec, fast_capacity_pages);
        return std::make_unique<SyntheticWorkload>(std::move(spec), seed, epoch_s);
    }
    case Kind::File: {
        WorkloadSpec spec = parse_workload(read_file(ref.path), ref.path, fast_capacity_pages);
        validate_footprint(spec, fast_capacity_pages);
        return std::make_unique<SyntheticWorkload>(std::move(spec), seed, epoch_s);
    }
    case Kind::Trace: {
        auto trace = parse_trace(read_file(ref.path), ref.path);
        if (std::abs(trace->epoch_s() - epoch_s) > 1e-12 * std::max(1.0, epoch_s))
            throw ConfigError("trace '" + ref.path + "' was recorded at " +
                              fmt_double(trace->epoch_s(), 8) + " s epochs but the experiment runs " +
                              fmt_double(epoch_s, 8) + " s epochs");
        return trace;
    }
    }
    throw ConfigError("unreachable workload kind");
}

std::size_t pick_best_ratio(const std::vector<SweepRow>& rows, double tie_margin) {
    if (rows.empty()) throw ConfigError("empty ratio sweep");
    double best = 0;
    for (const auto& r : rows) best = std::max(best, r.achieved_mbps);
    std::size_t pick = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.achieved_mbps < best * (1.0 - tie_margin)) continue;
        if (pick == rows.size()) {
            pick = i;
            continue;
        }
        const auto& p = rows[pick];
        if (r.mean_latency_ns < p.mean_latency_ns ||
            (r.mean_latency_ns == p.mean_latency_ns && r.fast_share > p.fast_share))
            pick = i;
    }
    return pick;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "workload,seed,fast_share,achieved_mbps,mean_latency_ns,energy_j,gain_vs_allfast,best\n";
    for (const auto& r : rows) {
        out += r.workload + ',' + std::to_string(r.seed) + ',' + fmt_double(r.fast_share, 4) +
               ',' + fmt_double(r.achieved_mbps, 8) + ',' + fmt_double(r.mean_latency_ns, 8) +
               ',' + fmt_double(r.energy_j, 8) + ',' + fmt_double(r.gain, 8) + ',' +
               (r.best ? "1" : "0") + '\n';
    }
    return out;
}

namespace {

struct Cell {
    ExperimentSpec::WorkloadRef workload;
    std::string policy_name;
    std::map<std::string, std::string> policy_params;
    std::string policy_label;
    std::uint64_t seed = 0;
    double fast_share = -1; // sweep cells
};

std::string cell_workload_name(const ExperimentSpec::WorkloadRef& ref,
                               std::uint64_t fast_capacity_pages) {
    using Kind = ExperimentSpec::WorkloadRef::Kind;
    switch (ref.kind) {
    case Kind::Npb: {
        std::string n = ref.app + "_" + footprint_name(ref.footprint);
        for (auto& c : n) c = char(std::tolower((unsigned char)c));
        return n;
    }
    case Kind::File:
        return parse_workload(read_file(ref.path), ref.path, fast_capacity_pages).name;
    case Kind::Trace: {
        fs::path p(ref.path);
        return p.filename().string();
    }
    }
    return "?";
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec_in, const ExperimentOptions& opt) {
    ExperimentResult result;
    result.spec = spec_in;
    ExperimentSpec& spec = result.spec;
    if (!opt.seeds_override.empty()) spec.seeds = opt.seeds_override;
    if (!opt.calibration_override.empty()) spec.calibration = opt.calibration_override;
    spec.validate();

    const PerTier<TierSpec> tiers = resolve_calibration(spec.calibration);

    std::vector<Cell> cells;
    for (const auto& w : spec.workloads) {
        if (spec.type == ExperimentSpec::Type::Matrix) {
            for (const auto& p : spec.policies)
                for (std::uint64_t seed : spec.seeds) {
                    Cell c;
                    c.workload = w;
                    c.policy_name = p.name;
                    c.policy_params = p.params;
                    c.policy_label = p.label;
                    c.seed = seed;
                    cells.push_back(std::move(c));
                }
        } else {
            for (double share : spec.fast_shares)
                for (std::uint64_t seed : spec.seeds) {
                    Cell c;
                    c.workload = w;
                    c.policy_name = "static_ratio";
                    c.policy_params = {{"fast_share", fmt_double(share, 6)}};
                    c.policy_label = "ratio" + fmt_fixed(share * 100.0, 0);
                    c.seed = seed;
                    c.fast_share = share;
                    cells.push_back(std::move(c));
                }
        }
    }

    if (opt.dry_run) {
        if (opt.progress) {
            for (const auto& c : cells)
                *opt.progress << "cell " << cell_workload_name(c.workload, tiers.fast.capacity_pages)
                              << " " << c.policy_label << " seed=" << c.seed << "\n";
            *opt.progress << cells.size() << " cells\n";
        }
        return result;
    }

    result.runs.resize(cells.size());
    std::vector<std::string> errors(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mu;
    const unsigned workers = std::max(1u, opt.workers);

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& c = cells[i];
            try {
                auto wl = materialize_workload(c.workload, c.seed, spec.epoch_s,
                                               tiers.fast.capacity_pages);
                SimConfig cfg;
                cfg.horizon_epochs = spec.horizon;
                if (cfg.horizon_epochs == 0)
                    if (const auto* t = dynamic_cast<const TraceWorkload*>(wl.get()))
                        cfg.horizon_epochs = t->epochs();
                cfg.epoch_s = spec.epoch_s;
                cfg.seed = c.seed;
                cfg.tiers = tiers;
                cfg.policy = c.policy_name;
                cfg.policy_params = c.policy_params;
                cfg.run_id = sanitize(wl->name() + "_" + c.policy_label + "_s" +
                                      std::to_string(c.seed));
                RunResult r = run_simulation(cfg, *wl);
                r.summary.policy = c.policy_label;
                if (opt.progress) {
                    std::lock_guard<std::mutex> lk(progress_mu);
                    *opt.progress << r.summary.run_id << ": achieved "
                                  << fmt_double(r.summary.achieved_mbps, 6) << " MB/s, latency "
                                  << fmt_double(r.summary.mean_latency_ns, 6) << " ns\n";
                }
                result.runs[i] = std::move(r);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (!errors[i].empty())
            throw RunError("cell " + std::to_string(i) + " (" + cells[i].policy_label + " seed " +
                           std::to_string(cells[i].seed) + ") failed: " + errors[i]);

    if (spec.type == ExperimentSpec::Type::Matrix) {
        bool have_baseline = false;
        for (const auto& p : spec.policies)
            if (p.label == spec.baseline) have_baseline = true;
        if (have_baseline && spec.policies.size() > 1) {
            std::vector<RunSummary> summaries;
            for (const auto& r : result.runs) summaries.push_back(r.summary);
            result.comparison = build_comparison(summaries, spec.baseline);
            result.has_comparison = true;
        }
    } else {
        std::size_t i = 0;
        for (const auto& w : spec.workloads) {
            (void)w;
            // Cell order within one workload: share-major, seed-minor.
            std::map<std::uint64_t, std::vector<std::size_t>> by_seed;
            for (double share : spec.fast_shares) {
                (void)share;
                for (std::uint64_t seed : spec.seeds) {
                    by_seed[seed].push_back(i);
                    ++i;
                }
            }
            for (const auto& [seed, idxs] : by_seed) {
                std::vector<SweepRow> rows;
                for (std::size_t idx : idxs) {
                    const RunSummary& s = result.runs[idx].summary;
                    SweepRow row;
                    row.workload = s.workload;
                    row.seed = seed;
                    row.fast_share = cells[idx].fast_share;
                    row.achieved_mbps = s.achieved_mbps;
                    row.mean_latency_ns = s.mean_latency_ns;
                    row.energy_j = s.energy_j;
                    rows.push_back(row);
                }
                double all_fast = 0;
                for (const auto& r : rows)
                    if (std::abs(r.fast_share - 1.0) < 1e-9) all_fast = r.achieved_mbps;
                for (auto& r : rows) r.gain = all_fast > 0 ? r.achieved_mbps / all_fast : 0;
                rows[pick_best_ratio(rows)].best = true;
                result.sweep.insert(result.sweep.end(), rows.begin(), rows.end());
            }
        }
    }

    if (!opt.out_dir.empty()) {
        std::string stamp;
        if (opt.timestamp_header) {
            char buf[64];
            std::time_t now = std::time(nullptr);
            std::tm tm{};
            gmtime_r(&now, &tm);
            std::strftime(buf, sizeof buf, "# generated %Y-%m-%dT%H:%M:%SZ\n", &tm);
            stamp = buf;
        }
        auto write_csv = [&](const std::string& path, const std::string& body) {
            write_file(path, stamp + body);
        };
        fs::create_directories(opt.out_dir);
        std::string summary = summary_csv_header();
        for (const auto& r : result.runs) summary += summary_csv_row(r.summary);
        write_csv(opt.out_dir + "/summary.csv", summary);
        if (result.has_comparison) {
            write_csv(opt.out_dir + "/comparison.csv", comparison_csv(result.comparison));
            write_csv(opt.out_dir + "/correlation.csv", correlation_csv(result.comparison));
        }
        if (spec.type == ExperimentSpec::Type::SweepRatio)
            write_csv(opt.out_dir + "/sweep.csv", sweep_csv(result.sweep));
        if (opt.write_per_run) {
            for (const auto& r : result.runs) {
                const std::string dir = opt.out_dir + "/runs/" + sanitize(r.summary.run_id);
                fs::create_directories(dir);
                write_csv(dir + "/metrics.csv", metrics_csv(r));
                write_csv(dir + "/regions.csv", region_csv(r));
                write_file(dir + "/events.log", r.event_log);
            }
        }
    }
    return result;
}

} // namespace tiersim
