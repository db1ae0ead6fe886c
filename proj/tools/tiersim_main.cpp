#include "tiersim/calibration.hpp"
#include "tiersim/experiment.hpp"
#include "tiersim/text_util.hpp"

#include "CLI11.hpp"

#include <ctime>
#include <iostream>

using namespace tiersim;

namespace {

// Exit codes: 0 ok, 1 runtime failure, 2 invalid configuration/input.
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::string utc_stamp() {
    char buf[32];
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

std::string default_out_dir(const std::string& name, bool timestamp) {
    std::string dir = "results/" + name;
    if (timestamp) dir += "_" + utc_stamp();
    return dir;
}

// Builds a one-workload sweep spec from CLI pieces by reusing the .exp parser,
// so "npb:bt:LARGE"-style references behave identically in both places.
ExperimentSpec adhoc_sweep_spec(const std::string& workload_ref,
                                const std::vector<double>& ratio_percents,
                                std::uint64_t horizon, double epoch_s,
                                const std::string& calibration) {
    std::string text = "schema_version 1\nname sweep\ntype sweep_ratio\n";
    text += "calibration " + (calibration.empty() ? std::string("default") : calibration) + "\n";
    text += "epoch_s " + fmt_double(epoch_s, 8) + "\n";
    text += "horizon " + std::to_string(horizon) + "\n";
    text += "workload " + workload_ref + "\n";
    text += "ratios";
    for (double p : ratio_percents) text += " " + fmt_double(p, 6);
    text += "\n";
    return parse_experiment(text, "<cli>");
}

void print_comparison(const ExperimentResult& result, std::ostream& os) {
    if (!result.has_comparison) return;
    os << "\nGeomean vs " << result.spec.baseline << ":\n";
    for (const auto& [policy, g] : result.comparison.geomean_speedup) {
        os << "  " << policy << ": speedup " << fmt_double(g, 4);
        auto it = result.comparison.geomean_energy.find(policy);
        if (it != result.comparison.geomean_energy.end())
            os << ", energy ratio " << fmt_double(it->second, 4);
        os << "\n";
    }
}

void print_sweep_report(const ExperimentResult& result, std::ostream& os) {
    os << "\nBest ratio per workload/seed (gain vs all-fast):\n";
    for (const auto& r : result.sweep)
        if (r.best)
            os << "  " << r.workload << " seed=" << r.seed << ": fast_share "
               << fmt_double(r.fast_share, 2) << ", achieved " << fmt_double(r.achieved_mbps, 6)
               << " MB/s, gain " << fmt_double(r.gain, 4) << "\n";
}

int run_command(const std::string& exp_path, ExperimentOptions& opt, bool quiet,
                bool require_sweep) {
    ExperimentSpec spec = load_experiment_file(exp_path);
    if (require_sweep && spec.type != ExperimentSpec::Type::SweepRatio)
        throw ConfigError(exp_path + " is not a sweep_ratio experiment");
    if (!quiet) opt.progress = &std::cerr;
    if (opt.out_dir.empty() && !opt.dry_run)
        opt.out_dir = default_out_dir(spec.name, opt.timestamp_header);
    ExperimentResult result = run_experiment(spec, opt);
    if (opt.dry_run) return 0;
    print_comparison(result, std::cout);
    if (spec.type == ExperimentSpec::Type::SweepRatio) print_sweep_report(result, std::cout);
    if (!opt.out_dir.empty()) std::cout << "artifacts: " << opt.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-tier memory placement simulator"};
    app.require_subcommand(1);

    // Shared run options.
    ExperimentOptions opt;
    bool quiet = false;
    bool no_timestamp = false;
    bool no_per_run = false;
    std::vector<std::uint64_t> seeds;
    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--seeds", seeds, "Override the experiment's seed list");
        cmd->add_option("--workers", opt.workers, "Parallel simulation workers")
            ->check(CLI::Range(1u, 64u));
        cmd->add_option("--out", opt.out_dir, "Output directory (default results/<name>_<UTC>)");
        cmd->add_option("--calibration", opt.calibration_override,
                        "Calibration: 'default' or a file path");
        cmd->add_flag("--dry-run", opt.dry_run, "Validate and list cells without running");
        cmd->add_flag("--no-timestamp", no_timestamp,
                      "Omit timestamps from CSV headers and the default output path");
        cmd->add_flag("--no-per-run", no_per_run, "Skip per-run metrics/regions/events files");
        cmd->add_flag("--quiet", quiet, "Suppress per-run progress output");
    };

    auto* run = app.add_subcommand("run", "Run an experiment file");
    std::string run_path;
    run->add_option("experiment", run_path, "Experiment file (.exp)")->required();
    add_run_flags(run);

    auto* sweep = app.add_subcommand("sweep-ratio", "Sweep static fast/slow placement ratios");
    std::string sweep_path, sweep_workload;
    std::vector<double> sweep_ratios;
    std::uint64_t sweep_horizon = 4000;
    double sweep_epoch_s = 0.0005;
    sweep->add_option("experiment", sweep_path, "sweep_ratio experiment file (.exp)");
    sweep->add_option("--workload", sweep_workload,
                      "Workload reference (npb:<app>:<class>, file:<path>, trace:<path>)");
    sweep->add_option("--ratios", sweep_ratios, "Fast-tier share grid in percent, e.g. 100 85 70");
    sweep->add_option("--horizon", sweep_horizon, "Epochs to simulate");
    sweep->add_option("--epoch-s", sweep_epoch_s, "Epoch length in seconds");
    add_run_flags(sweep);

    auto* cal = app.add_subcommand("calibrate", "Fit a calibration file from measurement CSV");
    std::string cal_csv, cal_out, cal_base = "default", cal_export;
    cal->add_option("measurements", cal_csv,
                    "CSV: tier,read_fraction,demand_mbps,latency_ns,achieved_mbps");
    cal->add_option("--out", cal_out, "Calibration file to write");
    cal->add_option("--base", cal_base, "Calibration supplying capacities/energies");
    cal->add_option("--export-defaults", cal_export,
                    "Write the built-in calibration as measurement CSV and exit");

    auto* xprof = app.add_subcommand("export-profile", "Write a reference profile as a .wl file");
    std::string xp_app, xp_class = "LARGE", xp_out, xp_calibration = "default";
    xprof->add_option("--app", xp_app, "Profile name (bt, ft, mg, cg)")->required();
    xprof->add_option("--class", xp_class, "Footprint class (SMALL, MEDIUM, LARGE)");
    xprof->add_option("--out", xp_out, "Output path (default stdout)");
    xprof->add_option("--calibration", xp_calibration, "Calibration sizing the footprint");

    auto* xtrace = app.add_subcommand("export-trace", "Materialize a workload as a replayable trace");
    std::string xt_workload, xt_out, xt_calibration = "default";
    std::uint64_t xt_seed = 1, xt_horizon = 4000;
    double xt_epoch_s = 0.0005;
    xtrace->add_option("--workload", xt_workload, "Workload reference")->required();
    xtrace->add_option("--seed", xt_seed, "Generation seed");
    xtrace->add_option("--horizon", xt_horizon, "Epochs to record")->required();
    xtrace->add_option("--epoch-s", xt_epoch_s, "Epoch length in seconds");
    xtrace->add_option("--out", xt_out, "Output path (default stdout)");
    xtrace->add_option("--calibration", xt_calibration, "Calibration sizing the footprint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        opt.seeds_override = seeds;
        opt.timestamp_header = !no_timestamp;
        opt.write_per_run = !no_per_run;

        if (run->parsed()) return run_command(run_path, opt, quiet, false);

        if (sweep->parsed()) {
            if (!sweep_path.empty()) return run_command(sweep_path, opt, quiet, true);
            if (sweep_workload.empty() || sweep_ratios.empty())
                throw ConfigError("sweep-ratio needs an experiment file or --workload + --ratios");
            ExperimentSpec spec = adhoc_sweep_spec(sweep_workload, sweep_ratios, sweep_horizon,
                                                   sweep_epoch_s, opt.calibration_override);
            if (!quiet) opt.progress = &std::cerr;
            if (opt.out_dir.empty() && !opt.dry_run)
                opt.out_dir = default_out_dir(spec.name, opt.timestamp_header);
            ExperimentResult result = run_experiment(spec, opt);
            if (!opt.dry_run) {
                print_sweep_report(result, std::cout);
                std::cout << "artifacts: " << opt.out_dir << "\n";
            }
            return 0;
        }

        if (cal->parsed()) {
            if (!cal_export.empty()) {
                write_file(cal_export, export_measurements_csv(default_tier_specs()));
                std::cout << "wrote " << cal_export << "\n";
                return 0;
            }
            if (cal_csv.empty() || cal_out.empty())
                throw ConfigError("calibrate needs a measurement CSV and --out");
            PerTier<TierSpec> base = resolve_calibration(cal_base);
            PerTier<TierSpec> fitted = calibrate_from_csv(read_file(cal_csv), base);
            write_file(cal_out, write_calibration(fitted));
            std::cout << "wrote " << cal_out << "\n";
            return 0;
        }

        if (xprof->parsed()) {
            PerTier<TierSpec> tiers = resolve_calibration(xp_calibration);
            WorkloadSpec spec =
                npb_profile(xp_app, footprint_from_name(xp_class), tiers.fast.capacity_pages);
            std::string text = write_workload(spec);
            if (xp_out.empty())
                std::cout << text;
            else {
                write_file(xp_out, text);
                std::cout << "wrote " << xp_out << "\n";
            }
            return 0;
        }

        if (xtrace->parsed()) {
            PerTier<TierSpec> tiers = resolve_calibration(xt_calibration);
            std::string text = "schema_version 1\nname x\ntype sweep_ratio\nratios 100\n";
            text += "workload " + xt_workload + "\n";
            ExperimentSpec spec = parse_experiment(text, "<cli>");
            auto wl =
                materialize_workload(spec.workloads[0], xt_seed, xt_epoch_s, tiers.fast.capacity_pages);
            std::string trace = write_trace(*wl, xt_horizon, xt_epoch_s);
            if (xt_out.empty())
                std::cout << trace;
            else {
                write_file(xt_out, trace);
                std::cout << "wrote " << xt_out << "\n";
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
