#include "tiersim/tier_model.hpp"

#include <algorithm>
#include <cmath>

namespace tiersim {

TierPerformanceModel::TierPerformanceModel(std::string name, std::vector<SurfaceLine> lines,
                                           double divergence_knee_mbps)
    : name_(std::move(name)), lines_(std::move(lines)), divergence_knee_(divergence_knee_mbps) {
    std::sort(lines_.begin(), lines_.end(),
              [](const SurfaceLine& a, const SurfaceLine& b) { return a.read_fraction < b.read_fraction; });
    validate();
}

void TierPerformanceModel::validate() const {
    if (lines_.empty()) throw ConfigError(name_ + ": no surface lines");
    for (const auto& line : lines_) {
        if (line.anchors.size() < 2)
            throw ConfigError(name_ + ": line needs at least 2 anchors");
        if (line.anchors.front().demand_mbps != 0)
            throw ConfigError(name_ + ": first anchor of each line must be at demand 0");
        for (std::size_t i = 0; i < line.anchors.size(); ++i) {
            const auto& a = line.anchors[i];
            if (a.achieved_mbps > a.demand_mbps + 1e-9)
                throw ConfigError(name_ + ": achieved exceeds demand at anchor");
            if (i > 0) {
                const auto& p = line.anchors[i - 1];
                if (a.demand_mbps <= p.demand_mbps)
                    throw ConfigError(name_ + ": anchor demands must increase");
                if (a.latency_ns < p.latency_ns)
                    throw ConfigError(name_ + ": latency must be non-decreasing in demand");
                if (a.achieved_mbps < p.achieved_mbps)
                    throw ConfigError(name_ + ": achieved bandwidth must be non-decreasing");
            }
        }
    }
    for (std::size_t i = 1; i < lines_.size(); ++i)
        if (lines_[i].read_fraction <= lines_[i - 1].read_fraction)
            throw ConfigError(name_ + ": duplicate read_fraction line");
}

TierPerformanceModel::LineEval TierPerformanceModel::eval_line(const SurfaceLine& line,
                                                               double d) const {
    const auto& as = line.anchors;
    if (d <= as.front().demand_mbps)
        return {std::min(d, as.front().achieved_mbps), as.front().latency_ns};
    if (d >= as.back().demand_mbps) {
        // Clamp bandwidth to the line peak; extrapolate latency along the last segment.
        const auto& a = as[as.size() - 2];
        const auto& b = as.back();
        double slope = (b.latency_ns - a.latency_ns) / (b.demand_mbps - a.demand_mbps);
        return {b.achieved_mbps, b.latency_ns + slope * (d - b.demand_mbps)};
    }
    std::size_t hi = 1;
    while (as[hi].demand_mbps < d) ++hi;
    const auto& a = as[hi - 1];
    const auto& b = as[hi];
    double t = (d - a.demand_mbps) / (b.demand_mbps - a.demand_mbps);
    return {a.achieved_mbps + t * (b.achieved_mbps - a.achieved_mbps),
            a.latency_ns + t * (b.latency_ns - a.latency_ns)};
}

TierPerformanceModel::Eval TierPerformanceModel::evaluate(double rf, double d) const {
    rf = std::clamp(rf, 0.0, 1.0);
    if (d < 0) d = 0;

    const SurfaceLine* lo = &lines_.front();
    const SurfaceLine* hi = &lines_.back();
    if (rf <= lo->read_fraction) {
        hi = lo;
    } else if (rf >= hi->read_fraction) {
        lo = hi;
    } else {
        for (std::size_t i = 1; i < lines_.size(); ++i) {
            if (lines_[i].read_fraction >= rf) {
                lo = &lines_[i - 1];
                hi = &lines_[i];
                break;
            }
        }
    }

    LineEval el = eval_line(*lo, d);
    LineEval eh = lo == hi ? el : eval_line(*hi, d);
    double t = lo == hi ? 0.0
                        : (rf - lo->read_fraction) / (hi->read_fraction - lo->read_fraction);
    double achieved = el.achieved + t * (eh.achieved - el.achieved);
    double latency = el.latency + t * (eh.latency - el.latency);
    return {std::min(achieved, d), latency};
}

double TierPerformanceModel::peak_bandwidth(double rf) const {
    rf = std::clamp(rf, 0.0, 1.0);
    const SurfaceLine* lo = &lines_.front();
    const SurfaceLine* hi = &lines_.back();
    if (rf <= lo->read_fraction) hi = lo;
    else if (rf >= hi->read_fraction) lo = hi;
    else {
        for (std::size_t i = 1; i < lines_.size(); ++i) {
            if (lines_[i].read_fraction >= rf) {
                lo = &lines_[i - 1];
                hi = &lines_[i];
                break;
            }
        }
    }
    double pl = lo->anchors.back().achieved_mbps;
    double ph = hi->anchors.back().achieved_mbps;
    double t = lo == hi ? 0.0 : (rf - lo->read_fraction) / (hi->read_fraction - lo->read_fraction);
    return pl + t * (ph - pl);
}

double TierPerformanceModel::peak_read_bw() const {
    return lines_.back().anchors.back().achieved_mbps;
}

double TierPerformanceModel::peak_write_limited_bw() const {
    return lines_.front().anchors.back().achieved_mbps;
}

double TierPerformanceModel::base_latency_ns() const {
    return lines_.back().anchors.front().latency_ns;
}

ServiceResult TierModel::service_epoch(TierId t, const Traffic& offered, double epoch_s) const {
    ServiceResult r;
    std::uint64_t total = offered.total();
    if (total == 0 || epoch_s <= 0) {
        r.mean_latency_ns = specs_[t].perf.base_latency_ns();
        return r;
    }
    double rf = double(offered.read_bytes) / double(total);
    r.offered_mbps = double(total) / kMB / epoch_s;
    auto ev = specs_[t].perf.evaluate(rf, r.offered_mbps);
    r.achieved_mbps = ev.achieved_mbps;
    r.mean_latency_ns = ev.latency_ns;

    // Completed bytes are 64B-granular so energy accounting stays integral and
    // serviced + backlog == offered holds exactly in bytes.
    auto to_lines = [](double bytes) { return std::uint64_t(bytes) / kLineBytes * kLineBytes; };
    std::uint64_t serviceable = to_lines(ev.achieved_mbps * kMB * epoch_s);
    serviceable = std::min(serviceable, total);
    std::uint64_t sread = to_lines(double(serviceable) * rf + 0.5 * double(kLineBytes));
    sread = std::min({sread, serviceable, offered.read_bytes});
    std::uint64_t swrite = serviceable - sread;
    if (swrite > offered.write_bytes) {
        swrite = offered.write_bytes;
        sread = std::min(serviceable - swrite, offered.read_bytes);
    }
    r.serviced = {sread, swrite};
    r.energy_nj = double(sread / kLineBytes) * specs_[t].read_energy_nj +
                  double(swrite / kLineBytes) * specs_[t].write_energy_nj;
    return r;
}

BandwidthCounters BandwidthMonitor::sample(std::size_t window) const {
    if (history_.empty())
        throw std::logic_error("BandwidthMonitor::sample before any epoch elapsed");
    BandwidthCounters c;
    c.short_window = window > history_.size();
    c.window_epochs = std::min(window, history_.size());
    if (c.window_epochs == 0) c.window_epochs = history_.size();
    double secs = double(c.window_epochs) * epoch_s_;
    PerTier<Traffic> sum;
    for (std::size_t i = history_.size() - c.window_epochs; i < history_.size(); ++i) {
        sum.fast += history_[i].fast;
        sum.slow += history_[i].slow;
    }
    for (TierId t : {TierId::Fast, TierId::Slow}) {
        c.tiers[t].read_mbps = double(sum[t].read_bytes) / kMB / secs;
        c.tiers[t].write_mbps = double(sum[t].write_bytes) / kMB / secs;
    }
    return c;
}

} // namespace tiersim
