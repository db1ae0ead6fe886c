#pragma once

#include "tiersim/tier_model.hpp"

#include <string>

namespace tiersim {

// Built-in desk-scale calibration. The same content ships as
// data/calibration/default.cal; absolute values are configuration, tests only
// assert cross-tier ratios and orderings.
PerTier<TierSpec> default_tier_specs();
std::string default_calibration_text();

// Versioned key/value text format (see docs/FORMATS.md).
PerTier<TierSpec> parse_calibration(const std::string& text, const std::string& origin);
PerTier<TierSpec> load_calibration_file(const std::string& path);
std::string write_calibration(const PerTier<TierSpec>& specs);

// Resolves "default", a file path, or the TIERSIM_CALIBRATION env var.
PerTier<TierSpec> resolve_calibration(const std::string& nameOrPath);

// Measurement CSV <-> calibration (tiersim calibrate).
// CSV columns: tier,read_fraction,demand_mbps,latency_ns,achieved_mbps
std::string export_measurements_csv(const PerTier<TierSpec>& specs);
PerTier<TierSpec> calibrate_from_csv(const std::string& csv_text, const PerTier<TierSpec>& base);

} // namespace tiersim
