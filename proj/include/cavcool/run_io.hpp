#pragma once

#include <map>
#include <string>

#include "cavcool/ensemble_stats.hpp"
#include "cavcool/experiments.hpp"

namespace cavcool {

// CSV and run-manifest output. All CSVs carry a header row; schemas are fixed.

std::string version_string();

// t, t_ms, dp, dp_stderr, dp_analytic, order
void write_relax_csv(const std::string& path, const RelaxationCurve& curve,
                     const UnitSystem& units);

// bin_center, density, gaussian_overlay
void write_hist_csv(const std::string& path, const Histogram& hist,
                    std::span<const double> overlay);

// delta_c, dp, dp_stderr, dp_analytic, dp_analytic_spont, kurtosis, kurtosis_stderr
void write_sweep_csv(const std::string& path, std::span<const SteadyPoint> points);

// delta_c, dp_low_field, stderr_low_field, dp_field, stderr_field, agreement_sigma
void write_compare_csv(const std::string& path, std::span<const ComparisonPoint> points);

// JSON manifest: config echo, effective run settings, seed, version, counters.
void write_manifest(const std::string& path,
                    const std::map<std::string, std::string>& config_echo,
                    const std::map<std::string, std::string>& run_info);

}  // namespace cavcool
