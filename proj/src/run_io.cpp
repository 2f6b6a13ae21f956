#include "cavcool/run_io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <json.hpp>

namespace cavcool {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << std::setprecision(12);
  return out;
}

}  // namespace

std::string version_string() {
#if defined(CAVCOOL_VERSION) && defined(CAVCOOL_GIT_SHA)
  return std::string(CAVCOOL_VERSION) + "+" + CAVCOOL_GIT_SHA;
#else
  return "unknown";
#endif
}

void write_relax_csv(const std::string& path, const RelaxationCurve& curve,
                     const UnitSystem& units) {
  auto out = open_out(path);
  out << "t,t_ms,dp,dp_stderr,dp_analytic,order\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    out << curve.t[i] << ',' << units.time_to_si(curve.t[i]) * 1e3 << ','
        << curve.dp[i].value << ',' << curve.dp[i].stderr_ << ','
        << curve.dp_analytic[i] << ',' << curve.order[i] << '\n';
  }
}

void write_hist_csv(const std::string& path, const Histogram& hist,
                    std::span<const double> overlay) {
  if (overlay.size() != hist.centers.size())
    throw std::invalid_argument("write_hist_csv: overlay size mismatch");
  auto out = open_out(path);
  out << "bin_center,density,gaussian_overlay\n";
  for (std::size_t i = 0; i < hist.centers.size(); ++i)
    out << hist.centers[i] << ',' << hist.density[i] << ',' << overlay[i] << '\n';
}

void write_sweep_csv(const std::string& path, std::span<const SteadyPoint> points) {
  auto out = open_out(path);
  out << "delta_c,dp,dp_stderr,dp_analytic,dp_analytic_spont,kurtosis,kurtosis_stderr\n";
  for (const auto& p : points)
    out << p.delta_c << ',' << p.dp.value << ',' << p.dp.stderr_ << ',' << p.dp_analytic
        << ',' << p.dp_analytic_spont << ',' << p.kurtosis << ',' << p.kurtosis_stderr
        << '\n';
}

void write_compare_csv(const std::string& path, std::span<const ComparisonPoint> points) {
  auto out = open_out(path);
  out << "delta_c,dp_low_field,stderr_low_field,dp_field,stderr_field,agreement_sigma\n";
  for (const auto& p : points)
    out << p.low_field.delta_c << ',' << p.low_field.dp.value << ','
        << p.low_field.dp.stderr_ << ',' << p.field.dp.value << ',' << p.field.dp.stderr_
        << ',' << p.agreement_sigma << '\n';
}

void write_manifest(const std::string& path,
                    const std::map<std::string, std::string>& config_echo,
                    const std::map<std::string, std::string>& run_info) {
  nlohmann::json j;
  j["version"] = version_string();
  j["config"] = config_echo;
  j["run"] = run_info;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace cavcool
