#include "cavcool/ensemble_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavcool {

namespace {

constexpr double sqrt_two_pi = 2.5066282746310005;

std::vector<double> finite_only(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values)
    if (std::isfinite(v)) out.push_back(v);
  return out;
}

}  // namespace

double initial_momentum_width(const Params& params, double t_in) {
  if (!(t_in >= 0.0)) throw std::invalid_argument("initial_momentum_width: t_in must be >= 0");
  return std::sqrt(t_in / (2.0 * params.recoil()));
}

TrajectoryStateA sample_initial(const Params& params, int n_atoms, double t_in, Rng& rng) {
  if (n_atoms < 1) throw std::invalid_argument("sample_initial: n_atoms must be >= 1");
  const double width = initial_momentum_width(params, t_in);
  TrajectoryStateA st;
  st.x.resize(n_atoms);
  st.p.resize(n_atoms);
  for (auto& x : st.x) x = rng.uniform_angle();
  for (auto& p : st.p) p = width * rng.normal();
  return st;
}

WidthEstimate pooled_width(std::span<const double> momenta) {
  const auto vals = finite_only(momenta);
  if (vals.size() < 2) throw std::invalid_argument("pooled_width: need at least two samples");
  Moments m;
  for (double v : vals) m.add(v);
  return width_from_moments(m);
}

WidthEstimate width_from_moments(const Moments& m) {
  if (m.n < 2) throw std::invalid_argument("width_from_moments: need at least two samples");
  const double n = static_cast<double>(m.n);
  const double mean = m.sum / n;
  const double var = (m.sum2 - n * mean * mean) / (n - 1.0);
  WidthEstimate est;
  est.value = std::sqrt(std::max(var, 0.0));
  est.stderr_ = est.value / std::sqrt(2.0 * (n - 1.0));
  est.n = m.n;
  return est;
}

double excess_kurtosis_from_moments(const Moments& m) {
  if (m.n < 4) throw std::invalid_argument("excess_kurtosis_from_moments: need >= 4 samples");
  const double n = static_cast<double>(m.n);
  const double mean = m.sum / n;
  const double m2 = m.sum2 / n - mean * mean;
  const double m4 = (m.sum4 - 4.0 * mean * m.sum3 + 6.0 * mean * mean * m.sum2 -
                     3.0 * n * mean * mean * mean * mean) /
                    n;
  if (m2 <= 0.0) throw std::invalid_argument("excess_kurtosis_from_moments: zero variance");
  return m4 / (m2 * m2) - 3.0;
}

GaussianityReport gaussianity(std::span<const double> momenta) {
  const auto vals = finite_only(momenta);
  if (vals.size() < 8) throw std::invalid_argument("gaussianity: too few samples");
  Moments m;
  for (double v : vals) m.add(v);
  GaussianityReport rep;
  rep.n = m.n;
  rep.excess_kurtosis = excess_kurtosis_from_moments(m);
  rep.kurtosis_stderr = std::sqrt(24.0 / static_cast<double>(m.n));

  const auto est = width_from_moments(m);
  const double mean = m.sum / static_cast<double>(m.n);
  const Histogram hist = histogram_fd(vals);
  const double peak = 1.0 / (est.value * sqrt_two_pi);
  double dev = 0.0;
  for (std::size_t i = 0; i < hist.centers.size(); ++i) {
    const double z = (hist.centers[i] - mean) / est.value;
    const double pdf = peak * std::exp(-0.5 * z * z);
    dev = std::max(dev, std::abs(hist.density[i] - pdf));
  }
  rep.hist_deviation = dev / peak;
  return rep;
}

double spatial_order(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("spatial_order: empty configuration");
  double sum_cos = 0.0;
  for (double xi : x) sum_cos += std::cos(xi);
  return std::abs(sum_cos) / static_cast<double>(x.size());
}

Histogram histogram_fixed(std::span<const double> values, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram_fixed: bad binning");
  const auto vals = finite_only(values);
  Histogram h;
  h.bin_width = (hi - lo) / bins;
  h.centers.resize(bins);
  h.density.assign(bins, 0.0);
  for (int i = 0; i < bins; ++i) h.centers[i] = lo + (i + 0.5) * h.bin_width;
  std::size_t inside = 0;
  for (double v : vals) {
    int bin = static_cast<int>(std::floor((v - lo) / h.bin_width));
    if (bin == bins && v <= hi) bin = bins - 1;  // right edge belongs to the last bin
    if (bin >= 0 && bin < bins) {
      h.density[bin] += 1.0;
      ++inside;
    }
  }
  if (inside > 0)
    for (auto& d : h.density) d /= static_cast<double>(inside) * h.bin_width;
  return h;
}

Histogram histogram_fd(std::span<const double> values) {
  auto vals = finite_only(values);
  if (vals.size() < 4) throw std::invalid_argument("histogram_fd: too few samples");
  std::sort(vals.begin(), vals.end());
  const auto quantile = [&](double q) {
    const double pos = q * (vals.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < vals.size() ? vals[i] * (1.0 - frac) + vals[i + 1] * frac : vals[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double lo = vals.front(), hi = vals.back();
  double width = 2.0 * iqr / std::cbrt(static_cast<double>(vals.size()));
  if (!(width > 0.0)) width = (hi > lo) ? (hi - lo) / 8.0 : 1.0;
  int bins = static_cast<int>(std::ceil((hi - lo) / width));
  bins = std::clamp(bins, 1, 4096);
  const double pad = 0.5 * (bins * width - (hi - lo));
  return histogram_fixed(vals, bins, lo - pad, hi + pad);
}

std::vector<double> gaussian_overlay(const Histogram& hist, std::span<const double> values) {
  const auto vals = finite_only(values);
  Moments m;
  for (double v : vals) m.add(v);
  const auto est = width_from_moments(m);
  const double mean = m.sum / static_cast<double>(m.n);
  std::vector<double> overlay(hist.centers.size());
  const double peak = 1.0 / (est.value * sqrt_two_pi);
  for (std::size_t i = 0; i < hist.centers.size(); ++i) {
    const double z = (hist.centers[i] - mean) / est.value;
    overlay[i] = peak * std::exp(-0.5 * z * z);
  }
  return overlay;
}

}  // namespace cavcool
