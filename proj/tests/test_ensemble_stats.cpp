#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cavcool/config.hpp"
#include "cavcool/ensemble_stats.hpp"
#include "cavcool/rng.hpp"

using namespace cavcool;

TEST_CASE("initial sampler") {
  const Params p = paper_scenario().build();

  SUBCASE("width formula: sqrt(k_B T / (2 omega_r))") {
    CHECK(initial_momentum_width(p, 1.0) ==
          doctest::Approx(std::sqrt(0.5 / p.recoil())).epsilon(1e-14));
    // Doppler start for 85Rb: about 19.7 photon recoils
    CHECK(initial_momentum_width(p, 1.0) == doctest::Approx(19.71).epsilon(2e-3));
    CHECK(initial_momentum_width(p, 0.0) == 0.0);
  }
  SUBCASE("large-sample variance within 0.5%") {
    Rng rng(501);
    Moments m;
    double sum_x = 0.0;
    const int n_traj = 200000;
    for (int i = 0; i < n_traj; ++i) {
      const auto st = sample_initial(p, 5, 1.0, rng);
      for (double v : st.p) m.add(v);
      for (double x : st.x) sum_x += x;
    }
    const double target = initial_momentum_width(p, 1.0);
    const auto est = width_from_moments(m);
    CHECK(est.value == doctest::Approx(target).epsilon(0.005));
    CHECK(std::abs(m.sum / double(m.n)) < 3.0 * target / std::sqrt(double(m.n)));
    // positions uniform on [0, 2 pi): mean ~ pi
    CHECK(sum_x / (5.0 * n_traj) == doctest::Approx(3.14159).epsilon(0.01));
  }
  SUBCASE("zero temperature freezes the momenta") {
    Rng rng(502);
    const auto st = sample_initial(p, 5, 0.0, rng);
    for (double v : st.p) CHECK(v == 0.0);
  }
}

TEST_CASE("pooled width") {
  SUBCASE("identical values give zero width") {
    const std::vector<double> v(100, 3.5);
    CHECK(pooled_width(v).value == 0.0);
  }
  SUBCASE("synthetic gaussian recovered within 3 standard errors") {
    Rng rng(503);
    std::vector<double> v(20000);
    for (auto& x : v) x = 2.0 + 7.0 * rng.normal();
    const auto est = pooled_width(v);
    CHECK(std::abs(est.value - 7.0) < 3.0 * est.stderr_);
    CHECK(est.stderr_ == doctest::Approx(est.value / std::sqrt(2.0 * (v.size() - 1.0))));
  }
  SUBCASE("non-finite entries are skipped") {
    std::vector<double> v{1.0, -1.0, std::nan(""), 2.0, -2.0};
    const auto est = pooled_width(v);
    CHECK(est.n == 4);
  }
  SUBCASE("fewer than two samples throw") {
    const std::vector<double> v{1.0};
    CHECK_THROWS(pooled_width(v));
  }
}

TEST_CASE("gaussianity diagnostics") {
  Rng rng(504);
  SUBCASE("gaussian data: kurtosis consistent with zero, histogram follows the pdf") {
    std::vector<double> v(50000);
    for (auto& x : v) x = 3.0 * rng.normal();
    const auto rep = gaussianity(v);
    CHECK(std::abs(rep.excess_kurtosis) < 3.0 * rep.kurtosis_stderr);
    CHECK(rep.kurtosis_stderr == doctest::Approx(std::sqrt(24.0 / v.size())));
    CHECK(rep.hist_deviation < 0.08);  // bin counting noise at this sample size
  }
  SUBCASE("uniform data: excess kurtosis -1.2") {
    std::vector<double> v(100000);
    for (auto& x : v) x = rng.uniform();
    const auto rep = gaussianity(v);
    CHECK(rep.excess_kurtosis == doctest::Approx(-1.2).epsilon(0.02));
    CHECK(rep.hist_deviation > 0.1);  // visibly non-gaussian
  }
}

TEST_CASE("spatial order parameter") {
  SUBCASE("fully ordered pattern") {
    const std::vector<double> x(7, 0.0);
    CHECK(spatial_order(x) == 1.0);
  }
  SUBCASE("uniform N = 5 baseline: brute-forced mean 0.2559") {
    Rng rng(505);
    double acc = 0.0;
    const int n_samples = 300000;
    std::vector<double> x(5);
    for (int i = 0; i < n_samples; ++i) {
      for (auto& xi : x) xi = rng.uniform_angle();
      acc += spatial_order(x);
    }
    acc /= n_samples;
    CHECK(acc == doctest::Approx(0.2559).epsilon(0.005));
  }
  SUBCASE("bounds") {
    Rng rng(506);
    std::vector<double> x(5);
    for (int trial = 0; trial < 100; ++trial) {
      for (auto& xi : x) xi = rng.uniform_angle();
      const double o = spatial_order(x);
      CHECK(o >= 0.0);
      CHECK(o <= 1.0);
    }
  }
}

TEST_CASE("histograms") {
  Rng rng(507);
  std::vector<double> v(30000);
  for (auto& x : v) x = 1.5 * rng.normal();

  SUBCASE("freedman-diaconis density integrates to one") {
    const auto h = histogram_fd(v);
    const double integral =
        std::accumulate(h.density.begin(), h.density.end(), 0.0) * h.bin_width;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(h.centers.size() > 10);
  }
  SUBCASE("fixed binning integrates to one over the covered range") {
    const auto h = histogram_fixed(v, 41, -6.0, 6.0);
    const double integral =
        std::accumulate(h.density.begin(), h.density.end(), 0.0) * h.bin_width;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(h.centers.front() == doctest::Approx(-6.0 + 0.5 * h.bin_width));
  }
  SUBCASE("gaussian overlay peaks near the density peak") {
    const auto h = histogram_fd(v);
    const auto overlay = gaussian_overlay(h, v);
    const auto peak_idx = static_cast<std::size_t>(
        std::max_element(overlay.begin(), overlay.end()) - overlay.begin());
    CHECK(std::abs(h.centers[peak_idx]) < 0.5);
    CHECK(overlay[peak_idx] == doctest::Approx(1.0 / (1.5 * std::sqrt(2 * 3.14159265))).epsilon(0.05));
  }
  SUBCASE("degenerate binning throws") {
    CHECK_THROWS(histogram_fixed(v, 0, -1.0, 1.0));
    CHECK_THROWS(histogram_fixed(v, 10, 1.0, 1.0));
  }
}

TEST_CASE("moment-based kurtosis agrees with direct computation") {
  Rng rng(508);
  Moments m;
  std::vector<double> v(5000);
  for (auto& x : v) {
    x = rng.normal() + 0.3;
    m.add(x);
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= v.size();
  m4 /= v.size();
  CHECK(excess_kurtosis_from_moments(m) ==
        doctest::Approx(m4 / (m2 * m2) - 3.0).epsilon(1e-9));
}
