#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cavcool/params.hpp"
#include "cavcool/rng.hpp"
#include "cavcool/sde_engine.hpp"

namespace cavcool {

// Initial ensemble: positions uniform over one wavelength, momenta
// Maxwell-Boltzmann at temperature t_in (k_B T in units hbar gamma/2).
struct InitialCondition {
  double t_in = 1.0;
};

// Per-atom momentum width sqrt(m k_B T) in hbar k: sqrt(t_in / (2 omega_r)).
double initial_momentum_width(const Params& params, double t_in);

TrajectoryStateA sample_initial(const Params& params, int n_atoms, double t_in, Rng& rng);

struct WidthEstimate {
  double value = 0.0;   // unbiased sample standard deviation
  double stderr_ = 0.0; // asymptotic-normal: value / sqrt(2 (n - 1))
  std::uint64_t n = 0;
};

// Pooled momentum width over all atoms and trajectories. Non-finite entries
// (aborted trajectories) are skipped. Throws if fewer than two finite values.
WidthEstimate pooled_width(std::span<const double> momenta);

// Width of pooled moments accumulated by the ensemble driver.
WidthEstimate width_from_moments(const Moments& m);

double excess_kurtosis_from_moments(const Moments& m);

struct GaussianityReport {
  double excess_kurtosis = 0.0;
  double kurtosis_stderr = 0.0;  // sqrt(24/n)
  double hist_deviation = 0.0;   // max |density - fitted gaussian| / gaussian peak
  std::uint64_t n = 0;
};

GaussianityReport gaussianity(std::span<const double> momenta);

// |sum_j cos(k x_j)| / N for one configuration; in [0, 1], ~N^{-1/2}-scale for
// uniform positions and 1 for a fully ordered pattern.
double spatial_order(std::span<const double> x);

struct Histogram {
  std::vector<double> centers;
  std::vector<double> density;  // integrates to 1
  double bin_width = 0.0;
};

// Freedman-Diaconis binning.
Histogram histogram_fd(std::span<const double> values);
Histogram histogram_fixed(std::span<const double> values, int bins, double lo, double hi);

// Gaussian pdf with the sample mean and width of the data, evaluated at the
// histogram centers (figure overlays).
std::vector<double> gaussian_overlay(const Histogram& hist, std::span<const double> values);

}  // namespace cavcool
