#pragma once

#include <complex>
#include <span>

#include "cavcool/params.hpp"

namespace cavcool {

// Adiabatic cavity-field quantities for atoms frozen at given positions.
// Positions are k*x in radians throughout.

struct FieldSnapshot {
  std::complex<double> alpha;  // coherent amplitude
  double kappa_eff = 0.0;      // kappa' >= kappa
  double delta_eff = 0.0;      // delta_c' = delta_c - U sum cos^2(k x_j)
  double n_photons = 0.0;      // |alpha|^2
};

// delta_c' for the given configuration.
double effective_detuning(std::span<const double> x, const Params& params);

// kappa' = kappa + (gamma'/2) sum cos^2(k x_j); equals kappa exactly when
// spontaneous emission is disabled.
double effective_kappa(std::span<const double> x, const Params& params,
                       bool spontaneous = true);

// Steady-state coherent amplitude
//   alpha = sum_j S [1 - i gamma/(2 delta_a)] cos(k x_j) / (delta_c' + i kappa')
std::complex<double> coherent_amplitude(std::span<const double> x, const Params& params,
                                        bool spontaneous = true);

FieldSnapshot field_snapshot(std::span<const double> x, const Params& params,
                             bool spontaneous = true);

// Mean intracavity photon number for spatially uniform atoms,
//   n_cav ~= (N S^2 / 2) / (delta_c^2 + kappa^2).
double mean_photon_number_uniform(const Params& params, int n_atoms);

// Same quantity expressed through the drive in units of the self-organization
// threshold: n_cav ~= (Omega/Omega_c)^2 (delta_c^2 + kappa^2) / (8 delta_c^2).
// Agrees with the direct form when N|U| << |delta_c|.
double mean_photon_number_uniform_threshold_form(const Params& params, int n_atoms);

// Self-organization threshold pump Rabi frequency
//   Omega_c = (kappa^2 + delta^2) / (2 |delta| sqrt(N)) * |delta_a| / g,
// with delta = delta_c - N U / 2. Throws if delta == 0.
double threshold_pump(const Params& params, int n_atoms);

}  // namespace cavcool
