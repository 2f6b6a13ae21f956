#include "cavcool/adiabatic_field.hpp"

#include <cmath>
#include <stdexcept>

namespace cavcool {

namespace {

double sum_cos(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) s += std::cos(xi);
  return s;
}

double sum_cos2(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) {
    const double c = std::cos(xi);
    s += c * c;
  }
  return s;
}

}  // namespace

double effective_detuning(std::span<const double> x, const Params& params) {
  return params.cavity.delta_c - params.drv.light_shift * sum_cos2(x);
}

double effective_kappa(std::span<const double> x, const Params& params, bool spontaneous) {
  if (!spontaneous) return params.cavity.kappa;
  return params.cavity.kappa + 0.5 * params.drv.scatter_rate * sum_cos2(x);
}

std::complex<double> coherent_amplitude(std::span<const double> x, const Params& params,
                                        bool spontaneous) {
  const double pump_phase = spontaneous ? params.atom.gamma / (2.0 * params.atom.delta_a) : 0.0;
  const std::complex<double> numerator =
      params.drv.pump_amp * std::complex<double>(1.0, -pump_phase) * sum_cos(x);
  const std::complex<double> denominator(effective_detuning(x, params),
                                         effective_kappa(x, params, spontaneous));
  return numerator / denominator;
}

FieldSnapshot field_snapshot(std::span<const double> x, const Params& params,
                             bool spontaneous) {
  FieldSnapshot snap;
  snap.delta_eff = effective_detuning(x, params);
  snap.kappa_eff = effective_kappa(x, params, spontaneous);
  snap.alpha = coherent_amplitude(x, params, spontaneous);
  snap.n_photons = std::norm(snap.alpha);
  return snap;
}

double mean_photon_number_uniform(const Params& params, int n_atoms) {
  const double s2 = params.drv.pump_amp * params.drv.pump_amp;
  const double dc = params.cavity.delta_c;
  const double k = params.cavity.kappa;
  return 0.5 * n_atoms * s2 / (dc * dc + k * k);
}

double mean_photon_number_uniform_threshold_form(const Params& params, int n_atoms) {
  const double ratio = params.atom.pump_rabi / threshold_pump(params, n_atoms);
  const double dc = params.cavity.delta_c;
  const double k = params.cavity.kappa;
  return ratio * ratio * (dc * dc + k * k) / (8.0 * dc * dc);
}

double threshold_pump(const Params& params, int n_atoms) {
  const double delta = params.cavity.delta_c - 0.5 * n_atoms * params.drv.light_shift;
  if (delta == 0.0)
    throw std::invalid_argument("threshold_pump: delta_c - N U / 2 = 0, threshold diverges");
  const double k = params.cavity.kappa;
  return (k * k + delta * delta) / (2.0 * std::abs(delta) * std::sqrt(double(n_atoms))) *
         std::abs(params.atom.delta_a) / params.atom.vacuum_rabi;
}

}  // namespace cavcool
