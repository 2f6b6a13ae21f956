#include "cavcool/params.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "cavcool/constants.hpp"

namespace cavcool {

double UnitSystem::momentum_unit() const {
  return constants::hbar * wavenumber_si;
}

double UnitSystem::energy_unit() const {
  return constants::hbar * frequency_unit();
}

double UnitSystem::recoil_freq_internal() const {
  const double omega_r_si =
      constants::hbar * wavenumber_si * wavenumber_si / (2.0 * mass_si);
  return freq_to_internal(omega_r_si);
}

void AtomSpec::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("AtomSpec: mass must be > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("AtomSpec: gamma must be > 0");
  if (!(vacuum_rabi > 0.0)) throw std::invalid_argument("AtomSpec: vacuum Rabi g must be > 0");
  if (pump_rabi < 0.0) throw std::invalid_argument("AtomSpec: pump Rabi must be >= 0");
  if (!(u2bar > 0.0) || u2bar > 1.0)
    throw std::invalid_argument("AtomSpec: u2bar must be in (0, 1]");
}

void CavitySpec::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("CavitySpec: kappa must be > 0");
}

DerivedCouplings derive_couplings(const AtomSpec& atom, const CavitySpec& cavity) {
  if (atom.delta_a == 0.0)
    throw std::invalid_argument("derive_couplings: delta_a = 0 is outside the dispersive regime");
  const double denom = atom.delta_a * atom.delta_a + 0.25 * atom.gamma * atom.gamma;
  DerivedCouplings d;
  d.light_shift = atom.delta_a * atom.vacuum_rabi * atom.vacuum_rabi / denom;
  d.pump_amp = atom.delta_a * atom.vacuum_rabi * atom.pump_rabi / denom;
  d.scatter_rate = atom.gamma * atom.vacuum_rabi * atom.vacuum_rabi / denom;
  d.pump_ratio = atom.pump_rabi / atom.vacuum_rabi;
  d.recoil_freq = atom.recoil_freq();
  d.cooperativity =
      atom.vacuum_rabi * atom.vacuum_rabi / (cavity.kappa * 0.5 * atom.gamma);
  return d;
}

Params make_params(const AtomSpec& atom, const CavitySpec& cavity,
                   const UnitSystem& units, int n_atoms) {
  atom.validate();
  cavity.validate();
  if (n_atoms < 1) throw std::invalid_argument("make_params: n_atoms must be >= 1");
  Params p;
  p.atom = atom;
  p.cavity = cavity;
  p.units = units;
  p.n_atoms = n_atoms;
  p.drv = derive_couplings(atom, cavity);
  return p;
}

std::vector<RegimeCheck> validate_regime(const Params& params, double dp, int n_atoms) {
  if (!(dp > 0.0)) throw std::invalid_argument("validate_regime: dp must be > 0");
  constexpr double threshold = 0.5;
  const auto& c = params.cavity;
  const auto& d = params.drv;

  std::vector<RegimeCheck> out;
  auto add = [&](const char* name, double ratio) {
    out.push_back({name, ratio, ratio < threshold});
  };

  // hbar k = 1 and k/m = 2 omega_r in internal units
  add("photon_recoil_vs_width", 1.0 / dp);
  add("doppler_vs_cavity_rate",
      2.0 * d.recoil_freq * dp / std::abs(std::complex<double>(c.kappa, c.delta_c)));
  const double trap = (d.light_shift != 0.0)
                          ? std::sqrt(static_cast<double>(n_atoms)) * std::abs(d.pump_amp) /
                                (c.kappa * std::sqrt(c.kappa / std::abs(d.light_shift)))
                          : 0.0;
  add("lattice_depth_vs_kinetic", trap);
  add("spontaneous_vs_cavity_diffusion",
      2.0 * params.atom.u2bar / d.cooperativity *
          (c.delta_c * c.delta_c + c.kappa * c.kappa) / (c.kappa * c.kappa));
  return out;
}

}  // namespace cavcool
