#pragma once

#include <string>
#include <vector>

namespace cavcool {

// Internal unit system used by every simulation-facing quantity:
//
//   frequency : gamma/2 of the reference atom   (so gamma itself is 2)
//   momentum  : hbar k
//   length    : 1/k                             (positions are k*x in radians)
//   time      : 2/gamma
//   energy    : hbar gamma/2
//
// In these units hbar = k = 1 and the atomic mass is 1/(2 omega_r), with
// omega_r the recoil frequency hbar k^2 / (2 m) expressed in gamma/2.

// SI anchors fixing the absolute scale of the internal units.
struct UnitSystem {
  double gamma_si = 0.0;       // atomic linewidth, rad/s
  double wavenumber_si = 0.0;  // cavity-mode wavenumber, 1/m
  double mass_si = 0.0;        // atomic mass, kg

  double frequency_unit() const { return 0.5 * gamma_si; }  // rad/s
  double time_unit() const { return 2.0 / gamma_si; }       // s
  double length_unit() const { return 1.0 / wavenumber_si; }
  double momentum_unit() const;                             // hbar k, kg m/s
  double energy_unit() const;                               // hbar gamma/2, J

  double freq_to_internal(double rad_per_s) const { return rad_per_s / frequency_unit(); }
  double freq_to_si(double internal) const { return internal * frequency_unit(); }
  double time_to_internal(double seconds) const { return seconds / time_unit(); }
  double time_to_si(double internal) const { return internal * time_unit(); }
  double momentum_to_internal(double si) const { return si / momentum_unit(); }
  double momentum_to_si(double internal) const { return internal * momentum_unit(); }

  // recoil frequency hbar k^2 / 2m in internal units
  double recoil_freq_internal() const;
};

// Atomic transition and drive constants, internal units.
struct AtomSpec {
  double mass = 0.0;          // 1/(2 omega_r)
  double gamma = 2.0;         // full linewidth (2 by construction for the reference atom)
  double delta_a = 0.0;       // laser-atom detuning
  double vacuum_rabi = 0.0;   // g
  double pump_rabi = 0.0;     // Omega
  double u2bar = 0.4;         // second moment of the dipole emission pattern along the axis

  double recoil_freq() const { return 0.5 / mass; }
  void validate() const;      // throws std::invalid_argument on bad fields
};

// Cavity constants, internal units (wavenumber is 1 by construction).
struct CavitySpec {
  double kappa = 0.0;    // field decay rate
  double delta_c = 0.0;  // laser-cavity detuning

  void validate() const;
};

// Couplings obtained by eliminating the atomic excited state.
struct DerivedCouplings {
  double light_shift = 0.0;    // U: per-atom dispersive shift of the cavity
  double pump_amp = 0.0;       // S: effective cavity pump from coherent scattering
  double scatter_rate = 0.0;   // gamma': incoherent photon scattering rate
  double pump_ratio = 0.0;     // s = Omega/g
  double recoil_freq = 0.0;    // omega_r
  double cooperativity = 0.0;  // C = g^2 / (kappa gamma/2)
};

// U = Delta_a g^2 / (Delta_a^2 + gamma^2/4)
// S = Delta_a g Omega / (Delta_a^2 + gamma^2/4)
// gamma' = gamma g^2 / (Delta_a^2 + gamma^2/4)
// Pure function; rejects delta_a == 0 (outside the dispersive regime).
DerivedCouplings derive_couplings(const AtomSpec& atom, const CavitySpec& cavity);

// Everything a simulation needs. Immutable after construction; safe to share
// across threads.
struct Params {
  AtomSpec atom;
  CavitySpec cavity;
  DerivedCouplings drv;
  UnitSystem units;
  int n_atoms = 1;

  double mass() const { return atom.mass; }
  double recoil() const { return drv.recoil_freq; }
};

// Validates the specs, derives couplings and checks unit round-trips.
Params make_params(const AtomSpec& atom, const CavitySpec& cavity,
                   const UnitSystem& units, int n_atoms);

// One semiclassical-validity diagnostic: the dimensionless ratio that must be
// small and whether it passes the advisory threshold (0.5).
struct RegimeCheck {
  std::string name;
  double ratio = 0.0;
  bool pass = false;
};

// Checks, for the current momentum width dp (units hbar k):
//   (a) hbar k / dp                       -- momentum coarse graining
//   (b) (k dp / m) / |kappa + i delta_c|  -- field faster than motion
//   (c) sqrt(N) S / (kappa sqrt(kappa/|U|)) -- no trapping by the lattice
//   (d) 2 u2bar (1/C) (delta_c^2 + kappa^2)/kappa^2 -- spontaneous vs cavity diffusion
// Diagnostics only, never throws.
std::vector<RegimeCheck> validate_regime(const Params& params, double dp, int n_atoms);

}  // namespace cavcool
