#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cavcool/params.hpp"

namespace cavcool {

// Flat `key = value` configuration file; '#' starts a comment, keys are
// dotted (atom.*, cavity.*, drive.*, ensemble.*, units.*, run.*). Frequencies
// are in units of gamma/2 unless units.frequency selects "hz" (ordinary
// frequency, multiplied by 2 pi) or "rad_s".
class KeyValueFile {
 public:
  KeyValueFile() = default;
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<double> get_optional(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  // keys never read by any getter; surfaced as configuration warnings
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> accessed_;
};

// Ratio-driven description of a physical setup, the way the constants are
// usually quoted: detunings and rates in gamma/2, the coupling fixed through
// N U / delta_c and the drive through Omega / Omega_c. Absolute scales come
// from the SI anchors.
struct ScenarioSpec {
  // SI anchors
  double mass_amu = 84.911789738;   // 85Rb
  double wavelength_nm = 780.0;
  double linewidth_mhz = 6.0;       // gamma / 2pi

  // physics, gamma/2 units
  double delta_a = -500.0;
  double kappa = 0.5;
  double delta_c = -0.5;
  int n_atoms = 5;
  double u2bar = 0.4;

  // coupling: explicit g wins over the ratio
  std::optional<double> vacuum_rabi;
  double nu_over_delta_c = 0.05;  // N U / delta_c

  // drive: explicit Omega wins over the threshold fraction
  std::optional<double> pump_rabi;
  double omega_over_threshold = 0.3;

  Params build() const { return build_at(delta_c); }
  Params build_at(double delta_c_value) const;
};

// The 85Rb setup the detuning studies are quoted in.
ScenarioSpec paper_scenario();

ScenarioSpec scenario_from_file(const KeyValueFile& file);

}  // namespace cavcool
