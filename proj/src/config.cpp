#include "cavcool/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cavcool/constants.hpp"

namespace cavcool {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": empty key or value");
    kv.entries_[key] = value;
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  accessed_[key] = true;
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  accessed_[key] = true;
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': cannot parse number '" +
                             it->second + "'");
  }
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  const int i = static_cast<int>(std::llround(v));
  if (std::abs(v - i) > 1e-9)
    throw std::runtime_error("config key '" + key + "': expected an integer");
  return i;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  accessed_[key] = true;
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw std::runtime_error("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::optional<double> KeyValueFile::get_optional(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_double(key, 0.0);
}

std::vector<std::string> KeyValueFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : entries_)
    if (!accessed_.count(key)) out.push_back(key);
  return out;
}

Params ScenarioSpec::build_at(double delta_c_value) const {
  UnitSystem units;
  units.gamma_si = 2.0 * constants::pi * linewidth_mhz * 1e6;
  units.wavenumber_si = 2.0 * constants::pi / (wavelength_nm * 1e-9);
  units.mass_si = mass_amu * constants::atomic_mass_unit;

  AtomSpec atom;
  atom.gamma = 2.0;  // gamma in units of gamma/2
  atom.delta_a = delta_a;
  atom.u2bar = u2bar;
  const double recoil = units.recoil_freq_internal();
  atom.mass = 0.5 / recoil;

  CavitySpec cavity;
  cavity.kappa = kappa;
  cavity.delta_c = delta_c_value;

  const double gamma_sq_quarter = 0.25 * atom.gamma * atom.gamma;
  if (vacuum_rabi) {
    atom.vacuum_rabi = *vacuum_rabi;
  } else {
    // back-solve g from N U / delta_c
    const double light_shift = nu_over_delta_c * delta_c_value / n_atoms;
    const double g_sq = light_shift * (delta_a * delta_a + gamma_sq_quarter) / delta_a;
    if (!(g_sq > 0.0))
      throw std::invalid_argument(
          "ScenarioSpec: N U / delta_c and the detunings imply g^2 <= 0");
    atom.vacuum_rabi = std::sqrt(g_sq);
  }

  if (pump_rabi) {
    atom.pump_rabi = *pump_rabi;
  } else {
    const double light_shift = atom.delta_a * atom.vacuum_rabi * atom.vacuum_rabi /
                               (delta_a * delta_a + gamma_sq_quarter);
    const double delta = delta_c_value - 0.5 * n_atoms * light_shift;
    if (delta == 0.0)
      throw std::invalid_argument("ScenarioSpec: threshold diverges at delta = 0");
    const double threshold = (kappa * kappa + delta * delta) /
                             (2.0 * std::abs(delta) * std::sqrt(double(n_atoms))) *
                             std::abs(delta_a) / atom.vacuum_rabi;
    atom.pump_rabi = omega_over_threshold * threshold;
  }

  return make_params(atom, cavity, units, n_atoms);
}

ScenarioSpec paper_scenario() { return ScenarioSpec{}; }

ScenarioSpec scenario_from_file(const KeyValueFile& file) {
  ScenarioSpec spec;
  spec.mass_amu = file.get_double("atom.mass_amu", spec.mass_amu);
  spec.wavelength_nm = file.get_double("cavity.wavelength_nm", spec.wavelength_nm);
  spec.linewidth_mhz = file.get_double("atom.linewidth_mhz", spec.linewidth_mhz);

  const std::string freq_units = file.get_string("units.frequency", "gamma_half");
  double to_internal = 1.0;
  if (freq_units == "hz") {
    const double gamma_si = 2.0 * constants::pi * spec.linewidth_mhz * 1e6;
    to_internal = 2.0 * constants::pi / (0.5 * gamma_si);
  } else if (freq_units == "rad_s") {
    const double gamma_si = 2.0 * constants::pi * spec.linewidth_mhz * 1e6;
    to_internal = 1.0 / (0.5 * gamma_si);
  } else if (freq_units != "gamma_half") {
    throw std::runtime_error("units.frequency must be gamma_half, hz or rad_s");
  }

  spec.delta_a = to_internal * file.get_double("atom.detuning", spec.delta_a / to_internal);
  spec.kappa = to_internal * file.get_double("cavity.kappa", spec.kappa / to_internal);
  if (file.has("cavity.detuning_over_kappa"))
    spec.delta_c = spec.kappa * file.get_double("cavity.detuning_over_kappa", -1.0);
  else
    spec.delta_c = to_internal * file.get_double("cavity.detuning", spec.delta_c / to_internal);
  spec.n_atoms = file.get_int("ensemble.n_atoms", spec.n_atoms);
  spec.u2bar = file.get_double("atom.dipole_second_moment", spec.u2bar);

  if (file.has("drive.vacuum_rabi"))
    spec.vacuum_rabi = to_internal * file.get_double("drive.vacuum_rabi", 0.0);
  spec.nu_over_delta_c = file.get_double("drive.nu_over_delta_c", spec.nu_over_delta_c);
  if (file.has("drive.pump_rabi"))
    spec.pump_rabi = to_internal * file.get_double("drive.pump_rabi", 0.0);
  spec.omega_over_threshold =
      file.get_double("drive.omega_over_threshold", spec.omega_over_threshold);
  return spec;
}

}  // namespace cavcool
