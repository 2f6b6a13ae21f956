#pragma once

namespace cavcool::constants {

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double boltzmann = 1.380649e-23;      // J/K
inline constexpr double pi = 3.14159265358979323846;

// 85Rb D2 line defaults
inline constexpr double rb85_mass_amu = 84.911789738;
inline constexpr double rb85_d2_wavelength_nm = 780.0;
inline constexpr double rb85_d2_linewidth_mhz = 6.0;   // gamma / 2pi

}  // namespace cavcool::constants
