#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

#include "cavcool/params.hpp"

namespace cavcool {

// Analytic drift, friction, diffusion and cross coefficients of the
// cavity-eliminated low-field model, evaluated at instantaneous positions.
// Units: momenta hbar k, frequencies gamma/2; the effective detuning
// delta_c' is recomputed from the given positions on every call.

struct LowFieldCoefficients {
  Eigen::VectorXd drift;      // Phi_n, momentum drift
  Eigen::MatrixXd friction;   // gamma_{nl}: dp_n/dt -= sum_l friction(n,l) p_l
  Eigen::MatrixXd diffusion;  // D_{nl}, <dP_n dP_l> = 2 D dt
  Eigen::MatrixXd cross;      // eta_{nl}, <dP_n dX_l> = eta dt
};

// Drift force on atom n: 2 S^2 delta_c'/(delta_c'^2 + kappa^2)
//                        * sin(k x_n) sum_l cos(k x_l)
Eigen::VectorXd drift_force(std::span<const double> x, const Params& params);

// Velocity-dependent momentum drift: +8 omega_r S^2 delta_c' kappa /
// (delta_c'^2+kappa^2)^2 * sin(k x_n) sum_l sin(k x_l) p_l  (damping for
// delta_c' < 0).
Eigen::VectorXd friction_term(std::span<const double> x, std::span<const double> p,
                              const Params& params);

// gamma_{nl} such that the friction drift is -sum_l gamma_{nl} p_l.
Eigen::MatrixXd friction_matrix(std::span<const double> x, const Params& params);

// D = S^2 kappa/(delta_c'^2+kappa^2) sin sin^T, plus the spontaneous-emission
// diagonal (gamma'/2) s^2 u2bar when enabled. Symmetric PSD.
Eigen::MatrixXd diffusion_matrix(std::span<const double> x, const Params& params,
                                 bool spontaneous);

// eta_{nl} = 2 omega_r S^2 sin sin^T (kappa^2 - delta_c'^2)/(delta_c'^2+kappa^2)^2;
// vanishes identically at |delta_c'| = kappa.
Eigen::MatrixXd cross_matrix(std::span<const double> x, const Params& params);

LowFieldCoefficients low_field_coefficients(std::span<const double> x,
                                            const Params& params, bool spontaneous);

// Closed-form relaxation analytics of the position-averaged momentum dynamics.
struct RelaxationAnalytics {
  double drift_rate = 0.0;       // A = 4 omega_r S^2 delta_c kappa delta1 / (delta_c^2+kappa^2)^2
  double diffusion_rate = 0.0;   // B = (1/2) S^2 kappa delta2 / (delta_c^2+kappa^2), units (hbar k)^2 per time
  double delta1 = 1.0;           // finite-N U/delta_c corrections
  double delta2 = 1.0;
  // defined only when A < 0 (requires delta_c < 0):
  std::optional<double> dp_steady;        // sqrt(-B/A), hbar k
  std::optional<double> temperature;      // k_B T = dp_steady^2/m, units hbar gamma/2
  std::optional<double> cooling_rate;     // -2A
  std::optional<double> dp_steady_spont;  // broadened width including spontaneous diffusion
};

RelaxationAnalytics relaxation_analytics(const Params& params, int n_atoms);

// dp(t) = sqrt(dp0^2 e^{2At} + (1 - e^{2At}) dp_inf^2); requires A < 0.
double width_evolution(double dp0, double t, const RelaxationAnalytics& an);

}  // namespace cavcool
