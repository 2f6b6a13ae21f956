#include "cavcool/fpe_coefficients.hpp"

#include <cmath>
#include <stdexcept>

#include "cavcool/adiabatic_field.hpp"

namespace cavcool {

namespace {

struct Trig {
  Eigen::VectorXd sin_kx;
  double sum_cos = 0.0;
  double delta_eff = 0.0;
  double denom = 0.0;  // delta_eff^2 + kappa^2
};

Trig trig_of(std::span<const double> x, const Params& params) {
  Trig t;
  const auto n = static_cast<Eigen::Index>(x.size());
  t.sin_kx.resize(n);
  double sum_cos2 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c = std::cos(x[j]);
    t.sin_kx[j] = std::sin(x[j]);
    t.sum_cos += c;
    sum_cos2 += c * c;
  }
  t.delta_eff = params.cavity.delta_c - params.drv.light_shift * sum_cos2;
  t.denom = t.delta_eff * t.delta_eff + params.cavity.kappa * params.cavity.kappa;
  return t;
}

}  // namespace

Eigen::VectorXd drift_force(std::span<const double> x, const Params& params) {
  const Trig t = trig_of(x, params);
  const double s2 = params.drv.pump_amp * params.drv.pump_amp;
  const double pref = 2.0 * s2 * t.delta_eff / t.denom * t.sum_cos;
  return pref * t.sin_kx;
}

Eigen::MatrixXd friction_matrix(std::span<const double> x, const Params& params) {
  const Trig t = trig_of(x, params);
  const double s2 = params.drv.pump_amp * params.drv.pump_amp;
  const double pref = -8.0 * params.recoil() * s2 * t.delta_eff * params.cavity.kappa /
                      (t.denom * t.denom);
  return pref * (t.sin_kx * t.sin_kx.transpose());
}

Eigen::VectorXd friction_term(std::span<const double> x, std::span<const double> p,
                              const Params& params) {
  if (x.size() != p.size())
    throw std::invalid_argument("friction_term: position/momentum size mismatch");
  const Trig t = trig_of(x, params);
  const double s2 = params.drv.pump_amp * params.drv.pump_amp;
  double sin_dot_p = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) sin_dot_p += t.sin_kx[j] * p[j];
  const double pref = 8.0 * params.recoil() * s2 * t.delta_eff * params.cavity.kappa /
                      (t.denom * t.denom) * sin_dot_p;
  return pref * t.sin_kx;
}

Eigen::MatrixXd diffusion_matrix(std::span<const double> x, const Params& params,
                                 bool spontaneous) {
  const Trig t = trig_of(x, params);
  const double s2 = params.drv.pump_amp * params.drv.pump_amp;
  const double c = s2 * params.cavity.kappa / t.denom;
  Eigen::MatrixXd d = c * (t.sin_kx * t.sin_kx.transpose());
  if (spontaneous) {
    const double sp = 0.5 * params.drv.scatter_rate * params.drv.pump_ratio *
                      params.drv.pump_ratio * params.atom.u2bar;
    d.diagonal().array() += sp;
  }
  return d;
}

Eigen::MatrixXd cross_matrix(std::span<const double> x, const Params& params) {
  const Trig t = trig_of(x, params);
  const double s2 = params.drv.pump_amp * params.drv.pump_amp;
  const double kap = params.cavity.kappa;
  const double pref = 2.0 * params.recoil() * s2 *
                      (kap * kap - t.delta_eff * t.delta_eff) / (t.denom * t.denom);
  return pref * (t.sin_kx * t.sin_kx.transpose());
}

LowFieldCoefficients low_field_coefficients(std::span<const double> x,
                                            const Params& params, bool spontaneous) {
  LowFieldCoefficients c;
  c.drift = drift_force(x, params);
  c.friction = friction_matrix(x, params);
  c.diffusion = diffusion_matrix(x, params, spontaneous);
  c.cross = cross_matrix(x, params);
  return c;
}

RelaxationAnalytics relaxation_analytics(const Params& params, int n_atoms) {
  const double dc = params.cavity.delta_c;
  const double kap = params.cavity.kappa;
  const double denom = dc * dc + kap * kap;
  const double s2 = params.drv.pump_amp * params.drv.pump_amp;
  const double wr = params.recoil();
  // (N U/2)/delta_c * (2N-1)/(2N); well defined for any sign of U and delta_c
  const double shift = 0.5 * n_atoms * params.drv.light_shift / dc *
                       (2.0 * n_atoms - 1.0) / (2.0 * n_atoms);

  RelaxationAnalytics an;
  an.delta1 = 1.0 + (3.0 * dc * dc - kap * kap) / denom * shift;
  an.delta2 = 1.0 + 2.0 * dc * dc / denom * shift;
  an.drift_rate = 4.0 * wr * s2 * dc * kap * an.delta1 / (denom * denom);
  an.diffusion_rate = 0.5 * s2 * kap * an.delta2 / denom;

  if (an.drift_rate < 0.0) {
    const double dp2 = -an.diffusion_rate / an.drift_rate;
    an.dp_steady = std::sqrt(dp2);
    an.temperature = dp2 / params.mass();  // = 2 omega_r dp^2
    an.cooling_rate = -2.0 * an.drift_rate;
    const double da = params.atom.delta_a;
    const double g4 = da * da + 0.25 * params.atom.gamma * params.atom.gamma;
    const double spont = 2.0 * params.atom.u2bar * g4 / (da * da) * denom /
                         (kap * kap * params.drv.cooperativity * an.delta2);
    an.dp_steady_spont = *an.dp_steady * std::sqrt(1.0 + spont);
  }
  return an;
}

double width_evolution(double dp0, double t, const RelaxationAnalytics& an) {
  if (an.drift_rate == 0.0) return dp0;  // no drive: width frozen
  if (an.drift_rate > 0.0)
    throw std::invalid_argument("width_evolution: no stationary state (A > 0)");
  if (!an.dp_steady) throw std::invalid_argument("width_evolution: steady width undefined");
  const double e = std::exp(2.0 * an.drift_rate * t);
  const double dpi = *an.dp_steady;
  return std::sqrt(dp0 * dp0 * e + (1.0 - e) * dpi * dpi);
}

}  // namespace cavcool
