#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cavcool/config.hpp"
#include "cavcool/ensemble_stats.hpp"
#include "cavcool/fpe_coefficients.hpp"
#include "cavcool/sde_engine.hpp"

namespace cavcool {

// Run protocols shared by the command-line tool and the acceptance suite.

struct Protocol {
  int n_traj = 5000;
  std::uint64_t seed = 1;
  int workers = 0;
  double dt = 0.0;  // 0 = model default
  Model model = Model::LowField;
  bool spontaneous = false;
  bool cross_noise = false;
  double t_in = 1.0;                // k_B T_in in hbar gamma/2 (Doppler start)
  double horizon_rate_times = 8.0;  // t_final = horizon / cooling_rate
  double window_fraction = 0.2;     // trailing fraction pooled as "steady"
  int window_snapshots = 9;
  bool warm_start = false;  // start momenta at the analytic steady width
  bool keep_final_samples = false;
  double field_re0 = 5.0;
  double field_im0 = 0.0;
  bool sample_field = false;
};

// One steady-state measurement at fixed parameters. Momenta are pooled over
// the trailing window; the standard error uses the single-snapshot count
// N * n_traj (window snapshots are correlated, so this is conservative).
struct SteadyPoint {
  double delta_c = 0.0;
  WidthEstimate dp;
  double kurtosis = 0.0;
  double kurtosis_stderr = 0.0;
  double dp_analytic = 0.0;
  double dp_analytic_spont = 0.0;
  double photon_mean = 0.0;  // time-averaged |alpha|^2 (field model only)
  double order_mean = 0.0;   // spatial order over the window
  std::uint64_t aborted = 0;
  double clip_fraction = 0.0;
  double t_final = 0.0;
  double dt = 0.0;
  std::vector<double> final_samples;  // pooled momenta at t_final if requested
};

SteadyPoint measure_steady(const Params& params, const Protocol& protocol);

struct RelaxationCurve {
  std::vector<double> t;  // internal units
  std::vector<WidthEstimate> dp;
  std::vector<double> dp_analytic;
  std::vector<double> order;
  std::vector<double> sample_times;
  std::vector<std::vector<double>> samples;
  double dt = 0.0;
  std::uint64_t aborted = 0;
  double initial_width = 0.0;
};

// Width relaxation from the Doppler start, with raw momenta kept at the
// requested snapshot times.
RelaxationCurve run_relaxation(const Params& params, const Protocol& protocol,
                               double t_final, std::span<const double> sample_times,
                               int n_output = 48);

// Steady width versus detuning; the coupling ratios (N U / delta_c,
// Omega / Omega_c) are re-resolved at every point.
std::vector<SteadyPoint> sweep_detuning(const ScenarioSpec& scenario,
                                        std::span<const double> delta_c_values,
                                        const Protocol& protocol);

struct ComparisonPoint {
  SteadyPoint low_field;
  SteadyPoint field;
  double agreement_sigma = 0.0;  // |dp_A - dp_B| / combined stderr
};

std::vector<ComparisonPoint> compare_models(const ScenarioSpec& scenario,
                                            std::span<const double> delta_c_values,
                                            const Protocol& low_field_protocol,
                                            const Protocol& field_protocol);

}  // namespace cavcool
