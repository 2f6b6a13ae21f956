#include "cavcool/experiments.hpp"

#include <cmath>
#include <stdexcept>

namespace cavcool {

namespace {

IntegratorConfig integrator_of(const Protocol& protocol) {
  IntegratorConfig config;
  config.dt = protocol.dt;
  config.model = protocol.model;
  config.spontaneous = protocol.spontaneous;
  config.cross_noise = protocol.cross_noise;
  config.field_re0 = protocol.field_re0;
  config.field_im0 = protocol.field_im0;
  config.sample_field = protocol.sample_field;
  return config;
}

}  // namespace

SteadyPoint measure_steady(const Params& params, const Protocol& protocol) {
  const auto analytics = relaxation_analytics(params, params.n_atoms);
  if (!analytics.cooling_rate)
    throw std::invalid_argument("measure_steady: no stationary state at this detuning");

  SteadyPoint point;
  point.delta_c = params.cavity.delta_c;
  point.dp_analytic = *analytics.dp_steady;
  point.dp_analytic_spont = *analytics.dp_steady_spont;
  point.t_final = protocol.horizon_rate_times / *analytics.cooling_rate;

  EnsembleSpec spec;
  spec.n_traj = protocol.n_traj;
  spec.workers = protocol.workers;
  spec.seed = protocol.seed;
  spec.t_final = point.t_final;
  spec.initial_width = protocol.warm_start ? *analytics.dp_steady
                                           : initial_momentum_width(params, protocol.t_in);
  const double t_window = point.t_final * (1.0 - protocol.window_fraction);
  const int n_snap = std::max(protocol.window_snapshots, 2);
  for (int i = 0; i < n_snap; ++i)
    spec.output_times.push_back(t_window + (point.t_final - t_window) * i / (n_snap - 1.0));
  if (protocol.keep_final_samples) spec.sample_times.push_back(point.t_final);

  const auto result = run_ensemble(params, integrator_of(protocol), spec);

  Moments pooled;
  FieldMoments field;
  double order_sum = 0.0;
  std::uint64_t order_n = 0;
  std::uint64_t n_single = 0;
  for (const auto& tp : result.series) {
    pooled.merge(tp.momenta);
    field.merge(tp.field);
    order_sum += tp.order_sum;
    order_n += tp.n_config;
    n_single = std::max(n_single, tp.momenta.n);
  }
  point.dp = width_from_moments(pooled);
  // window snapshots of one trajectory are correlated: quote the error of a
  // single snapshot
  point.dp.stderr_ = point.dp.value / std::sqrt(2.0 * (double(n_single) - 1.0));
  point.kurtosis = excess_kurtosis_from_moments(pooled);
  point.kurtosis_stderr = std::sqrt(24.0 / double(n_single));
  if (field.n > 0) point.photon_mean = field.nph / double(field.n);
  if (order_n > 0) point.order_mean = order_sum / double(order_n);
  point.aborted = result.aborted;
  point.clip_fraction = result.clip_fraction;
  point.dt = result.dt;
  if (!result.samples.empty()) point.final_samples = result.samples.back();
  return point;
}

RelaxationCurve run_relaxation(const Params& params, const Protocol& protocol,
                               double t_final, std::span<const double> sample_times,
                               int n_output) {
  const auto analytics = relaxation_analytics(params, params.n_atoms);

  RelaxationCurve curve;
  curve.initial_width = protocol.warm_start && analytics.dp_steady
                            ? *analytics.dp_steady
                            : initial_momentum_width(params, protocol.t_in);

  EnsembleSpec spec;
  spec.n_traj = protocol.n_traj;
  spec.workers = protocol.workers;
  spec.seed = protocol.seed;
  spec.t_final = t_final;
  spec.initial_width = curve.initial_width;
  for (int i = 0; i < n_output; ++i)
    spec.output_times.push_back(t_final * i / (n_output - 1.0));
  spec.sample_times.assign(sample_times.begin(), sample_times.end());

  const auto result = run_ensemble(params, integrator_of(protocol), spec);

  for (const auto& tp : result.series) {
    curve.t.push_back(tp.t);
    curve.dp.push_back(width_from_moments(tp.momenta));
    curve.dp_analytic.push_back(analytics.drift_rate < 0.0
                                    ? width_evolution(curve.initial_width, tp.t, analytics)
                                    : curve.initial_width);
    curve.order.push_back(tp.n_config > 0 ? tp.order_sum / double(tp.n_config) : 0.0);
  }
  curve.sample_times = result.sample_times;
  curve.samples = result.samples;
  curve.dt = result.dt;
  curve.aborted = result.aborted;
  return curve;
}

std::vector<SteadyPoint> sweep_detuning(const ScenarioSpec& scenario,
                                        std::span<const double> delta_c_values,
                                        const Protocol& protocol) {
  std::vector<SteadyPoint> points;
  points.reserve(delta_c_values.size());
  for (double dc : delta_c_values) {
    const Params params = scenario.build_at(dc);
    points.push_back(measure_steady(params, protocol));
  }
  return points;
}

std::vector<ComparisonPoint> compare_models(const ScenarioSpec& scenario,
                                            std::span<const double> delta_c_values,
                                            const Protocol& low_field_protocol,
                                            const Protocol& field_protocol) {
  std::vector<ComparisonPoint> points;
  points.reserve(delta_c_values.size());
  for (double dc : delta_c_values) {
    const Params params = scenario.build_at(dc);
    ComparisonPoint cp;
    Protocol pa = low_field_protocol;
    pa.model = Model::LowField;
    cp.low_field = measure_steady(params, pa);
    Protocol pb = field_protocol;
    pb.model = Model::SemiclassicalField;
    cp.field = measure_steady(params, pb);
    const double combined = std::hypot(cp.low_field.dp.stderr_, cp.field.dp.stderr_);
    cp.agreement_sigma = std::abs(cp.low_field.dp.value - cp.field.dp.value) / combined;
    points.push_back(std::move(cp));
  }
  return points;
}

}  // namespace cavcool
