#include "cavcool/sde_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cavcool/fpe_coefficients.hpp"

namespace cavcool {

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

DiffusionFactorization factorize_diffusion(const Eigen::MatrixXd& d) {
  const double scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (d - d.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw std::invalid_argument("factorize_diffusion: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (d + d.transpose()));
  DiffusionFactorization out;
  out.trace = d.trace();
  Eigen::VectorXd evals = es.eigenvalues();
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] < 0.0) {
      out.clipped_mass -= evals[i];
      evals[i] = 0.0;
    }
  }
  out.factor = es.eigenvectors() * evals.cwiseSqrt().asDiagonal();
  return out;
}

Eigen::MatrixXd field_diffusion_matrix(std::span<const double> x, double alpha_re,
                                       double alpha_im, const Params& params,
                                       bool spontaneous) {
  const int n = static_cast<int>(x.size());
  const double gamma_half = spontaneous ? 0.5 * params.drv.scatter_rate : 0.0;
  const double s_ratio = params.drv.pump_ratio;
  const double u2 = params.atom.u2bar;
  const double nph = alpha_re * alpha_re + alpha_im * alpha_im;

  double sum_cos2 = 0.0;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n + 2, n + 2);
  for (int j = 0; j < n; ++j) {
    const double s = std::sin(x[j]);
    const double c = std::cos(x[j]);
    sum_cos2 += c * c;
    const double b = -0.5 * gamma_half * 2.0 * s * c;  // -(1/2) Gamma sin(2kx)
    d(0, 2 + j) = d(2 + j, 0) = -b * alpha_im;
    d(1, 2 + j) = d(2 + j, 1) = b * alpha_re;
    d(2 + j, 2 + j) = 2.0 * gamma_half *
                      (nph * (s * s + u2 * c * c) +
                       s_ratio * u2 * (2.0 * alpha_re * c + s_ratio));
  }
  const double a = 0.5 * (params.cavity.kappa + gamma_half * sum_cos2);
  d(0, 0) = a;
  d(1, 1) = a;
  return d;
}

double default_dt(const Params& params, const IntegratorConfig& config,
                  double initial_width, int n_atoms) {
  if (config.model == Model::SemiclassicalField) {
    const double kp = params.cavity.kappa +
                      (config.spontaneous ? 0.5 * params.drv.scatter_rate * n_atoms : 0.0);
    const double dc =
        std::abs(params.cavity.delta_c) + std::abs(params.drv.light_shift) * n_atoms;
    return 0.01 / std::max(kp, dc);
  }
  // Low-field model: the binding scale is the optical phase k v dt advanced
  // per step (measured width bias ~3% at k v dt ~ 0.05 rad and linear-or-better
  // in dt, so the 0.2 cap keeps it below ~0.3%); the cooling rate is slower by
  // orders of magnitude here.
  const auto an = relaxation_analytics(params, n_atoms);
  const double p_scale = std::max({initial_width, an.dp_steady.value_or(0.0), 1.0});
  double dt = 0.2;
  dt = std::min(dt, 0.05 / (2.0 * params.recoil() * p_scale));
  if (an.cooling_rate && *an.cooling_rate > 0.0) dt = std::min(dt, 1e-3 / *an.cooling_rate);
  return dt;
}

std::vector<std::string> stability_warnings(const Params& params,
                                            const IntegratorConfig& config, double dt,
                                            double initial_width) {
  std::vector<std::string> warnings;
  auto warn = [&](const std::string& s) { warnings.push_back(s); };
  const int n = params.n_atoms;
  if (config.model == Model::SemiclassicalField) {
    const double kp = params.cavity.kappa +
                      (config.spontaneous ? 0.5 * params.drv.scatter_rate * n : 0.0);
    const double rate = std::max(kp, std::abs(params.cavity.delta_c) +
                                         std::abs(params.drv.light_shift) * n);
    if (dt * rate > 0.1)
      warn("dt * max(kappa', |delta_c'|) = " + std::to_string(dt * rate) +
           " > 0.1: field dynamics under-resolved");
  } else {
    const auto an = relaxation_analytics(params, n);
    if (an.cooling_rate && dt * *an.cooling_rate > 0.1)
      warn("dt * cooling_rate = " + std::to_string(dt * *an.cooling_rate) +
           " > 0.1: relaxation under-resolved");
    const double p_scale = std::max({initial_width, an.dp_steady.value_or(0.0), 1.0});
    const double phase = dt * 2.0 * params.recoil() * p_scale;
    if (phase > 0.3)
      warn("optical phase per step k v dt = " + std::to_string(phase) +
           " > 0.3 rad: lattice under-resolved");
  }
  return warnings;
}

// --- low-field stepper --------------------------------------------------

LowFieldStepper::LowFieldStepper(const Params& params, const IntegratorConfig& config,
                                 double dt)
    : n_(params.n_atoms),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      kappa2_(params.cavity.kappa * params.cavity.kappa),
      delta_c_(params.cavity.delta_c),
      light_shift_(params.drv.light_shift),
      two_wr_(2.0 * params.recoil()),
      spontaneous_(config.spontaneous),
      cross_noise_(config.cross_noise) {
  const double s2 = params.drv.pump_amp * params.drv.pump_amp;
  drift_pref_ = 2.0 * s2;
  fric_pref_ = 8.0 * params.recoil() * s2 * params.cavity.kappa;
  diff_pref_ = s2 * params.cavity.kappa;
  spont_diff_ = spontaneous_ ? 0.5 * params.drv.scatter_rate * params.drv.pump_ratio *
                                   params.drv.pump_ratio * params.atom.u2bar
                             : 0.0;
  if (config.frozen_detuning)
    frozen_delta_ = params.cavity.delta_c - 0.5 * n_ * params.drv.light_shift;
  sin_.resize(n_);
  cos_.resize(n_);
  kick_.resize(n_);
  if (cross_noise_) {
    joint_.resize(2 * n_, 2 * n_);
    noise_in_.resize(2 * n_);
    noise_out_.resize(2 * n_);
  }
}

void LowFieldStepper::step(TrajectoryStateA& state, Rng& rng) {
  double sum_cos = 0.0, sum_cos2 = 0.0, sin_dot_p = 0.0;
  for (int j = 0; j < n_; ++j) {
    sin_[j] = std::sin(state.x[j]);
    cos_[j] = std::cos(state.x[j]);
    sum_cos += cos_[j];
    sum_cos2 += cos_[j] * cos_[j];
    sin_dot_p += sin_[j] * state.p[j];
  }
  const double delta_eff =
      frozen_delta_ ? *frozen_delta_ : delta_c_ - light_shift_ * sum_cos2;
  const double denom = delta_eff * delta_eff + kappa2_;
  const double drift = drift_pref_ * delta_eff / denom * sum_cos;
  const double fric = fric_pref_ * delta_eff / (denom * denom) * sin_dot_p;

  if (!cross_noise_) {
    const double shared = std::sqrt(2.0 * diff_pref_ / denom * dt_) * rng.normal();
    const double spont_amp = spontaneous_ ? std::sqrt(2.0 * spont_diff_ * dt_) : 0.0;
    for (int j = 0; j < n_; ++j) {
      double dp = (drift + fric) * sin_[j] * dt_ + shared * sin_[j];
      if (spontaneous_) dp += spont_amp * rng.normal();
      kick_[j] = dp;
    }
    for (int j = 0; j < n_; ++j) {
      state.x[j] += two_wr_ * state.p[j] * dt_;
      state.p[j] += kick_[j];
    }
  } else {
    // joint covariance of (dP, dX) per unit time: [[2D, eta], [eta^T, 0]],
    // regularized and clipped to its nearest PSD completion
    const double cdiff = diff_pref_ / denom;
    const double two_wr_s2 = two_wr_ * drift_pref_ / 2.0;  // 2 wr S^2
    const double eta_pref = two_wr_s2 * (kappa2_ - delta_eff * delta_eff) / (denom * denom);
    joint_.setZero();
    for (int j = 0; j < n_; ++j)
      for (int l = 0; l < n_; ++l) {
        joint_(j, l) = 2.0 * cdiff * sin_[j] * sin_[l];
        joint_(j, n_ + l) = eta_pref * sin_[j] * sin_[l];
        joint_(n_ + l, j) = joint_(j, n_ + l);
      }
    if (spontaneous_)
      for (int j = 0; j < n_; ++j) joint_(j, j) += 2.0 * spont_diff_;
    const double eps = 1e-12 * joint_.trace();
    joint_.diagonal().array() += eps;
    const auto fac = factorize_diffusion(joint_);
    clipped_mass_ += fac.clipped_mass;
    clipped_trace_ += fac.trace;
    for (int i = 0; i < 2 * n_; ++i) noise_in_[i] = rng.normal();
    noise_out_ = fac.factor * noise_in_ * sqrt_dt_;
    for (int j = 0; j < n_; ++j) {
      state.x[j] += two_wr_ * state.p[j] * dt_ + noise_out_[n_ + j];
      state.p[j] += (drift + fric) * sin_[j] * dt_ + noise_out_[j];
    }
  }
  state.t += dt_;
}

// --- semiclassical-field stepper -----------------------------------------

SemiclassicalFieldStepper::SemiclassicalFieldStepper(const Params& params,
                                                     const IntegratorConfig& config,
                                                     double dt)
    : n_(params.n_atoms),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      kappa_(params.cavity.kappa),
      delta_c_(params.cavity.delta_c),
      light_shift_(params.drv.light_shift),
      pump_amp_(params.drv.pump_amp),
      two_wr_(2.0 * params.recoil()),
      gamma_half_(config.spontaneous ? 0.5 * params.drv.scatter_rate : 0.0),
      pump_ratio_(params.drv.pump_ratio),
      u2bar_(params.atom.u2bar),
      freeze_atoms_(config.freeze_atoms),
      params_(params) {
  if (config.frozen_detuning)
    frozen_delta_ = params.cavity.delta_c - 0.5 * n_ * params.drv.light_shift;
  sin_.resize(n_);
  cos_.resize(n_);
  if (gamma_half_ > 0.0) {
    noise_in_.resize(n_ + 2);
    noise_out_.resize(n_ + 2);
  }
}

void SemiclassicalFieldStepper::step(TrajectoryStateB& state, Rng& rng) {
  double sum_cos = 0.0, sum_cos2 = 0.0;
  for (int j = 0; j < n_; ++j) {
    sin_[j] = std::sin(state.x[j]);
    cos_[j] = std::cos(state.x[j]);
    sum_cos += cos_[j];
    sum_cos2 += cos_[j] * cos_[j];
  }
  const double delta_eff =
      frozen_delta_ ? *frozen_delta_ : delta_c_ - light_shift_ * sum_cos2;
  const double kappa_eff = kappa_ + gamma_half_ * sum_cos2;
  const double ar = state.alpha_re, ai = state.alpha_im;
  const double nph = ar * ar + ai * ai;

  const double dar =
      (-delta_eff * ai - kappa_eff * ar - gamma_half_ * pump_ratio_ * sum_cos) * dt_;
  const double dai =
      (delta_eff * ar - kappa_eff * ai - pump_ratio_ * light_shift_ * sum_cos) * dt_;

  if (gamma_half_ == 0.0) {
    const double field_amp = std::sqrt(0.5 * kappa_eff * dt_);
    if (!freeze_atoms_) {
      for (int j = 0; j < n_; ++j) {
        const double force = 2.0 * pump_ratio_ * light_shift_ * ar * sin_[j] +
                             light_shift_ * nph * 2.0 * sin_[j] * cos_[j];
        state.x[j] += two_wr_ * state.p[j] * dt_;
        state.p[j] += force * dt_;
      }
    }
    state.alpha_re += dar + field_amp * rng.normal();
    state.alpha_im += dai + field_amp * rng.normal();
  } else {
    const auto fac =
        factorize_diffusion(field_diffusion_matrix(state.x, ar, ai, params_, true));
    clipped_mass_ += fac.clipped_mass;
    clipped_trace_ += std::abs(fac.trace);
    for (int i = 0; i < n_ + 2; ++i) noise_in_[i] = rng.normal();
    noise_out_ = fac.factor * noise_in_ * sqrt_dt_;
    if (!freeze_atoms_) {
      for (int j = 0; j < n_; ++j) {
        const double force = 2.0 * pump_ratio_ * light_shift_ * ar * sin_[j] -
                             2.0 * gamma_half_ * pump_ratio_ * ai * sin_[j] +
                             light_shift_ * nph * 2.0 * sin_[j] * cos_[j];
        state.x[j] += two_wr_ * state.p[j] * dt_;
        state.p[j] += force * dt_ + noise_out_[2 + j];
      }
    }
    state.alpha_re += dar + noise_out_[0];
    state.alpha_im += dai + noise_out_[1];
  }
  state.t += dt_;
}

// --- ensemble driver ------------------------------------------------------

namespace {

struct OutputGrid {
  std::vector<std::uint64_t> steps;  // strictly increasing, first may be 0
  std::vector<double> times;
  std::vector<int> sample_slot;  // index into sample blocks, or -1
  std::vector<double> sample_times;
};

OutputGrid make_grid(const EnsembleSpec& spec, double dt) {
  auto snap = [&](double t) {
    return static_cast<std::uint64_t>(std::llround(std::max(t, 0.0) / dt));
  };
  std::vector<std::uint64_t> steps;
  for (double t : spec.output_times) steps.push_back(snap(t));
  std::vector<std::uint64_t> sample_steps;
  for (double t : spec.sample_times) {
    sample_steps.push_back(snap(t));
    steps.push_back(sample_steps.back());
  }
  steps.push_back(snap(spec.t_final));
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  OutputGrid grid;
  grid.steps = steps;
  for (auto s : steps) {
    grid.times.push_back(static_cast<double>(s) * dt);
    grid.sample_slot.push_back(-1);
  }
  // first occurrence wins when several sample times snap to one step
  for (auto s : sample_steps) {
    const auto it = std::lower_bound(steps.begin(), steps.end(), s);
    const auto idx = static_cast<std::size_t>(it - steps.begin());
    if (grid.sample_slot[idx] < 0) {
      grid.sample_slot[idx] = static_cast<int>(grid.sample_times.size());
      grid.sample_times.push_back(grid.times[idx]);
    }
  }
  return grid;
}

struct ChunkPartial {
  std::vector<TimePoint> series;
  std::uint64_t aborted = 0;
  double clipped = 0.0, trace = 0.0;
};

template <typename State>
State make_initial(const Params& params, const IntegratorConfig& config,
                   const EnsembleSpec& spec, Rng& rng);

template <>
TrajectoryStateA make_initial(const Params& params, const IntegratorConfig&,
                              const EnsembleSpec& spec, Rng& rng) {
  TrajectoryStateA st;
  st.x.resize(params.n_atoms);
  st.p.resize(params.n_atoms);
  for (auto& x : st.x) x = rng.uniform_angle();
  for (auto& p : st.p) p = spec.initial_width * rng.normal();
  return st;
}

template <>
TrajectoryStateB make_initial(const Params& params, const IntegratorConfig& config,
                              const EnsembleSpec& spec, Rng& rng) {
  TrajectoryStateB st;
  st.x.resize(params.n_atoms);
  st.p.resize(params.n_atoms);
  for (auto& x : st.x) x = rng.uniform_angle();
  for (auto& p : st.p) p = spec.initial_width * rng.normal();
  st.alpha_re = config.field_re0;
  st.alpha_im = config.field_im0;
  if (config.sample_field) {
    st.alpha_re += 0.5 * rng.normal();
    st.alpha_im += 0.5 * rng.normal();
  }
  return st;
}

void record(TimePoint& tp, const TrajectoryStateA& st) {
  for (double p : st.p) tp.momenta.add(p);
  double sum_cos = 0.0;
  for (double x : st.x) sum_cos += std::cos(x);
  tp.order_sum += std::abs(sum_cos) / static_cast<double>(st.x.size());
  ++tp.n_config;
}

void record(TimePoint& tp, const TrajectoryStateB& st) {
  for (double p : st.p) tp.momenta.add(p);
  double sum_cos = 0.0;
  for (double x : st.x) sum_cos += std::cos(x);
  tp.order_sum += std::abs(sum_cos) / static_cast<double>(st.x.size());
  ++tp.n_config;
  tp.field.add(st.alpha_re, st.alpha_im);
}

bool state_finite(const TrajectoryStateA& st) { return all_finite(st.x) && all_finite(st.p); }
bool state_finite(const TrajectoryStateB& st) {
  return all_finite(st.x) && all_finite(st.p) && std::isfinite(st.alpha_re) &&
         std::isfinite(st.alpha_im);
}

template <typename Stepper, typename State>
EnsembleResult run_impl(const Params& params, const IntegratorConfig& config,
                        const EnsembleSpec& spec, double dt) {
  const OutputGrid grid = make_grid(spec, dt);
  const int n_atoms = params.n_atoms;
  const int n_chunks = (spec.n_traj + spec.chunk_size - 1) / spec.chunk_size;

  std::vector<ChunkPartial> partials(n_chunks);
  for (auto& p : partials) {
    p.series.resize(grid.steps.size());
    for (std::size_t i = 0; i < grid.steps.size(); ++i) p.series[i].t = grid.times[i];
  }

  std::vector<std::vector<double>> samples(grid.sample_times.size());
  for (auto& block : samples)
    block.assign(static_cast<std::size_t>(spec.n_traj) * n_atoms,
                 std::numeric_limits<double>::quiet_NaN());

  std::atomic<int> next_chunk{0};
  auto worker = [&]() {
    Stepper stepper(params, config, dt);
    for (;;) {
      const int c = next_chunk.fetch_add(1);
      if (c >= n_chunks) break;
      ChunkPartial& part = partials[c];
      const double clip0 = stepper.clipped_mass();
      const double trace0 = stepper.clipped_trace();
      const int t_begin = c * spec.chunk_size;
      const int t_end = std::min(spec.n_traj, t_begin + spec.chunk_size);
      for (int traj = t_begin; traj < t_end; ++traj) {
        Rng rng(spec.seed, static_cast<std::uint64_t>(traj));
        State st = make_initial<State>(params, config, spec, rng);
        std::uint64_t step = 0;
        for (std::size_t oi = 0; oi < grid.steps.size(); ++oi) {
          while (step < grid.steps[oi]) {
            stepper.step(st, rng);
            ++step;
          }
          if (!state_finite(st)) {
            ++part.aborted;
            break;
          }
          record(part.series[oi], st);
          const int slot = grid.sample_slot[oi];
          if (slot >= 0) {
            double* dst = samples[slot].data() + static_cast<std::size_t>(traj) * n_atoms;
            for (int j = 0; j < n_atoms; ++j) dst[j] = st.p[j];
          }
        }
      }
      part.clipped = stepper.clipped_mass() - clip0;
      part.trace = stepper.clipped_trace() - trace0;
    }
  };

  int workers = spec.workers;
  if (workers <= 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n_chunks);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  EnsembleResult out;
  out.dt = dt;
  out.n_traj = spec.n_traj;
  out.series.resize(grid.steps.size());
  for (std::size_t i = 0; i < grid.steps.size(); ++i) out.series[i].t = grid.times[i];
  double clipped = 0.0, trace = 0.0;
  for (const auto& part : partials) {  // fixed merge order
    for (std::size_t i = 0; i < grid.steps.size(); ++i) {
      out.series[i].momenta.merge(part.series[i].momenta);
      out.series[i].field.merge(part.series[i].field);
      out.series[i].n_config += part.series[i].n_config;
      out.series[i].order_sum += part.series[i].order_sum;
    }
    out.aborted += part.aborted;
    clipped += part.clipped;
    trace += part.trace;
  }
  out.clip_fraction = trace > 0.0 ? clipped / trace : 0.0;
  out.sample_times = grid.sample_times;
  out.samples = std::move(samples);

  if (out.aborted > 0 &&
      static_cast<double>(out.aborted) > 1e-3 * static_cast<double>(spec.n_traj)) {
    std::ostringstream msg;
    msg << "run_ensemble: " << out.aborted << " of " << spec.n_traj
        << " trajectories left the finite domain";
    throw std::runtime_error(msg.str());
  }
  return out;
}

}  // namespace

EnsembleResult run_ensemble(const Params& params, const IntegratorConfig& config,
                            const EnsembleSpec& spec) {
  if (spec.n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj must be >= 1");
  if (!(spec.t_final > 0.0)) throw std::invalid_argument("run_ensemble: t_final must be > 0");
  double dt = config.dt;
  if (!(dt > 0.0)) dt = default_dt(params, config, spec.initial_width, params.n_atoms);
  if (config.model == Model::LowField)
    return run_impl<LowFieldStepper, TrajectoryStateA>(params, config, spec, dt);
  return run_impl<SemiclassicalFieldStepper, TrajectoryStateB>(params, config, spec, dt);
}

}  // namespace cavcool
