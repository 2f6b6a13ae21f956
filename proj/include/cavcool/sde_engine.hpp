#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavcool/params.hpp"
#include "cavcool/rng.hpp"

namespace cavcool {

// Ito integration of the two trajectory models:
//   LowField           -- cavity eliminated, state (x, p), correlated momentum noise
//   SemiclassicalField -- explicit field quadratures, state (x, p, alpha_r, alpha_i),
//                         (N+2)-dimensional correlated noise
// Euler-Maruyama with fixed step throughout. Internal units everywhere.

enum class Model { LowField, SemiclassicalField };

struct IntegratorConfig {
  double dt = 0.0;  // <= 0 selects the per-model default
  Model model = Model::LowField;
  bool spontaneous = false;
  bool cross_noise = false;      // position-momentum cross noise (LowField only)
  bool frozen_detuning = false;  // freeze delta_c' at delta_c - N U / 2
  bool freeze_atoms = false;     // pin atoms, evolve only the field (diagnostics)
  double field_re0 = 5.0;        // initial field quadratures (SemiclassicalField)
  double field_im0 = 0.0;
  bool sample_field = false;     // Gaussian field init, per-quadrature variance 1/4
};

struct TrajectoryStateA {
  std::vector<double> x, p;  // k x_j and p_j / hbar k
  double t = 0.0;
};

struct TrajectoryStateB {
  std::vector<double> x, p;
  double alpha_re = 0.0, alpha_im = 0.0;
  double t = 0.0;
};

// B with B B^T equal to D after clipping negative eigenvalues to zero.
struct DiffusionFactorization {
  Eigen::MatrixXd factor;      // B
  double clipped_mass = 0.0;   // sum of |negative eigenvalues| removed
  double trace = 0.0;
};

// Throws if D deviates from symmetry by more than 1e-12 * max|D|.
DiffusionFactorization factorize_diffusion(const Eigen::MatrixXd& d);

// (N+2)x(N+2) noise covariance of the semiclassical-field model for state
// (x, alpha): field block kappa'/2 per quadrature, field-momentum couplings
// -(1/2) Gamma sin(2kx_j) alpha and the per-atom recoil diagonal. Rows 0, 1
// are the field quadratures, rows 2.. the atomic momenta.
Eigen::MatrixXd field_diffusion_matrix(std::span<const double> x, double alpha_re,
                                       double alpha_im, const Params& params,
                                       bool spontaneous);

// Default step sizes: for the low-field model the step resolves the cooling
// rate and the optical phase advanced per step; for the semiclassical-field
// model it resolves the field rates kappa' and |delta_c'|.
double default_dt(const Params& params, const IntegratorConfig& config,
                  double initial_width, int n_atoms);

// Human-readable warnings when dt under-resolves a dynamical rate.
std::vector<std::string> stability_warnings(const Params& params,
                                            const IntegratorConfig& config, double dt,
                                            double initial_width);

// One Euler-Maruyama step of the cavity-eliminated model. Coefficients are
// evaluated at the pre-step state; without cross noise the momentum kick uses
// the rank-1-plus-diagonal structure of the diffusion matrix directly.
class LowFieldStepper {
 public:
  LowFieldStepper(const Params& params, const IntegratorConfig& config, double dt);
  void step(TrajectoryStateA& state, Rng& rng);
  double dt() const { return dt_; }
  double clipped_mass() const { return clipped_mass_; }
  double clipped_trace() const { return clipped_trace_; }

 private:
  int n_;
  double dt_, sqrt_dt_;
  double kappa2_, delta_c_, light_shift_, two_wr_;
  double drift_pref_, fric_pref_, diff_pref_, spont_diff_;
  bool spontaneous_, cross_noise_;
  std::optional<double> frozen_delta_;
  std::vector<double> sin_, cos_, kick_;
  Eigen::MatrixXd joint_;
  Eigen::VectorXd noise_in_, noise_out_;
  double clipped_mass_ = 0.0, clipped_trace_ = 0.0;
};

// One Euler-Maruyama step of the semiclassical-field model. With spontaneous
// emission off the noise reduces to the two field quadratures at rate
// kappa'/2; otherwise the full (N+2) covariance is factorized each step.
class SemiclassicalFieldStepper {
 public:
  SemiclassicalFieldStepper(const Params& params, const IntegratorConfig& config, double dt);
  void step(TrajectoryStateB& state, Rng& rng);
  double dt() const { return dt_; }
  double clipped_mass() const { return clipped_mass_; }
  double clipped_trace() const { return clipped_trace_; }

 private:
  int n_;
  double dt_, sqrt_dt_;
  double kappa_, delta_c_, light_shift_, pump_amp_, two_wr_;
  double gamma_half_, pump_ratio_, u2bar_;
  bool freeze_atoms_;
  std::optional<double> frozen_delta_;
  std::vector<double> sin_, cos_;
  Params params_;  // for the correlated-noise assembly
  Eigen::VectorXd noise_in_, noise_out_;
  double clipped_mass_ = 0.0, clipped_trace_ = 0.0;
};

// --- ensemble driver ---------------------------------------------------

// Pooled momentum moments; merging is associative and order-independent, and
// chunks are always merged in index order so results are bit-identical for
// any worker count.
struct Moments {
  std::uint64_t n = 0;
  double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
  void add(double v) {
    ++n;
    const double v2 = v * v;
    sum += v;
    sum2 += v2;
    sum3 += v2 * v;
    sum4 += v2 * v2;
  }
  void merge(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sum2 += o.sum2;
    sum3 += o.sum3;
    sum4 += o.sum4;
  }
};

struct FieldMoments {
  std::uint64_t n = 0;
  double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0, reim = 0.0, nph = 0.0;
  void add(double ar, double ai) {
    ++n;
    re += ar;
    im += ai;
    re2 += ar * ar;
    im2 += ai * ai;
    reim += ar * ai;
    nph += ar * ar + ai * ai;
  }
  void merge(const FieldMoments& o) {
    n += o.n;
    re += o.re;
    im += o.im;
    re2 += o.re2;
    im2 += o.im2;
    reim += o.reim;
    nph += o.nph;
  }
};

struct TimePoint {
  double t = 0.0;
  Moments momenta;
  FieldMoments field;         // populated for the semiclassical-field model
  std::uint64_t n_config = 0;  // trajectories contributing
  double order_sum = 0.0;      // sum over trajectories of |sum_j cos(k x_j)| / N
};

struct EnsembleSpec {
  int n_traj = 0;
  int workers = 0;  // 0 = hardware concurrency; result independent of the value
  std::uint64_t seed = 1;
  double t_final = 0.0;
  std::vector<double> output_times;  // snapped to the dt grid
  std::vector<double> sample_times;  // times at which raw pooled momenta are kept
  double initial_width = 0.0;        // per-atom momentum width, hbar k
  int chunk_size = 16;               // trajectories per work unit (fixed)
};

struct EnsembleResult {
  std::vector<TimePoint> series;
  std::vector<double> sample_times;            // as snapped
  std::vector<std::vector<double>> samples;    // pooled momenta per sample time
  std::uint64_t n_traj = 0;
  std::uint64_t aborted = 0;
  double clip_fraction = 0.0;  // clipped noise mass / total trace, all factorizations
  double dt = 0.0;
};

// Integrates n_traj independent trajectories. Per-trajectory RNG streams are
// derived from (seed, trajectory index); trajectories are processed in fixed
// chunks whose partial sums are merged in chunk order, so the result is
// bit-identical for any worker count. Throws if more than 0.1% of
// trajectories leave the finite domain.
EnsembleResult run_ensemble(const Params& params, const IntegratorConfig& config,
                            const EnsembleSpec& spec);

}  // namespace cavcool
