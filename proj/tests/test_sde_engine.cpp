#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "cavcool/config.hpp"
#include "cavcool/ensemble_stats.hpp"
#include "cavcool/fpe_coefficients.hpp"
#include "cavcool/rng.hpp"
#include "cavcool/sde_engine.hpp"

using namespace cavcool;

namespace {

std::vector<double> random_config(Rng& rng, int n) {
  std::vector<double> x(n);
  for (auto& xi : x) xi = rng.uniform_angle();
  return x;
}

Eigen::MatrixXd random_psd(Rng& rng, int n) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a * a.transpose();
}

}  // namespace

TEST_CASE("diffusion factorization") {
  Rng rng(401);

  SUBCASE("zero matrix") {
    const auto fac = factorize_diffusion(Eigen::MatrixXd::Zero(4, 4));
    CHECK(fac.factor.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fac.clipped_mass == 0.0);
  }
  SUBCASE("rank-1 exact reconstruction") {
    Eigen::VectorXd v(5);
    for (int i = 0; i < 5; ++i) v[i] = rng.normal();
    const Eigen::MatrixXd d = 0.37 * (v * v.transpose());
    const auto fac = factorize_diffusion(d);
    CHECK((fac.factor * fac.factor.transpose() - d).cwiseAbs().maxCoeff() <
          1e-12 * d.cwiseAbs().maxCoeff());
  }
  SUBCASE("random PSD 7x7 instances") {
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::MatrixXd d = random_psd(rng, 7);
      const auto fac = factorize_diffusion(d);
      CHECK((fac.factor * fac.factor.transpose() - d).cwiseAbs().maxCoeff() <
            1e-10 * d.cwiseAbs().maxCoeff());
      CHECK(fac.clipped_mass < 1e-12 * d.trace());
    }
  }
  SUBCASE("indefinite matrices are clipped with the mass recorded") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -0.25;
    const auto fac = factorize_diffusion(d);
    CHECK(fac.clipped_mass == doctest::Approx(0.25));
    const Eigen::MatrixXd bbt = fac.factor * fac.factor.transpose();
    CHECK(bbt(0, 0) == doctest::Approx(1.0));
    CHECK(bbt(1, 1) == doctest::Approx(0.0));
  }
  SUBCASE("asymmetric input throws") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 1) = 1e-3;
    CHECK_THROWS_AS(factorize_diffusion(d), std::invalid_argument);
  }
}

TEST_CASE("free flight without drive") {
  ScenarioSpec s = paper_scenario();
  s.pump_rabi = 0.0;
  const Params p = s.build();
  IntegratorConfig config;
  config.dt = 0.5;
  LowFieldStepper stepper(p, config, config.dt);
  Rng rng(402);
  TrajectoryStateA st;
  st.x = {0.3, 1.7, 4.0, 5.1, 2.2};
  st.p = {1.0, -2.0, 0.5, 3.0, 0.0};
  const auto x0 = st.x;
  const auto p0 = st.p;
  for (int i = 0; i < 1000; ++i) stepper.step(st, rng);
  for (int j = 0; j < 5; ++j) {
    CHECK(st.p[j] == p0[j]);
    CHECK(st.x[j] == doctest::Approx(x0[j] + 2.0 * p.recoil() * p0[j] * 500.0).epsilon(1e-12));
  }
}

TEST_CASE("single atom pinned at the antinode sees no noise") {
  ScenarioSpec s = paper_scenario();
  s.n_atoms = 1;
  const Params p = s.build();
  IntegratorConfig config;
  config.dt = 0.5;
  config.spontaneous = false;
  LowFieldStepper stepper(p, config, config.dt);
  Rng rng(403);
  TrajectoryStateA st;
  st.x = {0.0};
  st.p = {0.0};
  for (int i = 0; i < 200; ++i) stepper.step(st, rng);
  CHECK(st.x[0] == 0.0);
  CHECK(st.p[0] == 0.0);
}

TEST_CASE("low-field single-step moments match the coefficient formulas") {
  ScenarioSpec s = paper_scenario();
  s.delta_c = -0.35;
  const Params p = s.build();
  Rng cfg_rng(404);
  const auto x0 = random_config(cfg_rng, 5);
  std::vector<double> p0(5);
  for (auto& v : p0) v = 10.0 * cfg_rng.normal();
  const double dt = 0.5;

  const Eigen::VectorXd expected_dp =
      dt * (drift_force(x0, p) + friction_term(x0, p0, p));

  for (bool spontaneous : {false, true}) {
    CAPTURE(spontaneous);
    IntegratorConfig config;
    config.dt = dt;
    config.spontaneous = spontaneous;
    LowFieldStepper stepper(p, config, dt);
    const Eigen::MatrixXd dmat = diffusion_matrix(x0, p, spontaneous);

    const int n_reps = 200000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(5, 5);
    for (int rep = 0; rep < n_reps; ++rep) {
      Rng rng(404, rep);
      TrajectoryStateA st;
      st.x = x0;
      st.p = p0;
      stepper.step(st, rng);
      Eigen::VectorXd dp(5);
      for (int j = 0; j < 5; ++j) dp[j] = st.p[j] - p0[j];
      mean += dp;
      cov += dp * dp.transpose();
    }
    mean /= n_reps;
    cov = cov / n_reps - mean * mean.transpose();

    const double dp_sd = std::sqrt(2.0 * dmat.diagonal().maxCoeff() * dt);
    for (int j = 0; j < 5; ++j) {
      const double se = dp_sd / std::sqrt(double(n_reps));
      CHECK(std::abs(mean[j] - expected_dp[j]) < 3.0 * se);
      for (int l = 0; l < 5; ++l) {
        const double target = 2.0 * dmat(j, l) * dt;
        const double se_cov = 2.0 * dp_sd * dp_sd / std::sqrt(double(n_reps));
        CHECK(std::abs(cov(j, l) - target) < 3.0 * se_cov + 1e-12);
      }
    }
  }
}

TEST_CASE("cross-noise mode realizes the position-momentum covariance") {
  ScenarioSpec s = paper_scenario();
  s.delta_c = -0.35;  // away from the eta zero crossing
  const Params p = s.build();
  Rng cfg_rng(405);
  const auto x0 = random_config(cfg_rng, 5);
  const std::vector<double> p0(5, 0.0);
  const double dt = 0.5;

  IntegratorConfig config;
  config.dt = dt;
  config.cross_noise = true;
  LowFieldStepper stepper(p, config, dt);
  const Eigen::MatrixXd eta = cross_matrix(x0, p);

  const int n_reps = 100000;
  Eigen::VectorXd mean_dp = Eigen::VectorXd::Zero(5), mean_dx = Eigen::VectorXd::Zero(5);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(5, 5);
  Eigen::VectorXd var_dx = Eigen::VectorXd::Zero(5);
  for (int rep = 0; rep < n_reps; ++rep) {
    Rng rng(405, rep);
    TrajectoryStateA st;
    st.x = x0;
    st.p = p0;
    stepper.step(st, rng);
    Eigen::VectorXd dp(5), dx(5);
    for (int j = 0; j < 5; ++j) {
      dp[j] = st.p[j] - p0[j];
      dx[j] = st.x[j] - x0[j];
    }
    mean_dp += dp;
    mean_dx += dx;
    cross += dp * dx.transpose();
    var_dx += dx.cwiseAbs2();
  }
  mean_dp /= n_reps;
  mean_dx /= n_reps;
  cross = cross / n_reps - mean_dp * mean_dx.transpose();
  var_dx = var_dx / n_reps - mean_dx.cwiseAbs2();

  const double eta_scale = eta.cwiseAbs().maxCoeff() * dt;
  const double dp_sd = std::sqrt(2.0 * diffusion_matrix(x0, p, false).diagonal().maxCoeff() * dt);
  const double dx_sd = std::sqrt(var_dx.maxCoeff());
  for (int j = 0; j < 5; ++j)
    for (int l = 0; l < 5; ++l) {
      const double se = 3.0 * dp_sd * dx_sd / std::sqrt(double(n_reps)) +
                        0.05 * eta_scale + 1e-14;
      CHECK(std::abs(cross(j, l) - eta(j, l) * dt) < se);
    }
  CHECK(stepper.clipped_mass() > 0.0);  // the zero position block is completed
  CHECK(stepper.clipped_mass() < 1e-2 * stepper.clipped_trace());
}

TEST_CASE("semiclassical-field stepper: drift and the discrete OU variance") {
  const Params p = paper_scenario().build();

  SUBCASE("single-step mean matches the drift at a pinned state") {
    Rng cfg_rng(406);
    const auto x0 = random_config(cfg_rng, 5);
    const std::vector<double> p0{1.0, -0.5, 2.0, 0.0, -1.5};
    const double ar0 = 0.8, ai0 = -0.3;
    const double dt = 0.02;
    for (bool spontaneous : {false, true}) {
      CAPTURE(spontaneous);
      IntegratorConfig config;
      config.model = Model::SemiclassicalField;
      config.dt = dt;
      config.spontaneous = spontaneous;
      SemiclassicalFieldStepper stepper(p, config, dt);

      const int n_reps = 100000;
      double mean_ar = 0.0, mean_ai = 0.0;
      Eigen::VectorXd mean_dp = Eigen::VectorXd::Zero(5);
      for (int rep = 0; rep < n_reps; ++rep) {
        Rng rng(406, rep);
        TrajectoryStateB st;
        st.x = x0;
        st.p = p0;
        st.alpha_re = ar0;
        st.alpha_im = ai0;
        stepper.step(st, rng);
        mean_ar += st.alpha_re - ar0;
        mean_ai += st.alpha_im - ai0;
        for (int j = 0; j < 5; ++j) mean_dp[j] += st.p[j] - p0[j];
      }
      mean_ar /= n_reps;
      mean_ai /= n_reps;
      mean_dp /= n_reps;

      double sum_cos = 0.0, sum_cos2 = 0.0;
      for (double xi : x0) {
        sum_cos += std::cos(xi);
        sum_cos2 += std::cos(xi) * std::cos(xi);
      }
      const double gamma_half = spontaneous ? 0.5 * p.drv.scatter_rate : 0.0;
      const double de = p.cavity.delta_c - p.drv.light_shift * sum_cos2;
      const double ke = p.cavity.kappa + gamma_half * sum_cos2;
      const double s_ratio = p.drv.pump_ratio;
      const double drift_ar = (-de * ai0 - ke * ar0 - gamma_half * s_ratio * sum_cos) * dt;
      const double drift_ai = (de * ar0 - ke * ai0 - s_ratio * p.drv.light_shift * sum_cos) * dt;
      const double field_se = 3.0 * std::sqrt(0.5 * ke * dt / n_reps) + 1e-12;
      CHECK(std::abs(mean_ar - drift_ar) < field_se);
      CHECK(std::abs(mean_ai - drift_ai) < field_se);

      const double nph = ar0 * ar0 + ai0 * ai0;
      for (int j = 0; j < 5; ++j) {
        const double force =
            2.0 * s_ratio * p.drv.light_shift * ar0 * std::sin(x0[j]) -
            2.0 * gamma_half * s_ratio * ai0 * std::sin(x0[j]) +
            p.drv.light_shift * nph * std::sin(2.0 * x0[j]);
        if (!spontaneous) {
          CHECK(mean_dp[j] == doctest::Approx(force * dt).epsilon(1e-12));
        } else {
          const double kick_se = 3.0 * std::sqrt(2.0 * 2.0 * gamma_half *
                                                 (nph + s_ratio * s_ratio * p.atom.u2bar) *
                                                 dt / n_reps);
          CHECK(std::abs(mean_dp[j] - force * dt) < kick_se + 1e-12);
        }
      }
    }
  }

  SUBCASE("frozen atoms: stationary field variance follows the discrete chain") {
    // Euler-Maruyama makes the field an exact AR(1) chain; its stationary
    // per-quadrature variance is a dt / (1 - |1 + (i delta' - kappa') dt|^2),
    // which approaches the vacuum value 1/4 as dt -> 0
    IntegratorConfig config;
    config.model = Model::SemiclassicalField;
    config.freeze_atoms = true;
    config.dt = 0.1;
    SemiclassicalFieldStepper stepper(p, config, config.dt);

    TrajectoryStateB st;
    st.x.assign(5, 1.5707963267948966);  // nodes: no pump, no detuning shift
    st.p.assign(5, 0.0);
    st.alpha_re = 0.0;
    st.alpha_im = 0.0;
    Rng rng(407);
    const int burn = 2000, n_samples = 400000, stride = 5;
    for (int i = 0; i < burn; ++i) stepper.step(st, rng);
    double s1r = 0, s1i = 0, s2r = 0, s2i = 0, sri = 0;
    for (int i = 0; i < n_samples; ++i) {
      for (int k = 0; k < stride; ++k) stepper.step(st, rng);
      s1r += st.alpha_re;
      s1i += st.alpha_im;
      s2r += st.alpha_re * st.alpha_re;
      s2i += st.alpha_im * st.alpha_im;
      sri += st.alpha_re * st.alpha_im;
    }
    const double var_r = s2r / n_samples - (s1r / n_samples) * (s1r / n_samples);
    const double var_i = s2i / n_samples - (s1i / n_samples) * (s1i / n_samples);
    const double cov_ri = sri / n_samples - (s1r / n_samples) * (s1i / n_samples);

    const double kappa = p.cavity.kappa, delta = p.cavity.delta_c;
    const double mu2 = (1.0 - kappa * config.dt) * (1.0 - kappa * config.dt) +
                       delta * config.dt * delta * config.dt;
    const double predicted = 0.5 * kappa * config.dt / (1.0 - mu2);
    const double n_eff = n_samples * std::min(1.0, stride * config.dt * kappa);
    const double se = predicted * std::sqrt(2.0 / n_eff);
    CHECK(std::abs(var_r - predicted) < 4.0 * se);
    CHECK(std::abs(var_i - predicted) < 4.0 * se);
    CHECK(std::abs(cov_ri) < 4.0 * se);
    CHECK(predicted == doctest::Approx(0.25).epsilon(0.06));
  }
}

TEST_CASE("ensemble driver") {
  const Params p = paper_scenario().build();
  const auto an = relaxation_analytics(p, 5);

  EnsembleSpec spec;
  spec.n_traj = 300;
  spec.seed = 99;
  spec.t_final = 2000.0;
  spec.output_times = {0.0, 500.0, 1000.0, 2000.0};
  spec.sample_times = {2000.0};
  spec.initial_width = initial_momentum_width(p, 1.0);

  IntegratorConfig config;
  config.dt = 0.5;

  SUBCASE("bit-identical results for any worker count") {
    EnsembleSpec s1 = spec, s4 = spec;
    s1.workers = 1;
    s4.workers = 4;
    const auto r1 = run_ensemble(p, config, s1);
    const auto r4 = run_ensemble(p, config, s4);
    REQUIRE(r1.series.size() == r4.series.size());
    for (std::size_t i = 0; i < r1.series.size(); ++i) {
      CHECK(r1.series[i].momenta.sum == r4.series[i].momenta.sum);
      CHECK(r1.series[i].momenta.sum2 == r4.series[i].momenta.sum2);
      CHECK(r1.series[i].momenta.sum4 == r4.series[i].momenta.sum4);
      CHECK(r1.series[i].order_sum == r4.series[i].order_sum);
    }
    REQUIRE(r1.samples.size() == 1);
    CHECK(r1.samples[0] == r4.samples[0]);

    EnsembleSpec s2 = spec;
    s2.seed = 100;
    const auto r2 = run_ensemble(p, config, s2);
    CHECK(r1.series.back().momenta.sum2 != r2.series.back().momenta.sum2);
  }

  SUBCASE("initial ensemble reproduces the requested width") {
    EnsembleSpec s0 = spec;
    s0.n_traj = 3000;
    s0.t_final = 1.0;
    s0.output_times = {0.0};
    s0.sample_times = {};
    const auto r = run_ensemble(p, config, s0);
    const auto w = width_from_moments(r.series[0].momenta);
    CHECK(std::abs(w.value - spec.initial_width) < 3.0 * w.stderr_);
    const double order = r.series[0].order_sum / double(r.series[0].n_config);
    CHECK(order == doctest::Approx(0.256).epsilon(0.1));
  }

  SUBCASE("momentum width decays toward the analytic curve") {
    EnsembleSpec s0 = spec;
    s0.n_traj = 500;
    s0.t_final = 4.0 / *an.cooling_rate;
    s0.output_times = {0.0, s0.t_final};
    const auto r = run_ensemble(p, config, s0);
    const auto w0 = width_from_moments(r.series.front().momenta);
    const auto w1 = width_from_moments(r.series.back().momenta);
    const double expected = width_evolution(spec.initial_width, s0.t_final, an);
    CHECK(w1.value < w0.value);
    CHECK(std::abs(w1.value - expected) < 4.0 * w1.stderr_);
  }

  SUBCASE("diverging runs are counted and rejected") {
    IntegratorConfig bad;
    bad.model = Model::SemiclassicalField;
    bad.dt = 10.0;  // kappa' dt >> 1: the field chain is unstable
    EnsembleSpec s0 = spec;
    s0.n_traj = 50;
    s0.t_final = 5000.0;
    CHECK_THROWS_AS(run_ensemble(p, bad, s0), std::runtime_error);
  }

  SUBCASE("stability warnings fire for oversized steps") {
    IntegratorConfig big;
    big.dt = 400.0;
    CHECK_FALSE(stability_warnings(p, big, big.dt, spec.initial_width).empty());
    IntegratorConfig ok;
    ok.dt = 0.5;
    CHECK(stability_warnings(p, ok, ok.dt, spec.initial_width).empty());
  }
}

TEST_CASE("default step sizes") {
  const Params p = paper_scenario().build();
  IntegratorConfig a;
  const double dta = default_dt(p, a, 19.7, 5);
  CHECK(dta > 0.0);
  CHECK(dta <= 0.2);
  IntegratorConfig b;
  b.model = Model::SemiclassicalField;
  const double dtb = default_dt(p, b, 19.7, 5);
  CHECK(dtb == doctest::Approx(0.01 / 0.525).epsilon(1e-9));
}
