// cavcool: batch harness for the cavity-cooling trajectory models.
//
// Subcommands: relax, steady, sweep-detuning, compare-models, oracle-check,
// field-info, analytics. Exit codes: 0 ok, 1 usage, 2 numerical failure,
// 3 oracle deviation above the configured bound.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cavcool/adiabatic_field.hpp"
#include "cavcool/coefficient_oracle.hpp"
#include "cavcool/config.hpp"
#include "cavcool/constants.hpp"
#include "cavcool/ensemble_stats.hpp"
#include "cavcool/experiments.hpp"
#include "cavcool/fpe_coefficients.hpp"
#include "cavcool/run_io.hpp"

using namespace cavcool;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int workers = 0;
  int trajectories = -1;  // -1: take from config / default
  double dt = 0.0;
  std::string model = "a";
  bool spontaneous = false;
  bool cross_noise = false;
  bool warm_start = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool run_flags = true) {
  cmd->add_option("--config", opt.config_path, "key = value configuration file");
  if (run_flags) {
    cmd->add_option("--out-dir", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "ensemble seed");
    cmd->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
    cmd->add_option("--trajectories", opt.trajectories, "trajectory count");
    cmd->add_option("--dt", opt.dt, "time step in units 2/gamma (0 = model default)");
    cmd->add_option("--model", opt.model, "trajectory model: a (low-field) or b (field)")
        ->check(CLI::IsMember({"a", "b"}));
    cmd->add_flag("--spontaneous", opt.spontaneous, "include spontaneous-emission diffusion");
    cmd->add_flag("--cross-noise", opt.cross_noise,
                  "include the position-momentum cross noise (model a)");
    cmd->add_flag("--warm-start", opt.warm_start,
                  "start momenta at the analytic steady width");
  }
}

struct Loaded {
  KeyValueFile file;
  ScenarioSpec scenario;
  Protocol protocol;
};

Loaded load(const CommonOptions& opt, int default_traj) {
  Loaded l;
  if (!opt.config_path.empty()) l.file = KeyValueFile::parse_file(opt.config_path);
  l.scenario = scenario_from_file(l.file);

  Protocol& pr = l.protocol;
  pr.n_traj = l.file.get_int("run.trajectories", default_traj);
  pr.seed = static_cast<std::uint64_t>(l.file.get_double("run.seed", 1.0));
  pr.workers = l.file.get_int("run.workers", 0);
  pr.dt = l.file.get_double("run.dt", 0.0);
  pr.spontaneous = l.file.get_bool("run.spontaneous", false);
  pr.cross_noise = l.file.get_bool("run.cross_noise", false);
  pr.t_in = l.file.get_double("run.t_in", 1.0);
  pr.horizon_rate_times = l.file.get_double("run.horizon_rate_times", 8.0);
  pr.model = l.file.get_string("run.model", "a") == "b" ? Model::SemiclassicalField
                                                        : Model::LowField;

  // explicit flags override the file
  if (opt.trajectories > 0) pr.n_traj = opt.trajectories;
  if (opt.seed != 1) pr.seed = opt.seed;
  if (opt.workers != 0) pr.workers = opt.workers;
  if (opt.dt > 0.0) pr.dt = opt.dt;
  if (opt.model == "b") pr.model = Model::SemiclassicalField;
  if (opt.spontaneous) pr.spontaneous = true;
  if (opt.cross_noise) pr.cross_noise = true;
  if (opt.warm_start) pr.warm_start = true;

  for (const auto& key : l.file.unused_keys())
    std::cerr << "warning: unused config key '" << key << "'\n";
  return l;
}

std::map<std::string, std::string> run_info(const Loaded& l, const Params& p) {
  std::map<std::string, std::string> info;
  auto put = [&](const std::string& k, double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    info[k] = os.str();
  };
  info["model"] = l.protocol.model == Model::SemiclassicalField ? "b" : "a";
  info["spontaneous"] = l.protocol.spontaneous ? "true" : "false";
  info["cross_noise"] = l.protocol.cross_noise ? "true" : "false";
  info["warm_start"] = l.protocol.warm_start ? "true" : "false";
  put("seed", double(l.protocol.seed));
  put("trajectories", l.protocol.n_traj);
  put("dt", l.protocol.dt);
  put("t_in", l.protocol.t_in);
  put("n_atoms", p.n_atoms);
  put("kappa", p.cavity.kappa);
  put("delta_c", p.cavity.delta_c);
  put("light_shift", p.drv.light_shift);
  put("pump_amp", p.drv.pump_amp);
  put("pump_rabi", p.atom.pump_rabi);
  put("vacuum_rabi", p.atom.vacuum_rabi);
  put("recoil_freq", p.recoil());
  return info;
}

void print_warnings(const Params& p, const Protocol& pr) {
  IntegratorConfig config;
  config.model = pr.model;
  config.spontaneous = pr.spontaneous;
  const double width = initial_momentum_width(p, pr.t_in);
  const double dt = pr.dt > 0.0 ? pr.dt : default_dt(p, config, width, p.n_atoms);
  for (const auto& w : stability_warnings(p, config, dt, width))
    std::cerr << "warning: " << w << "\n";
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw std::runtime_error("empty list");
  return out;
}

int cmd_relax(const CommonOptions& opt, const std::string& snapshots_ms, double t_final_ms) {
  const Loaded l = load(opt, 5000);
  const Params p = l.scenario.build();
  print_warnings(p, l.protocol);
  const auto an = relaxation_analytics(p, p.n_atoms);

  double t_final;
  if (t_final_ms > 0.0) {
    t_final = p.units.time_to_internal(t_final_ms * 1e-3);
  } else if (an.cooling_rate) {
    t_final = l.protocol.horizon_rate_times / *an.cooling_rate;
  } else {
    throw std::runtime_error("no stationary state; pass --t-final-ms explicitly");
  }

  std::vector<double> sample_times;
  for (double ms : parse_list(snapshots_ms))
    sample_times.push_back(p.units.time_to_internal(ms * 1e-3));

  const auto curve = run_relaxation(p, l.protocol, t_final, sample_times);

  std::filesystem::create_directories(opt.out_dir);
  write_relax_csv(opt.out_dir + "/relax.csv", curve, p.units);
  for (std::size_t i = 0; i < curve.sample_times.size(); ++i) {
    const auto hist = histogram_fd(curve.samples[i]);
    const auto overlay = gaussian_overlay(hist, curve.samples[i]);
    const double ms = p.units.time_to_si(curve.sample_times[i]) * 1e3;
    char name[64];
    std::snprintf(name, sizeof(name), "/hist_t%.3fms.csv", ms);
    write_hist_csv(opt.out_dir + name, hist, overlay);
  }

  auto info = run_info(l, p);
  info["t_final"] = std::to_string(t_final);
  info["aborted"] = std::to_string(curve.aborted);
  info["dt_effective"] = std::to_string(curve.dt);
  write_manifest(opt.out_dir + "/manifest.json", l.file.entries(), info);

  std::printf("relax: %zu output times, dp(0)=%.3f -> dp(end)=%.3f (analytic %.3f), wrote %s\n",
              curve.t.size(), curve.dp.front().value, curve.dp.back().value,
              curve.dp_analytic.back(), opt.out_dir.c_str());
  return 0;
}

int cmd_steady(const CommonOptions& opt) {
  const Loaded l = load(opt, 5000);
  const Params p = l.scenario.build();
  print_warnings(p, l.protocol);
  Protocol pr = l.protocol;
  pr.keep_final_samples = true;
  const auto point = measure_steady(p, pr);

  std::filesystem::create_directories(opt.out_dir);
  const std::vector<SteadyPoint> points{point};
  write_sweep_csv(opt.out_dir + "/steady.csv", points);
  if (!point.final_samples.empty()) {
    const auto hist = histogram_fd(point.final_samples);
    write_hist_csv(opt.out_dir + "/steady_hist.csv", hist,
                   gaussian_overlay(hist, point.final_samples));
  }
  auto info = run_info(l, p);
  info["aborted"] = std::to_string(point.aborted);
  info["clip_fraction"] = std::to_string(point.clip_fraction);
  write_manifest(opt.out_dir + "/manifest.json", l.file.entries(), info);

  std::printf("steady: dp = %.4f +- %.4f (analytic %.4f, with spontaneous %.4f), "
              "kurtosis %.4f +- %.4f\n",
              point.dp.value, point.dp.stderr_, point.dp_analytic,
              point.dp_analytic_spont, point.kurtosis, point.kurtosis_stderr);
  return 0;
}

int cmd_sweep(const CommonOptions& opt, const std::string& detunings_csv) {
  const Loaded l = load(opt, 5000);
  const auto over_kappa = parse_list(detunings_csv);
  std::vector<double> detunings;
  for (double r : over_kappa) detunings.push_back(r * l.scenario.kappa);

  const auto points = sweep_detuning(l.scenario, detunings, l.protocol);

  std::filesystem::create_directories(opt.out_dir);
  write_sweep_csv(opt.out_dir + "/sweep.csv", points);
  const Params p = l.scenario.build();
  auto info = run_info(l, p);
  info["detunings_over_kappa"] = detunings_csv;
  write_manifest(opt.out_dir + "/manifest.json", l.file.entries(), info);

  for (const auto& pt : points)
    std::printf("delta_c = %+0.3f: dp = %.4f +- %.4f (analytic %.4f)\n", pt.delta_c,
                pt.dp.value, pt.dp.stderr_, pt.dp_analytic);
  return 0;
}

int cmd_compare(const CommonOptions& opt, const std::string& detunings_csv,
                int trajectories_b, double dt_b) {
  const Loaded l = load(opt, 2000);
  const auto over_kappa = parse_list(detunings_csv);
  std::vector<double> detunings;
  for (double r : over_kappa) detunings.push_back(r * l.scenario.kappa);

  Protocol pa = l.protocol;
  Protocol pb = l.protocol;
  pb.n_traj = trajectories_b > 0 ? trajectories_b : std::max(200, pa.n_traj / 5);
  if (dt_b > 0.0) pb.dt = dt_b;

  const auto points = compare_models(l.scenario, detunings, pa, pb);

  std::filesystem::create_directories(opt.out_dir);
  write_compare_csv(opt.out_dir + "/compare.csv", points);
  const Params p = l.scenario.build();
  auto info = run_info(l, p);
  info["trajectories_b"] = std::to_string(pb.n_traj);
  write_manifest(opt.out_dir + "/manifest.json", l.file.entries(), info);

  for (const auto& pt : points)
    std::printf("delta_c = %+0.3f: dp_a = %.4f +- %.4f, dp_b = %.4f +- %.4f (%.2f sigma)\n",
                pt.low_field.delta_c, pt.low_field.dp.value, pt.low_field.dp.stderr_,
                pt.field.dp.value, pt.field.dp.stderr_, pt.agreement_sigma);
  return 0;
}

int cmd_oracle_check(const CommonOptions& opt, int samples, int n_max, double bound,
                     std::uint64_t oracle_seed) {
  const Loaded l = load(opt, 0);
  const Params p = l.scenario.build();

  Rng rng(oracle_seed);
  double worst = 0.0;
  int worst_idx = 0;
  std::vector<std::vector<double>> configs;
  for (int i = 0; i < samples; ++i) {
    std::vector<double> x(p.n_atoms);
    for (auto& xi : x) xi = rng.uniform_angle();
    configs.push_back(x);
    const double dev = oracle_vs_analytic_deviation(x, p, n_max, l.protocol.spontaneous);
    std::printf("config %2d: max relative deviation %.3e\n", i, dev);
    if (dev > worst) {
      worst = dev;
      worst_idx = i;
    }
  }

  // full table for the worst configuration
  const auto& x = configs[worst_idx];
  const auto orc = oracle_coefficients(x, p, n_max, l.protocol.spontaneous);
  const auto ana = low_field_coefficients(x, p, l.protocol.spontaneous);
  std::printf("\nworst configuration (%d):\n", worst_idx);
  std::printf("%-10s %3s %14s %14s\n", "family", "j", "analytic", "oracle");
  for (int j = 0; j < p.n_atoms; ++j)
    std::printf("%-10s %3d %14.6e %14.6e\n", "drift", j, ana.drift[j], orc.drift[j]);
  for (int j = 0; j < p.n_atoms; ++j)
    std::printf("%-10s %3d %14.6e %14.6e\n", "friction", j, ana.friction(j, j),
                orc.friction(j, j));
  for (int j = 0; j < p.n_atoms; ++j)
    std::printf("%-10s %3d %14.6e %14.6e\n", "diffusion", j, ana.diffusion(j, j),
                orc.diffusion(j, j));
  for (int j = 0; j < p.n_atoms; ++j)
    std::printf("%-10s %3d %14.6e %14.6e\n", "cross", j, ana.cross(j, j), orc.cross(j, j));

  std::printf("\nworst deviation %.3e vs bound %.3e: %s\n", worst, bound,
              worst <= bound ? "ok" : "EXCEEDED");
  return worst <= bound ? 0 : 3;
}

int cmd_field_info(const CommonOptions& opt, const std::string& positions_csv) {
  const Loaded l = load(opt, 0);
  const Params p = l.scenario.build();

  std::vector<double> x;
  if (positions_csv.empty()) {
    x.assign(p.n_atoms, 0.0);  // antinodes
  } else {
    for (double v : parse_list(positions_csv))
      x.push_back(2.0 * constants::pi * v);  // positions given in units of lambda
  }

  const auto snap = field_snapshot(x, p, l.protocol.spontaneous);
  std::printf("alpha        = %.6e %+.6ei\n", snap.alpha.real(), snap.alpha.imag());
  std::printf("|alpha|^2    = %.6e\n", snap.n_photons);
  std::printf("delta_c'     = %.6f (gamma/2)\n", snap.delta_eff);
  std::printf("kappa'       = %.6f (gamma/2)\n", snap.kappa_eff);
  std::printf("n_cav(unif)  = %.6e\n", mean_photon_number_uniform(p, p.n_atoms));
  std::printf("Omega_c      = %.4f (gamma/2), Omega/Omega_c = %.4f\n",
              threshold_pump(p, p.n_atoms),
              p.atom.pump_rabi / threshold_pump(p, p.n_atoms));
  return 0;
}

int cmd_analytics(const CommonOptions& opt) {
  const Loaded l = load(opt, 0);
  const Params p = l.scenario.build();
  const auto an = relaxation_analytics(p, p.n_atoms);
  const double ms = 1e3 * p.units.time_unit();

  std::printf("A (drift rate)     = %.6e (gamma/2)\n", an.drift_rate);
  std::printf("B (diffusion rate) = %.6e (hbar k)^2 gamma/2\n", an.diffusion_rate);
  std::printf("delta1             = %.6f\n", an.delta1);
  std::printf("delta2             = %.6f\n", an.delta2);
  if (an.dp_steady) {
    std::printf("dp_steady          = %.4f hbar k\n", *an.dp_steady);
    std::printf("k_B T              = %.6f hbar gamma/2\n", *an.temperature);
    std::printf("cooling rate       = %.6e (gamma/2)   [1/rate = %.4f ms]\n",
                *an.cooling_rate, ms / *an.cooling_rate);
    std::printf("dp_steady (spont)  = %.4f hbar k (+%.1f%%)\n", *an.dp_steady_spont,
                100.0 * (*an.dp_steady_spont / *an.dp_steady - 1.0));
  } else {
    std::printf("no stationary state (A >= 0)\n");
  }
  const auto checks = validate_regime(p, initial_momentum_width(p, 1.0), p.n_atoms);
  for (const auto& c : checks)
    std::printf("check %-35s ratio %.4f  %s\n", c.name.c_str(), c.ratio,
                c.pass ? "pass" : "WARN");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiclassical cavity-cooling trajectory simulator"};
  app.require_subcommand(1);

  CommonOptions opt;

  auto* relax = app.add_subcommand("relax", "width relaxation curve with snapshot histograms");
  std::string snapshots_ms = "0.1,1,9";
  double t_final_ms = 0.0;
  add_common(relax, opt);
  relax->add_option("--snapshots-ms", snapshots_ms, "histogram snapshot times, ms");
  relax->add_option("--t-final-ms", t_final_ms, "horizon in ms (default 8 cooling times)");

  auto* steady = app.add_subcommand("steady", "single steady-state measurement");
  add_common(steady, opt);

  auto* sweep = app.add_subcommand("sweep-detuning", "steady width across detunings");
  std::string detunings = "-1.5,-1.3,-1.1,-1.0,-0.9,-0.7,-0.5,-0.3";
  add_common(sweep, opt);
  sweep->add_option("--delta-c-over-kappa", detunings, "detuning list in units of kappa");

  auto* compare = app.add_subcommand("compare-models", "low-field vs semiclassical-field widths");
  int trajectories_b = 0;
  double dt_b = 0.0;
  add_common(compare, opt);
  compare->add_option("--delta-c-over-kappa", detunings, "detuning list in units of kappa");
  compare->add_option("--trajectories-b", trajectories_b, "trajectories for the field model");
  compare->add_option("--dt-b", dt_b, "time step for the field model");

  auto* oracle = app.add_subcommand("oracle-check", "analytic vs truncated-Fock coefficients");
  int samples = 8, n_max = 3;
  double bound = 0.01;
  std::uint64_t oracle_seed = 7;
  add_common(oracle, opt, false);
  oracle->add_option("--samples", samples, "number of random pinned configurations");
  oracle->add_option("--n-max", n_max, "photon cutoff");
  oracle->add_option("--bound", bound, "maximum allowed relative deviation");
  oracle->add_option("--seed", oracle_seed, "configuration seed");
  oracle->add_flag("--spontaneous", opt.spontaneous, "include spontaneous terms");

  auto* field = app.add_subcommand("field-info", "adiabatic field quantities");
  std::string positions;
  add_common(field, opt, false);
  field->add_option("--positions", positions, "atom positions in units of lambda");
  field->add_flag("--spontaneous", opt.spontaneous, "include spontaneous terms");

  auto* analytics = app.add_subcommand("analytics", "closed-form relaxation analytics");
  add_common(analytics, opt, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (relax->parsed()) return cmd_relax(opt, snapshots_ms, t_final_ms);
    if (steady->parsed()) return cmd_steady(opt);
    if (sweep->parsed()) return cmd_sweep(opt, detunings);
    if (compare->parsed()) return cmd_compare(opt, detunings, trajectories_b, dt_b);
    if (oracle->parsed()) return cmd_oracle_check(opt, samples, n_max, bound, oracle_seed);
    if (field->parsed()) return cmd_field_info(opt, positions);
    if (analytics->parsed()) return cmd_analytics(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
