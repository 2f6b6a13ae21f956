#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cavcool/config.hpp"
#include "cavcool/constants.hpp"
#include "cavcool/params.hpp"
#include "cavcool/rng.hpp"

using namespace cavcool;

namespace {

AtomSpec test_atom(double delta_a, double gamma, double g, double omega) {
  AtomSpec a;
  a.mass = 100.0;
  a.gamma = gamma;
  a.delta_a = delta_a;
  a.vacuum_rabi = g;
  a.pump_rabi = omega;
  a.u2bar = 0.4;
  return a;
}

}  // namespace

TEST_CASE("derived couplings: gamma -> 0 limit with g = delta_a gives U = delta_a") {
  // U = delta g^2/(delta^2 + gamma^2/4) -> g^2/delta = delta when g = delta
  const AtomSpec atom = test_atom(7.0, 1e-12, 7.0, 0.0);
  CavitySpec cav{0.5, -0.5};
  const auto d = derive_couplings(atom, cav);
  CHECK(d.light_shift == doctest::Approx(7.0).epsilon(1e-9));
}

TEST_CASE("derived couplings: direct substitution") {
  const AtomSpec atom = test_atom(-1000.0, 2.0, 1.0, 0.0);
  CavitySpec cav{0.5, -0.5};
  const auto d = derive_couplings(atom, cav);
  CHECK(d.light_shift == doctest::Approx(-1000.0 / 1.000001e6).epsilon(1e-12));
  CHECK(d.light_shift == doctest::Approx(-9.99999e-4).epsilon(1e-6));
  CHECK(d.pump_amp == 0.0);
  CHECK(d.scatter_rate == doctest::Approx(2.0 / 1.000001e6).epsilon(1e-12));
}

TEST_CASE("derived couplings reject delta_a = 0") {
  const AtomSpec atom = test_atom(0.0, 2.0, 1.0, 1.0);
  CHECK_THROWS_AS(derive_couplings(atom, CavitySpec{0.5, -0.5}), std::invalid_argument);
}

TEST_CASE("derived couplings are homogeneous of degree one") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    AtomSpec atom = test_atom(-20.0 * (1.0 + rng.uniform()), 0.5 + rng.uniform(),
                              1.0 + rng.uniform(), rng.uniform() * 5.0);
    CavitySpec cav{0.5, -0.5};
    const double c = 0.25 + 4.0 * rng.uniform();
    AtomSpec scaled = atom;
    scaled.delta_a *= c;
    scaled.gamma *= c;
    scaled.vacuum_rabi *= c;
    scaled.pump_rabi *= c;
    const auto d0 = derive_couplings(atom, cav);
    const auto d1 = derive_couplings(scaled, cav);
    CHECK(d1.light_shift == doctest::Approx(c * d0.light_shift).epsilon(1e-12));
    CHECK(d1.pump_amp == doctest::Approx(c * d0.pump_amp).epsilon(1e-12));
    CHECK(d1.scatter_rate == doctest::Approx(c * d0.scatter_rate).epsilon(1e-12));
    CHECK(d1.pump_ratio == doctest::Approx(d0.pump_ratio).epsilon(1e-12));
  }
}

TEST_CASE("U/S = g/Omega = 1/s to machine precision") {
  Rng rng(78);
  for (int trial = 0; trial < 50; ++trial) {
    AtomSpec atom = test_atom(-50.0 - 100.0 * rng.uniform(), 2.0, 0.5 + rng.uniform(),
                              0.1 + 10.0 * rng.uniform());
    const auto d = derive_couplings(atom, CavitySpec{0.5, -0.5});
    CHECK(d.light_shift / d.pump_amp ==
          doctest::Approx(atom.vacuum_rabi / atom.pump_rabi).epsilon(1e-14));
    CHECK(d.pump_ratio == doctest::Approx(atom.pump_rabi / atom.vacuum_rabi).epsilon(1e-14));
  }
}

TEST_CASE("unit round trips are the identity within 1e-12") {
  UnitSystem units;
  units.gamma_si = 2.0 * constants::pi * 6e6;
  units.wavenumber_si = 2.0 * constants::pi / 780e-9;
  units.mass_si = constants::rb85_mass_amu * constants::atomic_mass_unit;
  Rng rng(79);
  for (int trial = 0; trial < 100; ++trial) {
    const double w = std::exp(20.0 * (rng.uniform() - 0.5));
    CHECK(units.freq_to_si(units.freq_to_internal(w)) == doctest::Approx(w).epsilon(1e-12));
    CHECK(units.time_to_si(units.time_to_internal(w)) == doctest::Approx(w).epsilon(1e-12));
    CHECK(units.momentum_to_si(units.momentum_to_internal(w)) ==
          doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("paper setup: derived ratios for the 85Rb scenario") {
  const Params p = paper_scenario().build();
  // gamma'/gamma = g^2/(delta_a^2 + gamma^2/4) = U/delta_a
  CHECK(p.drv.scatter_rate / p.atom.gamma ==
        doctest::Approx(p.drv.light_shift / p.atom.delta_a).epsilon(1e-12));
  CHECK(p.drv.light_shift / p.atom.delta_a == doctest::Approx(1e-5).epsilon(1e-9));
  // recoil frequency of 85Rb at 780 nm: 2 pi x 3.86 kHz, i.e. 1.287e-3 gamma/2
  CHECK(p.recoil() == doctest::Approx(1.2874e-3).epsilon(2e-3));
  // N U / delta_c holds as configured
  CHECK(p.n_atoms * p.drv.light_shift / p.cavity.delta_c == doctest::Approx(0.05).epsilon(1e-12));
  // Omega = 0.3 Omega_c lands near 21 gamma/2
  CHECK(p.atom.pump_rabi == doctest::Approx(21.2).epsilon(0.02));
}

TEST_CASE("regime diagnostics") {
  const Params p = paper_scenario().build();

  SUBCASE("dp at the photon recoil is flagged") {
    const auto checks = validate_regime(p, 1.0, p.n_atoms);
    CHECK(checks[0].ratio == doctest::Approx(1.0));
    CHECK_FALSE(checks[0].pass);
  }
  SUBCASE("paper regime at the Doppler width passes everywhere") {
    const double dp = std::sqrt(1.0 / (2.0 * p.recoil()));  // k_B T = hbar gamma/2
    const auto checks = validate_regime(p, dp, p.n_atoms);
    REQUIRE(checks.size() == 4);
    for (const auto& c : checks) {
      CAPTURE(c.name);
      CHECK(c.ratio < 0.5);
      CHECK(c.pass);
    }
    CHECK(checks[0].ratio == doctest::Approx(0.0507).epsilon(0.01));
    CHECK(checks[3].ratio == doctest::Approx(0.32).epsilon(0.01));
  }
  SUBCASE("no drive means no trapping ratio") {
    ScenarioSpec s = paper_scenario();
    s.pump_rabi = 0.0;
    const Params p0 = s.build();
    const auto checks = validate_regime(p0, 10.0, p0.n_atoms);
    CHECK(checks[2].ratio == 0.0);
    CHECK(checks[2].pass);
  }
}

TEST_CASE("invalid specs are rejected") {
  AtomSpec atom = test_atom(-500.0, 2.0, 1.0, 1.0);
  atom.mass = -1.0;
  CHECK_THROWS(atom.validate());
  CavitySpec cav{-0.5, -0.5};
  CHECK_THROWS(cav.validate());
  CHECK_THROWS(make_params(test_atom(-500, 2, 1, 1), CavitySpec{0.5, -0.5}, UnitSystem{}, 0));
}
