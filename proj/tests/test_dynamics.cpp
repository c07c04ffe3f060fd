#include <catch2/catch_amalgamated.hpp>
#include <numbers>

#include "hall/dynamics.hpp"

using namespace hall;

namespace {
constexpr double kPi = std::numbers::pi;

// Naturally well-gapped small sector (gap ~0.95): the adiabatic regime is
// reachable with moderate rate ladders.
HamiltonianSpec gapped_spec(double U = 0.5) {
  return harper_spec(3, 1.0, 2 * kPi / 3, U, 0.0, 3);
}

SiteFunction smooth_theta(const TorusLattice& lat, double amp) {
  SiteFunction th(lat);
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    th.at_index(i) = amp * (std::cos(2 * kPi * s.x1 / lat.L()) +
                            0.6 * std::sin(2 * kPi * s.x2 / lat.L() + 0.3));
  }
  return th;
}

ManyBodyOperator short_current(const HamiltonianSpec& spec) {
  DualPath g;
  g.edges.push_back(make_dual_edge(spec.lattice, {0, 0}, 1, +1));
  return current_path(spec, g).op;
}

}  // namespace

TEST_CASE("switching function shape") {
  SwitchingFunction a;
  SECTION("flat start: the first derivatives vanish at s = -1") {
    REQUIRE(a(-1.0) == 0.0);
    REQUIRE(a.max_abs_derivative(-1.0) < 1e-10);
  }
  SECTION("unit slope through zero amplitude at s = 0") {
    REQUIRE(a(0.0) == 0.0);
    REQUIRE(a.slope_at_zero() == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("pure linear ramp on the final stretch") {
    REQUIRE(a(-0.2) == Catch::Approx(-0.2).margin(1e-14));
  }
}

TEST_CASE("undriven propagation is stationary") {
  auto spec = gapped_spec();
  RampProtocol ramp;
  ramp.drive = OneForm(spec.lattice);
  ramp.rate = 0.2;
  auto run = propagate(spec, ramp, short_current(spec));
  REQUIRE(run.norm_drift < 1e-8);
  REQUIRE(run.ground_fidelity == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("slower ramps stay closer to the instantaneous ground state") {
  auto spec = gapped_spec();
  OneForm A = 0.4 * exterior_derivative(spec.lattice, smooth_theta(spec.lattice, 0.5));
  auto infidelity = [&](double eps) {
    RampProtocol ramp;
    ramp.drive = A;
    ramp.rate = eps;
    auto run = propagate(spec, ramp, short_current(spec));
    return 1.0 - run.ground_fidelity;  // at s = 0 the instantaneous GS is the initial one
  };
  double coarse = infidelity(0.2), fine = infidelity(0.05);
  REQUIRE(fine < coarse);
}

TEST_CASE("step refinement does not move the traces") {
  auto spec = gapped_spec();
  OneForm A = 0.3 * exterior_derivative(spec.lattice, smooth_theta(spec.lattice, 0.4));
  auto final_value = [&](double dt_factor) {
    RampProtocol ramp;
    ramp.drive = A;
    ramp.rate = 0.1;
    ramp.dt_factor = dt_factor;
    return propagate(spec, ramp, short_current(spec)).final_observable;
  };
  REQUIRE(std::abs(final_value(0.05) - final_value(0.025)) < 1e-6);
}

TEST_CASE("adiabatic response of an exact drive matches the kubo value") {
  auto spec = gapped_spec();
  SiteFunction th = smooth_theta(spec.lattice, 0.3);
  OneForm A = exterior_derivative(spec.lattice, th);
  auto J = short_current(spec);

  auto resp = adiabatic_response(spec, A, J, {0.08, 0.04, 0.02, 0.01});
  SpectralCache c(assemble(spec), SpectralMode::Full);
  double kubo = kubo_resolvent(c, J, potential_operator(spec.basis(), th), 0.0).real();
  double spectral = adiabatic_response_spectral(c, spec, A, J);

  INFO("tse=" << resp.value << " +- " << resp.error_bar << " kubo=" << kubo
              << " spectral=" << spectral);
  REQUIRE(std::abs(spectral - kubo) < 1e-10);  // exact identity for global d theta
  REQUIRE(std::abs(resp.value - kubo) < std::max(2.5 * resp.error_bar, 2e-3));
}

TEST_CASE("refining the ladder shrinks the error bar and keeps the value") {
  auto spec = gapped_spec(0.0);
  SiteFunction th = smooth_theta(spec.lattice, 0.25);
  OneForm A = exterior_derivative(spec.lattice, th);
  auto J = short_current(spec);
  auto coarse = adiabatic_response(spec, A, J, {0.16, 0.08, 0.04, 0.02});
  auto fine = adiabatic_response(spec, A, J, {0.08, 0.04, 0.02, 0.01});
  REQUIRE(fine.error_bar < coarse.error_bar);
}

TEST_CASE("response ladder validation") {
  auto spec = gapped_spec();
  OneForm A(spec.lattice);
  auto J = short_current(spec);
  REQUIRE_THROWS_AS(adiabatic_response(spec, A, J, {0.1, 0.2, 0.05}), ConfigError);
  REQUIRE_THROWS_AS(adiabatic_response(spec, A, J, {0.1, 0.05}), ConfigError);
}

TEST_CASE("undriven response vanishes for every rate") {
  auto spec = gapped_spec();
  OneForm zero(spec.lattice);
  auto resp = adiabatic_response(spec, zero, short_current(spec), {0.4, 0.2, 0.1});
  for (double q : resp.quotients) REQUIRE(std::abs(q) < 1e-7);
  REQUIRE(std::abs(resp.value) < 1e-6);
}

TEST_CASE("response is linear in the drive at leading order") {
  auto spec = gapped_spec();
  OneForm A = 0.25 * exterior_derivative(spec.lattice, smooth_theta(spec.lattice, 0.4));
  auto J = short_current(spec);
  std::vector<double> ladder{0.08, 0.04, 0.02};
  auto r1 = adiabatic_response(spec, A, J, ladder);
  auto r2 = adiabatic_response(spec, 2.0 * A, J, ladder);
  double bars = 2 * (r2.error_bar + 2 * r1.error_bar) + 1e-4;
  REQUIRE(std::abs(r2.value - 2 * r1.value) < bars);
}

TEST_CASE("emf experiments") {
  auto spec = gapped_spec();
  const auto& lat = spec.lattice;
  SECTION("zero drive is degenerate") {
    DualPath g;
    for (int a = -1; a < 2; ++a) g.edges.push_back(make_dual_edge(lat, {lat.wrap(a), 0}, 1, +1));
    auto r = emf_experiment(spec, g, OneForm(lat), 0.5, {0.4, 0.2, 0.1});
    REQUIRE(r.degenerate_drive);
    REQUIRE(r.emf == 0.0);
  }
  SECTION("drives touching the endpoints are rejected") {
    DualPath g;
    g.edges.push_back(make_dual_edge(lat, {0, 0}, 1, +1));
    OneForm A = 0.3 * standard_flux_form(lat, 1);  // nonzero everywhere
    REQUIRE_THROWS_AS(emf_experiment(spec, g, A, 1.0, {0.4, 0.2, 0.1}), ConfigError);
  }
  SECTION("vortical drives are rejected") {
    DualPath g;
    g.edges.push_back(make_dual_edge(lat, {0, 0}, 1, +1));
    OneForm A(lat);
    A.set(lat, {Site{1, 1}, Site{1, 0}}, 0.4);  // single edge: vortex pair
    REQUIRE_THROWS_AS(emf_experiment(spec, g, A, 0.4, {0.4, 0.2, 0.1}), ConfigError);
  }
  SECTION("closed winding path against a localized voltage band") {
    // gamma: full dual circle at x2 = 1/2; A = c * d(step in x1) cut to the
    // jump column, so the lift crosses it exactly once
    DualPath g;
    for (int a = 0; a < lat.L(); ++a)
      g.edges.push_back(make_dual_edge(lat, {lat.wrap(lat.coord_min() + a), 0}, 1, +1));
    REQUIRE(g.closed());
    const double c = 0.35;
    OneForm A(lat);
    for (int x2 = lat.coord_min(); x2 < lat.coord_min() + lat.L(); ++x2)
      A.set(lat, {Site{0, x2}, Site{1, x2}}, c);
    REQUIRE(is_vortex_free(lat, A));
    auto r = emf_experiment(spec, g, A, 0.0, {0.04, 0.02, 0.01});
    REQUIRE(r.emf == Catch::Approx(c).margin(1e-12));
    REQUIRE_FALSE(r.degenerate_drive);
    // desk-scale check: response and curvature agree in sign and roughly in size
    INFO("kappa=" << r.kappa << " chi_ad/E=" << r.chi_ad / r.emf << " rel=" << r.relative_error);
    REQUIRE(r.chi_ad / r.emf > 0.0);
    REQUIRE(r.relative_error < 1.0);
  }
}
