// Scratch numerical probe for convention checks (not part of the test suite).
#include <chrono>
#include <cstdio>
#include <numbers>

#include "hall/dynamics.hpp"

using namespace hall;
constexpr double kPi = std::numbers::pi;

int main() {
  // deep-adiabatic check on the naturally gapped L=3 N=3 sector (gap ~0.95)
  auto spec = harper_spec(3, 1.0, 2 * kPi / 3, 0.5, 0.0, 3);
  SiteFunction th(spec.lattice);
  for (int i = 0; i < spec.lattice.num_sites(); ++i) {
    Site s = spec.lattice.site_at(i);
    th.at_index(i) = 0.3 * (std::cos(2 * kPi * s.x1 / 3.0) + 0.6 * std::sin(2 * kPi * s.x2 / 3.0 + 0.3));
  }
  OneForm A = exterior_derivative(spec.lattice, th);
  DualPath g;
  g.edges.push_back(make_dual_edge(spec.lattice, {0, 0}, 1, +1));
  auto J = current_path(spec, g).op;

  SpectralCache c(assemble(spec), SpectralMode::Full);
  double kubo = kubo_resolvent(c, J, potential_operator(spec.basis(), th), 0.0).real();
  double spectral = adiabatic_response_spectral(c, spec, A, J);
  std::printf("gap=%.4f  kubo=%.8f  spectral=%.8f\n", c.gap(), kubo, spectral);

  SpectralCache gs(assemble(spec), SpectralMode::GroundOnly);
  double jgs = expectation(gs, J).real();
  for (double eps : {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125}) {
    auto t0 = std::chrono::steady_clock::now();
    RampProtocol ramp;
    ramp.drive = A;
    ramp.rate = eps;
    auto run = propagate(spec, ramp, J);
    double q = (run.final_observable - jgs) / eps;
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("eps=%.4f  quotient=%.8f  (%.1f s)\n", eps, q, dt);
  }
  auto resp = adiabatic_response(spec, A, J, {0.1, 0.05, 0.025, 0.0125});
  std::printf("richardson=%.8f +- %.2e   (target %.8f)\n", resp.value, resp.error_bar, kubo);
  return 0;
}
