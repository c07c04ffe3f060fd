#pragma once

#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "hall/parallel.hpp"
#include "hall/spectral.hpp"

namespace hall {

// Structured output of a response computation; serialized by the experiment
// runner.
struct ResponseReport {
  std::string kind;
  double value = 0.0;
  std::map<std::string, double> diagnostics;
  std::string provenance;
};

inline std::string spec_fingerprint(const HamiltonianSpec& spec) {
  std::ostringstream os;
  os << "L" << spec.lattice.L() << "_N" << spec.N << "_flux" << spec.base_flux << "_terms"
     << spec.interactions.size() << "_mu" << spec.mu;
  return os.str();
}

namespace detail {

inline void require_self_adjoint(const ManyBodyOperator& O, const char* name) {
  double scale = std::max(1.0, O.max_abs());
  if ((O - O.adjoint()).max_abs() > 1e-10 * scale)
    throw ConfigError(std::string(name) + " must be self-adjoint");
}

// Ground-row matrix elements <m|O|Psi> in the eigenbasis.
inline Vec ground_row(const SpectralCache& cache, const ManyBodyOperator& O) {
  return cache.eigenvectors().adjoint() * O.apply(cache.ground_state());
}

}  // namespace detail

// chi_{J,V}(nu) at eps = 0: the exact closed form of the regularized
// time-integrated commutator response of a gapped finite system. At nu = 0 this
// is the static ground-state response d<J>/d lambda for H + lambda V, and it
// equals i omega([I(V), J]) with the spectral filter map.
inline cplx kubo_resolvent(const SpectralCache& cache, const ManyBodyOperator& J,
                           const ManyBodyOperator& V, double nu) {
  cache.require_full();
  detail::require_self_adjoint(J, "J");
  detail::require_self_adjoint(V, "V");
  if (std::abs(nu) >= cache.gap() / 2)
    throw FrequencyOutOfGap("kubo_resolvent: |nu| must be strictly below g/2");
  Vec jt = detail::ground_row(cache, J), vt = detail::ground_row(cache, V);
  const auto& E = cache.eigenvalues();
  cplx chi(0, 0);
  for (int m = 1; m < E.size(); ++m) {
    double delta = E(m) - E(0);
    chi -= std::conj(vt(m)) * jt(m) / (delta + nu) + std::conj(jt(m)) * vt(m) / (delta - nu);
  }
  return chi;
}

// chi(eps, L): same closed form with the +i eps regularization kept finite.
inline cplx kubo_time_integral(const SpectralCache& cache, const ManyBodyOperator& J,
                               const ManyBodyOperator& V, double nu, double eps) {
  cache.require_full();
  detail::require_self_adjoint(J, "J");
  detail::require_self_adjoint(V, "V");
  if (eps <= 0) throw ConfigError("kubo_time_integral: eps must be positive");
  if (std::abs(nu) > cache.gap() / 2)
    throw FrequencyOutOfGap("kubo_time_integral: |nu| must be at most g/2");
  Vec jt = detail::ground_row(cache, J), vt = detail::ground_row(cache, V);
  const auto& E = cache.eigenvalues();
  cplx chi(0, 0);
  for (int m = 1; m < E.size(); ++m) {
    double delta = E(m) - E(0);
    chi -= std::conj(vt(m)) * jt(m) / cplx(delta + nu, eps) +
           std::conj(jt(m)) * vt(m) / cplx(delta - nu, -eps);
  }
  return chi;
}

enum class CurvatureRoute { Projectors, Generators };

struct CurvatureResult {
  double value = 0.0;
  double imag_residual = 0.0;
  double gap = 0.0;
};

namespace detail {

// kappa = i (<a, b> - <b, a>) for ground-column vectors a = A|Psi>, b = B|Psi>
// of self-adjoint A, B expressed in the eigenbasis.
inline cplx curvature_pairing(const Vec& a, const Vec& b) {
  cplx ab = a.dot(b);
  return cplx(0, 1) * (ab - std::conj(ab));
}

}  // namespace detail

// Adiabatic curvature at zero twist. Projector route: i Tr(P [d1P, d2P]) with
// the reduced-resolvent projector derivatives. Generator route:
// i omega([K1, K2]) with K_j the filtered flux derivatives. Both are exact in
// the eigenbasis and agree to rounding; only the ground columns are needed, so
// neither route materializes an operator.
inline CurvatureResult adiabatic_curvature(const SpectralCache& cache,
                                           const HamiltonianSpec& spec, CurvatureRoute route,
                                           const SpectralOptions& opts = {}) {
  (void)opts;
  cache.require_full();
  CurvatureResult out;
  out.gap = cache.gap();
  Vec d1 = detail::ground_row(cache, flux_derivative(spec, 1));
  Vec d2 = detail::ground_row(cache, flux_derivative(spec, 2));
  const auto& E = cache.eigenvalues();
  const FilterTransform f = cache.filter();
  Vec a(d1.size()), b(d2.size());
  a(0) = b(0) = cplx(0, 0);
  for (int m = 1; m < d1.size(); ++m) {
    if (route == CurvatureRoute::Generators) {
      // columns of K_j = I(dH/dphi_j)
      a(m) = f.scaled(E(m) - E(0)) * d1(m);
      b(m) = f.scaled(E(m) - E(0)) * d2(m);
    } else {
      // columns of dP/dphi_j from the reduced resolvent
      a(m) = d1(m) / (E(0) - E(m));
      b(m) = d2(m) / (E(0) - E(m));
    }
  }
  cplx kappa = detail::curvature_pairing(a, b);
  out.value = kappa.real();
  out.imag_residual = std::abs(kappa.imag());
  if (out.imag_residual > 1e-9)
    throw SolverError("adiabatic_curvature: imaginary residual above 1e-9");
  return out;
}

inline CurvatureResult adiabatic_curvature(const HamiltonianSpec& spec, CurvatureRoute route,
                                           const SpectralOptions& opts = {}) {
  SpectralCache cache(assemble(spec), SpectralMode::Full, opts);
  return adiabatic_curvature(cache, spec, route, opts);
}

struct GaugeCheckResult {
  double kappa = 0.0;
  double kappa_prime = 0.0;
  double discrepancy = 0.0;
};

// Curvature from the standard twist family versus the family with deformed
// representatives xi_j + d theta_j threading the same fluxes.
inline GaugeCheckResult curvature_gauge_check(const HamiltonianSpec& spec,
                                              const SiteFunction& theta1,
                                              const SiteFunction& theta2,
                                              double norm_bound = 10.0,
                                              const SpectralOptions& opts = {}) {
  const auto& lat = spec.lattice;
  OneForm d1 = exterior_derivative(lat, theta1), d2 = exterior_derivative(lat, theta2);
  if (d1.norm() > norm_bound || d2.norm() > norm_bound)
    throw ConfigError("curvature_gauge_check: ||d theta|| exceeds the configured bound");
  SpectralCache cache(assemble(spec), SpectralMode::Full, opts);
  const auto& E = cache.eigenvalues();
  const FilterTransform f = cache.filter();
  auto kappa_from = [&](const OneForm& A1, const OneForm& A2) {
    Vec a = detail::ground_row(cache, drive_generator(spec, A1));
    Vec b = detail::ground_row(cache, drive_generator(spec, A2));
    a(0) = b(0) = cplx(0, 0);
    for (int m = 1; m < a.size(); ++m) {
      a(m) *= f.scaled(E(m) - E(0));
      b(m) *= f.scaled(E(m) - E(0));
    }
    return detail::curvature_pairing(a, b).real();
  };
  OneForm xi1 = standard_flux_form(lat, 1), xi2 = standard_flux_form(lat, 2);
  GaugeCheckResult out;
  out.kappa = kappa_from(xi1, xi2);
  out.kappa_prime = kappa_from(xi1 + d1, xi2 + d2);
  out.discrepancy = std::abs(out.kappa - out.kappa_prime);
  return out;
}

struct ChernResult {
  int value = 0;
  double rounding_distance = 0.0;
  double min_gap = 0.0;
};

// Many-body Chern number over the flux torus by plaquette link variables of
// ground-state overlaps. The twist family closes only up to the gauge
// H(phi + 2 pi e_d) = U_d H(phi) U_d†, U_d = exp(2 pi i <x_d, n>/L); links
// across the seam apply that unitary, which makes the plaquette sum an exact
// integer for any admissible grid.
inline ChernResult chern_number(const HamiltonianSpec& spec, int grid,
                                const SpectralOptions& opts = {}, int threads = 0) {
  if (grid < 2) throw ConfigError("chern_number: grid must be at least 2");
  const auto& lat = spec.lattice;
  const auto basis = spec.basis();
  const double step = 2 * std::numbers::pi / grid;

  std::vector<Vec> states(static_cast<std::size_t>(grid) * grid);
  std::vector<double> gaps(states.size(), 0.0);
  std::vector<std::string> failures(states.size());
  parallel_for(static_cast<int>(states.size()), [&](int idx) {
    int i = idx / grid, j = idx % grid;
    try {
      SpectralCache c(twist_hamiltonian(spec, i * step, j * step), SpectralMode::GroundOnly, opts);
      states[idx] = c.ground_state();
      gaps[idx] = c.gap();
    } catch (const Error& err) {
      failures[idx] = err.what();
    }
  }, threads);

  std::ostringstream bad;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < states.size(); ++idx) {
    if (!failures[idx].empty())
      bad << " (" << (idx / grid) * step << "," << (idx % grid) * step << ")";
    else
      min_gap = std::min(min_gap, gaps[idx]);
  }
  if (bad.tellp() > 0)
    throw AssumptionViolation("chern_number: gap assumption failed at flux points:" + bad.str());

  // Gauge seam closure phases.
  SiteFunction th1(lat), th2(lat);
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    th1.at_index(i) = 2 * std::numbers::pi * s.x1 / lat.L();
    th2.at_index(i) = 2 * std::numbers::pi * s.x2 / lat.L();
  }
  ManyBodyOperator U1 = gauge_unitary(basis, th1), U2 = gauge_unitary(basis, th2);
  auto state_at = [&](int i, int j) {
    Vec v = states[(i % grid) * grid + (j % grid)];
    if (i == grid) v = U1.apply(v);
    if (j == grid) v = U2.apply(v);
    return v;
  };
  auto link = [&](int i1, int j1, int i2, int j2) {
    return state_at(i1, j1).dot(state_at(i2, j2));
  };
  double total = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      cplx w = link(i, j, i + 1, j) * link(i + 1, j, i + 1, j + 1) *
               link(i + 1, j + 1, i, j + 1) * link(i, j + 1, i, j);
      if (std::abs(w) < 1e-12)
        throw SolverError("chern_number: vanishing plaquette overlap; refine the grid");
      total += -std::arg(w);
    }
  ChernResult out;
  double c = total / (2 * std::numbers::pi);
  out.value = static_cast<int>(std::lround(c));
  out.rounding_distance = std::abs(c - out.value);
  out.min_gap = min_gap;
  if (out.rounding_distance > 1e-6)
    throw SolverError("chern_number: plaquette sum is not integral; grid inadmissible");
  return out;
}

enum class HallSetup { Bulk, Traverse, Deformed };

struct HallGeometry {
  int ell = 1;       // field strip half-width
  int r = 1;         // flank width parameter
  int d = 2;         // half-length of the measuring path
  double E = 0.1;    // field strength in the strip
  int detour = 0;    // Deformed setup: bump width (columns 1..detour at row 1)
};

struct HallEquivalenceResult {
  double kappa = 0.0;
  double chi = 0.0;
  double normalizer = 0.0;  // 2 E d (Bulk) or Delta_v (Traverse / Deformed)
  double discrepancy = 0.0;
  double relative_error = 0.0;
  bool degenerate_drive = false;
  DualPath path;
  SiteFunction potential;
};

// Straight dual path at x2 = 1/2 from -d+1/2 to d+1/2 (open for 2d < L).
inline DualPath traverse_path(const TorusLattice& lat, int d) {
  if (2 * d > lat.L()) throw ConfigError("traverse_path: 2d exceeds the lattice circumference");
  DualPath gamma;
  for (int a = -d; a < d; ++a) gamma.edges.push_back(make_dual_edge(lat, {lat.wrap(a), 0}, 1, +1));
  return gamma;
}

// Boundary subpath with a rectangular detour over the sites {x2 = 1, 1 <= x1 <= k};
// still oriented with the region below/right of it.
inline DualPath deformed_path(const TorusLattice& lat, int d, int k) {
  if (k < 1 || k + 1 >= d || 2 * d > lat.L())
    throw ConfigError("deformed_path: need 1 <= k < d-1 and 2d <= L");
  DualPath gamma;
  for (int a = -d; a < 0; ++a) gamma.edges.push_back(make_dual_edge(lat, {lat.wrap(a), 0}, 1, +1));
  gamma.edges.push_back(make_dual_edge(lat, {0, 0}, 2, +1));
  for (int a = 0; a < k; ++a) gamma.edges.push_back(make_dual_edge(lat, {lat.wrap(a), 1}, 1, +1));
  gamma.edges.push_back(make_dual_edge(lat, {k, 1}, 2, -1));
  for (int a = k; a < d; ++a) gamma.edges.push_back(make_dual_edge(lat, {lat.wrap(a), 0}, 1, +1));
  validate_dual_path(lat, gamma);
  return gamma;
}

// Kubo response across a measuring path versus the adiabatic curvature, in the
// three geometries: path in the bulk of the field (error O(1/d)), path
// traversing the field region ending in flat flanks, and a deformed boundary
// subpath with the same endpoints.
inline HallEquivalenceResult hall_equivalence(const HamiltonianSpec& spec, HallSetup setup,
                                              const HallGeometry& geo,
                                              const SpectralOptions& opts = {}) {
  const auto& lat = spec.lattice;
  HallEquivalenceResult out;

  StripVariant variant = setup == HallSetup::Bulk ? StripVariant::Bulk : StripVariant::FlatFlanks;
  int d = setup == HallSetup::Bulk ? geo.d : geo.ell + geo.r;
  if (setup == HallSetup::Bulk && geo.d > geo.ell)
    throw ConfigError("hall_equivalence: bulk setup needs d <= ell");
  auto strip = build_strip_potential(lat, geo.E, geo.ell, geo.r, variant);
  out.potential = strip.v;
  out.path = setup == HallSetup::Deformed ? deformed_path(lat, d, geo.detour)
                                          : traverse_path(lat, d);

  SpectralCache cache(assemble(spec), SpectralMode::Full, opts);
  ManyBodyOperator J = current_path(spec, out.path).op;
  ManyBodyOperator V = potential_operator(spec.basis(), strip.v);
  out.chi = kubo_resolvent(cache, J, V, 0.0).real();
  out.kappa = adiabatic_curvature(cache, spec, CurvatureRoute::Generators, opts).value;
  out.normalizer = setup == HallSetup::Bulk ? 2.0 * geo.E * geo.d : strip.delta_v;
  if (std::abs(out.normalizer) < 1e-14) {
    out.degenerate_drive = true;
    return out;
  }
  out.discrepancy = std::abs(out.kappa - out.chi / out.normalizer);
  out.relative_error = out.discrepancy / std::max(1e-300, std::abs(out.kappa));
  return out;
}

}  // namespace hall
