#pragma once

#include <numbers>
#include <numeric>

#include "hall/hamiltonian.hpp"

namespace hall {

// Single-particle matrices for U = 0 runs. h(x, y) = alpha(x, y) on bonds plus
// the on-site diagonal; this is exactly the N = 1 sector of the many-body H.
namespace detail {

template <typename BondFn>
DenseMat single_particle_matrix(const HamiltonianSpec& spec, BondFn&& bond_coeff) {
  const auto& lat = spec.lattice;
  const int n = lat.num_sites();
  DenseMat h = DenseMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Site s = lat.site_at(i);
    for (int axis : {1, 2}) {
      Site t = lat.neighbor(s, axis, +1);
      cplx c = bond_coeff(s, axis);
      h(i, lat.index_of(t)) += c;
      h(lat.index_of(t), i) += std::conj(c);
    }
  }
  for (const auto& term : spec.interactions)
    if (term.sites.size() == 1) h(lat.index_of(term.sites[0]), lat.index_of(term.sites[0])) += term.coeff;
  for (int i = 0; i < n; ++i) h(i, i) += -spec.mu;
  return h;
}

}  // namespace detail

inline DenseMat single_particle(const HamiltonianSpec& spec, const OneForm* A = nullptr) {
  const auto& lat = spec.lattice;
  return detail::single_particle_matrix(spec, [&](Site s, int axis) {
    cplx c = spec.hopping.at(lat, s, axis);
    if (A) c *= std::exp(cplx(0, (*A)(lat, {lat.neighbor(s, axis, +1), s})));
    return c;
  });
}

inline DenseMat single_particle_twist(const HamiltonianSpec& spec, double phi1, double phi2) {
  const double L = spec.lattice.L();
  const cplx f1 = std::exp(cplx(0, -phi1 / L)), f2 = std::exp(cplx(0, -phi2 / L));
  return detail::single_particle_matrix(
      spec, [&](Site s, int axis) { return spec.hopping.at(spec.lattice, s, axis) * (axis == 1 ? f1 : f2); });
}

// d/ds h_{sA} at s = 0 (single-particle drive generator).
inline DenseMat single_particle_drive(const HamiltonianSpec& spec, const OneForm& A) {
  const auto& lat = spec.lattice;
  DenseMat w = detail::single_particle_matrix(spec, [&](Site s, int axis) {
    Site t = lat.neighbor(s, axis, +1);
    return spec.hopping.at(lat, s, axis) * cplx(0, A(lat, {t, s}));
  });
  // strip the diagonal, which does not couple to the drive
  for (int i = 0; i < w.rows(); ++i) w(i, i) = 0;
  return w;
}

inline DenseMat single_particle_flux_derivative(const HamiltonianSpec& spec, int direction) {
  return single_particle_drive(spec, standard_flux_form(spec.lattice, direction));
}

// Single-particle current matrix for a dual path.
inline DenseMat single_particle_current(const HamiltonianSpec& spec, const DualPath& gamma,
                                        const OneForm* A = nullptr) {
  validate_dual_path(spec.lattice, gamma);
  const auto& lat = spec.lattice;
  const int n = lat.num_sites();
  DenseMat j = DenseMat::Zero(n, n);
  for (const auto& e : gamma.edges) {
    cplx a_lr = spec.hopping.alpha(lat, e.left, e.right);
    if (A) a_lr *= std::exp(cplx(0, (*A)(lat, {e.right, e.left})));
    const int li = lat.index_of(e.left), ri = lat.index_of(e.right);
    j(li, ri) += cplx(0, 1) * a_lr;
    j(ri, li) += cplx(0, -1) * std::conj(a_lr);
  }
  return j;
}

// Slater determinant of the N lowest orbitals; P1 = Phi Phi† is the
// correlation matrix.
struct SlaterState {
  Eigen::VectorXd orbital_energies;
  DenseMat orbitals;  // L^2 x N isometry
  double orbital_gap = 0.0;

  DenseMat correlation() const { return orbitals * orbitals.adjoint(); }
};

inline SlaterState free_ground(const DenseMat& h, int N, double gap_floor = 1e-8) {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(h);
  if (es.info() != Eigen::Success) throw SolverError("free_ground: eigensolver failed");
  if (N < 0 || N > h.rows()) throw ConfigError("free_ground: N outside [0, modes]");
  SlaterState s;
  s.orbital_energies = es.eigenvalues();
  s.orbitals = es.eigenvectors().leftCols(N);
  s.orbital_gap = (N == 0 || N == h.rows()) ? std::numeric_limits<double>::infinity()
                                            : es.eigenvalues()(N) - es.eigenvalues()(N - 1);
  if (s.orbital_gap < gap_floor)
    throw AssumptionViolation("free_ground: orbital gap below floor at filling N=" +
                              std::to_string(N));
  return s;
}

// Kubo coefficient in the single-particle picture: the particle-hole
// decomposition of the many-body closed form, occupied/empty blocks taking the
// role of P / P-perp.
inline cplx free_kubo(const DenseMat& h, int N, const DenseMat& Jsp, const DenseMat& Vsp,
                      double nu, double gap_floor = 1e-8) {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(h);
  const auto& eps = es.eigenvalues();
  const DenseMat& U = es.eigenvectors();
  if (N > 0 && N < h.rows() && eps(N) - eps(N - 1) < gap_floor)
    throw AssumptionViolation("free_kubo: orbital gap closed");
  const double gap = (N > 0 && N < h.rows()) ? eps(N) - eps(N - 1) : 1e300;
  if (std::abs(nu) >= gap / 2) throw FrequencyOutOfGap("free_kubo: |nu| must be below half the gap");
  DenseMat Jt = U.adjoint() * Jsp * U, Vt = U.adjoint() * Vsp * U;
  cplx chi(0, 0);
  const int M = static_cast<int>(h.rows());
  for (int a = 0; a < N; ++a)
    for (int b = N; b < M; ++b) {
      double delta = eps(b) - eps(a);
      chi -= Vt(a, b) * Jt(b, a) / (delta + nu) + Jt(a, b) * Vt(b, a) / (delta - nu);
    }
  return chi;
}

enum class CurvatureMethod { Spectral, Overlap };

// Adiabatic curvature of the Slater ground state with respect to the two flux
// angles at phi = 0. Spectral: exact particle-hole sum. Overlap: Wilson
// plaquette of determinant overlaps on a small stencil, Richardson-refined.
inline double free_curvature(const HamiltonianSpec& spec, int N,
                             CurvatureMethod method = CurvatureMethod::Spectral,
                             double stencil = 1e-3, double gap_floor = 1e-8) {
  if (method == CurvatureMethod::Spectral) {
    DenseMat h = single_particle_twist(spec, 0, 0);
    Eigen::SelfAdjointEigenSolver<DenseMat> es(h);
    const auto& eps = es.eigenvalues();
    const DenseMat& U = es.eigenvectors();
    if (N > 0 && N < h.rows() && eps(N) - eps(N - 1) < gap_floor)
      throw AssumptionViolation("free_curvature: orbital gap closed");
    DenseMat D1 = U.adjoint() * single_particle_flux_derivative(spec, 1) * U;
    DenseMat D2 = U.adjoint() * single_particle_flux_derivative(spec, 2) * U;
    cplx kappa(0, 0);
    const int M = static_cast<int>(h.rows());
    for (int a = 0; a < N; ++a)
      for (int b = N; b < M; ++b) {
        double delta = eps(b) - eps(a);
        kappa += cplx(0, 1) * (D1(a, b) * D2(b, a) - D2(a, b) * D1(b, a)) / (delta * delta);
      }
    return kappa.real();
  }
  auto slater = [&](double p1, double p2) {
    return free_ground(single_particle_twist(spec, p1, p2), N, gap_floor).orbitals;
  };
  auto plaquette_curvature = [&](double h) {
    DenseMat a = slater(0, 0), b = slater(h, 0), c = slater(h, h), d = slater(0, h);
    cplx w = (a.adjoint() * b).determinant() * (b.adjoint() * c).determinant() *
             (c.adjoint() * d).determinant() * (d.adjoint() * a).determinant();
    return -std::arg(w) / (h * h);
  };
  double k1 = plaquette_curvature(stencil), k2 = plaquette_curvature(stencil / 2);
  return (4 * k2 - k1) / 3;  // O(h^2) Richardson
}

// Many-body Chern number of the Slater family over the full flux torus, by
// plaquette link variables of determinant overlaps. Integer for any grid fine
// enough that no plaquette product vanishes.
inline int free_chern(const HamiltonianSpec& spec, int N, int grid, double gap_floor = 1e-8,
                      double* rounding_distance = nullptr) {
  if (grid < 2) throw ConfigError("free_chern: grid must be at least 2");
  const auto& lat = spec.lattice;
  const double step = 2 * std::numbers::pi / grid;
  std::vector<DenseMat> slaters(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j)
      slaters[i * grid + j] =
          free_ground(single_particle_twist(spec, i * step, j * step), N, gap_floor).orbitals;
  // The twist family is 2 pi periodic only up to the gauge h(phi + 2 pi) =
  // G h(phi) G†, G = diag(e^{2 pi i x_d / L}); the torus must be closed with
  // that identification or the link sum computes a different bundle.
  auto gauge_close = [&](DenseMat m, int which) {
    for (int x = 0; x < lat.num_sites(); ++x) {
      Site s = lat.site_at(x);
      double coord = which == 1 ? s.x1 : s.x2;
      m.row(x) *= std::exp(cplx(0, 2 * std::numbers::pi * coord / lat.L()));
    }
    return m;
  };
  auto state_at = [&](int i, int j) {
    DenseMat m = slaters[(i % grid) * grid + (j % grid)];
    if (i == grid) m = gauge_close(m, 1);
    if (j == grid) m = gauge_close(m, 2);
    return m;
  };
  auto link = [&](int i1, int j1, int i2, int j2) {
    return (state_at(i1, j1).adjoint() * state_at(i2, j2)).determinant();
  };
  double total = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      cplx w = link(i, j, i + 1, j) * link(i + 1, j, i + 1, j + 1) *
               link(i + 1, j + 1, i, j + 1) * link(i, j + 1, i, j);
      if (std::abs(w) < 1e-12) throw SolverError("free_chern: vanishing plaquette overlap; refine the grid");
      total += -std::arg(w);
    }
  double c = total / (2 * std::numbers::pi);
  int n = static_cast<int>(std::lround(c));
  if (rounding_distance) *rounding_distance = std::abs(c - n);
  return n;
}

// Bloch band Chern numbers of the Harper model at flux 2 pi p / q, via link
// variables on the magnetic Brillouin zone. The magnetic cell is q sites long
// in the 1-direction.
inline int band_chern(int p, int q, int band, double t = 1.0, int grid = 24,
                      double touch_floor = 1e-9) {
  if (q < 1 || std::gcd(std::abs(p), q) != 1) throw ConfigError("band_chern: need gcd(p, q) = 1");
  if (band < 0 || band >= q) throw ConfigError("band_chern: band index outside [0, q)");
  const double Phi = 2 * std::numbers::pi * p / q;
  auto bloch = [&](double k1, double k2) {
    DenseMat H = DenseMat::Zero(q, q);
    for (int a = 0; a < q; ++a) {
      H(a, a) = 2 * t * std::cos(Phi * a + k2);
      int b = (a + 1) % q;
      H(a, b) += t * std::exp(cplx(0, k1));
      H(b, a) += t * std::exp(cplx(0, -k1));
    }
    return H;
  };
  const double s1 = 2 * std::numbers::pi / q / grid, s2 = 2 * std::numbers::pi / grid;
  std::vector<Vec> states(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      Eigen::SelfAdjointEigenSolver<DenseMat> es(bloch(i * s1, j * s2));
      double below = band > 0 ? es.eigenvalues()(band) - es.eigenvalues()(band - 1) : 1.0;
      double above = band + 1 < q ? es.eigenvalues()(band + 1) - es.eigenvalues()(band) : 1.0;
      if (std::min(below, above) < touch_floor)
        throw BandTouching("band_chern: band " + std::to_string(band) +
                           " touches a neighbour on the k-grid");
      states[i * grid + j] = es.eigenvectors().col(band);
    }
  // Magnetic-zone closure in k1: H(k1 + 2 pi / q) = W H(k1) W†, W = diag(e^{-2 pi i a / q}).
  auto state_at = [&](int i, int j) {
    Vec v = states[(i % grid) * grid + (j % grid)];
    if (i == grid)
      for (int a = 0; a < q; ++a) v(a) *= std::exp(cplx(0, -2 * std::numbers::pi * a / q));
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
      if (std::abs(w) < 1e-12) throw BandTouching("band_chern: vanishing plaquette overlap");
      total += -std::arg(w);
    }
  double c = total / (2 * std::numbers::pi);
  return static_cast<int>(std::lround(c));
}

}  // namespace hall
