#include <catch2/catch_amalgamated.hpp>
#include <numbers>
#include <random>

#include "hall/hamiltonian.hpp"

using namespace hall;

namespace {

constexpr double kPi = std::numbers::pi;

SiteFunction random_site_function(const TorusLattice& lat, std::mt19937& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> u(-amp, amp);
  SiteFunction f(lat);
  for (int i = 0; i < lat.num_sites(); ++i) f.at_index(i) = u(rng);
  return f;
}

OneForm random_one_form(const TorusLattice& lat, std::mt19937& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> u(-amp, amp);
  OneForm A(lat);
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    for (int axis : {1, 2}) A.set(lat, {s, lat.neighbor(s, axis, +1)}, u(rng));
  }
  return A;
}

Eigen::VectorXd sorted_spectrum(const ManyBodyOperator& H) {
  Eigen::SelfAdjointEigenSolver<DenseMat> es(H.dense());
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("harper amplitudes") {
  const double t = 1.3, Phi = 2 * kPi / 4;
  auto spec = harper_spec(4, t, Phi, 0.0, 0.2, 2);
  SECTION("vertical bonds carry t e^{i Phi x1}, horizontal bonds carry t") {
    for (int i = 0; i < spec.lattice.num_sites(); ++i) {
      Site s = spec.lattice.site_at(i);
      REQUIRE(std::abs(spec.hopping.at(spec.lattice, s, 1) - cplx(t, 0)) < 1e-15);
      REQUIRE(std::abs(spec.hopping.at(spec.lattice, s, 2) - t * std::exp(cplx(0, Phi * s.x1))) <
              1e-15);
    }
  }
  SECTION("assembled matrix is Hermitian") {
    auto H = assemble(spec);
    REQUIRE((H - H.adjoint()).max_abs() < 1e-13);
  }
  SECTION("t = 0, U = 0 leaves the diagonal chemical term") {
    auto d = harper_spec(4, 0.0, 0.0, 0.0, 0.7, 2);
    auto H = assemble(d);
    auto expect = cplx(-0.7 * 2, 0) * ManyBodyOperator::identity(d.basis());
    REQUIRE((H - expect).max_abs() < 1e-14);
  }
  SECTION("incommensurate flux is rejected") {
    REQUIRE_THROWS_AS(harper_spec(4, 1.0, 0.3, 0.0, 0.0, 2), ConfigError);
  }
}

TEST_CASE("gauge covariance is exact") {
  auto spec = harper_spec(4, 1.0, 2 * kPi / 4, 0.5, 0.1, 2);
  std::mt19937 rng(33);
  for (int trial = 0; trial < 3; ++trial) {
    SiteFunction th = random_site_function(spec.lattice, rng, 2.0);
    OneForm A = random_one_form(spec.lattice, rng, 1.0);
    auto HA = with_vector_potential(spec, A);
    auto U = gauge_unitary(spec.basis(), th);
    auto lhs = U * HA * U.adjoint();
    auto rhs = with_vector_potential(spec, A + exterior_derivative(spec.lattice, th));
    REQUIRE((lhs - rhs).max_abs() < 1e-12);
  }
}

TEST_CASE("vector potentials") {
  auto spec = harper_spec(4, 1.0, 2 * kPi / 4, 0.0, 0.0, 2);
  const auto& lat = spec.lattice;
  SECTION("A = 0 leaves H unchanged") {
    OneForm zero(lat);
    REQUIRE((with_vector_potential(spec, zero) - assemble(spec)).max_abs() < 1e-15);
  }
  SECTION("equal winding, different profile: identical spectra") {
    // 2*pi*xi_1 versus the same total twist concentrated on one column cut
    OneForm spread = (2 * kPi) * standard_flux_form(lat, 1);
    OneForm concentrated(lat);
    for (int x2 = -1; x2 <= 2; ++x2)
      concentrated.set(lat, {Site{0, x2}, Site{1, x2}}, 2 * kPi);
    auto ev1 = sorted_spectrum(with_vector_potential(spec, spread));
    auto ev2 = sorted_spectrum(with_vector_potential(spec, concentrated));
    REQUIRE((ev1 - ev2).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("twist hamiltonians") {
  auto spec = harper_spec(4, 0.9, 2 * kPi / 4, 0.3, 0.0, 2);
  SECTION("zero twist is the base Hamiltonian") {
    REQUIRE((twist_hamiltonian(spec, 0, 0) - assemble(spec)).max_abs() < 1e-15);
  }
  SECTION("agrees entrywise with the generic Peierls route") {
    const double p1 = 0.43, p2 = -1.1;
    OneForm A = p1 * standard_flux_form(spec.lattice, 1) + p2 * standard_flux_form(spec.lattice, 2);
    REQUIRE((twist_hamiltonian(spec, p1, p2) - with_vector_potential(spec, A)).max_abs() < 1e-13);
  }
  SECTION("a full 2 pi twist is a gauge transformation: spectra match") {
    auto ev1 = sorted_spectrum(twist_hamiltonian(spec, 2 * kPi, 0));
    auto ev2 = sorted_spectrum(assemble(spec));
    REQUIRE((ev1 - ev2).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("small twists are small perturbations") {
    const double phi = 1e-2;
    auto diff = twist_hamiltonian(spec, phi, 0) - twist_hamiltonian(spec, 0, 0);
    REQUIRE(diff.max_abs() <= 0.9 * phi / 4 + 1e-12);
  }
}

TEST_CASE("flux derivatives") {
  auto spec = harper_spec(4, 1.1, 2 * kPi / 4, 0.2, 0.0, 2);
  SECTION("zero hopping gives the zero derivative") {
    auto flat = harper_spec(4, 0.0, 0.0, 0.0, 0.5, 2);
    REQUIRE(flux_derivative(flat, 1).max_abs() == 0.0);
  }
  SECTION("matches the drive generator with the standard flux form") {
    for (int j : {1, 2}) {
      auto a = flux_derivative(spec, j);
      auto b = drive_generator(spec, standard_flux_form(spec.lattice, j));
      REQUIRE((a - b).max_abs() < 1e-14);
    }
  }
  SECTION("central differences converge at second order") {
    auto D = flux_derivative(spec, 1);
    auto fd = [&](double h) {
      auto diff = twist_hamiltonian(spec, h, 0) - twist_hamiltonian(spec, -h, 0);
      return ((1.0 / (2 * h)) * diff - D).max_abs();
    };
    double e1 = fd(1e-3), e2 = fd(5e-4);
    REQUIRE(e1 < 1e-6);
    REQUIRE(e2 < e1 / 3.0);  // ~ factor 4 for O(h^2)
  }
}

TEST_CASE("drive generators") {
  auto spec = harper_spec(4, 1.0, 2 * kPi / 4, 0.5, 0.3, 2);
  const auto& lat = spec.lattice;
  std::mt19937 rng(5);
  SECTION("globally exact drives are commutators: W(d theta) = i [V, H]") {
    SiteFunction th = random_site_function(lat, rng);
    auto W = drive_generator(spec, exterior_derivative(lat, th));
    auto V = potential_operator(spec.basis(), th);
    auto expect = cplx(0, 1) * commutator(V, assemble(spec));
    REQUIRE((W - expect).max_abs() < 1e-12);
  }
  SECTION("zero drive, linearity") {
    OneForm zero(lat);
    REQUIRE(drive_generator(spec, zero).max_abs() == 0.0);
    OneForm A = random_one_form(lat, rng), B = random_one_form(lat, rng);
    auto lhs = drive_generator(spec, A + B);
    auto rhs = drive_generator(spec, A) + drive_generator(spec, B);
    REQUIRE((lhs - rhs).max_abs() < 1e-13);
  }
}

TEST_CASE("currents equal commutators on full boundaries") {
  auto spec = harper_spec(4, 1.0, 2 * kPi / 4, 0.4, 0.0, 3);
  const auto& lat = spec.lattice;
  auto H = assemble(spec);
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> coin(0, 1);
  int tested = 0;
  while (tested < 6) {
    SiteSet X(lat);
    for (int i = 0; i < lat.num_sites(); ++i)
      if (coin(rng)) X.add(lat, lat.site_at(i));
    if (X.empty() || X.size() == lat.num_sites()) continue;
    ++tested;
    auto J = current_loop(spec, X);
    auto expect = cplx(0, 1) * commutator(H, number_operator(spec.basis(), X));
    REQUIRE((J.op - expect).max_abs() < 1e-12);
  }
}

TEST_CASE("currents with a vector potential active") {
  auto spec = harper_spec(4, 1.0, 2 * kPi / 4, 0.0, 0.0, 2);
  std::mt19937 rng(13);
  OneForm A = random_one_form(spec.lattice, rng, 0.7);
  SiteSet X(spec.lattice);
  for (Site s : {Site{0, 0}, Site{1, 0}, Site{0, 1}}) X.add(spec.lattice, s);
  auto J = current_loop(spec, X, &A);
  auto HA = with_vector_potential(spec, A);
  auto expect = cplx(0, 1) * commutator(HA, number_operator(spec.basis(), X));
  REQUIRE((J.op - expect).max_abs() < 1e-12);
}

TEST_CASE("currents vanish in eigenstates and for the full lattice") {
  auto spec = harper_spec(4, 1.0, 2 * kPi / 4, 0.0, 0.0, 3);
  SECTION("the whole torus carries no boundary current") {
    auto J = current_loop(spec, SiteSet::full(spec.lattice));
    REQUIRE(J.op.max_abs() == 0.0);
  }
  SECTION("ground-state expectation of a boundary current vanishes") {
    auto H = assemble(spec);
    Eigen::SelfAdjointEigenSolver<DenseMat> es(H.dense());
    Vec psi = es.eigenvectors().col(0);
    SiteSet X(spec.lattice);
    for (int i = 0; i < spec.lattice.num_sites(); ++i)
      if (spec.lattice.site_at(i).x1 <= 0) X.add(spec.lattice, spec.lattice.site_at(i));
    auto J = current_loop(spec, X);
    REQUIRE(std::abs(psi.dot(J.op.apply(psi))) < 1e-10);
  }
}

TEST_CASE("path currents split and reverse") {
  auto spec = harper_spec(4, 1.0, 2 * kPi / 4, 0.0, 0.0, 2);
  const auto& lat = spec.lattice;
  SiteSet X(lat);
  for (Site s : {Site{0, 0}, Site{1, 0}, Site{0, 1}, Site{1, 1}}) X.add(lat, s);
  auto loops = boundary_path(lat, X);
  REQUIRE(loops.size() == 1);
  const DualPath& loop = loops[0];

  SECTION("splitting the boundary splits the operator additively") {
    DualPath g1, g2;
    int half = loop.length() / 2;
    g1.edges.assign(loop.edges.begin(), loop.edges.begin() + half);
    g2.edges.assign(loop.edges.begin() + half, loop.edges.end());
    auto total = current_path(spec, g1).op + current_path(spec, g2).op;
    auto whole = current_loop(spec, X).op;
    REQUIRE((total - whole).max_abs() < 1e-14);
  }
  SECTION("reversal negates the operator") {
    DualPath g;
    g.edges.assign(loop.edges.begin(), loop.edges.begin() + 3);
    auto fwd = current_path(spec, g).op;
    auto bwd = current_path(spec, reversed(lat, g)).op;
    REQUIRE((fwd + bwd).max_abs() < 1e-14);
  }
  SECTION("malformed paths are rejected") {
    DualPath bad;
    bad.edges = {loop.edges[0], loop.edges[2]};
    REQUIRE_THROWS_AS(current_path(spec, bad), MalformedPath);
  }
}
