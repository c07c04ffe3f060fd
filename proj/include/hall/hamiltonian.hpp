#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "hall/dual.hpp"
#include "hall/operators.hpp"

namespace hall {

// Nearest-neighbour hopping amplitudes. amp(s, axis) is the coefficient of
// c†_s c_{s+e_axis}; the reverse coefficient is its conjugate (Hermiticity is
// stored once). A vector potential A multiplies the coefficient of c†_x c_y by
// e^{i A((y,x))}, the phase along the oriented edge from the annihilation site
// to the creation site. With this convention U_theta H_A U_theta† = H_{A+dtheta}
// holds entrywise for U_theta = exp(i<theta,n>).
class HoppingAmplitudes {
 public:
  HoppingAmplitudes() = default;
  explicit HoppingAmplitudes(const TorusLattice& lat) : values_(2 * lat.num_sites(), cplx(0, 0)) {}

  cplx& at(const TorusLattice& lat, Site s, int axis) {
    return values_[2 * lat.index_of(s) + (axis - 1)];
  }
  cplx at(const TorusLattice& lat, Site s, int axis) const {
    return values_[2 * lat.index_of(s) + (axis - 1)];
  }

  // alpha(x, y): coefficient of c†_x c_y for adjacent x, y.
  cplx alpha(const TorusLattice& lat, Site x, Site y) const {
    int d1 = lat.wrap(y.x1 - x.x1), d2 = lat.wrap(y.x2 - x.x2);
    if (d1 == 1 && d2 == 0) return at(lat, x, 1);
    if (d1 == -1 && d2 == 0) return std::conj(at(lat, y, 1));
    if (d1 == 0 && d2 == 1) return at(lat, x, 2);
    if (d1 == 0 && d2 == -1) return std::conj(at(lat, y, 2));
    throw ConfigError("HoppingAmplitudes::alpha: sites not adjacent");
  }

 private:
  std::vector<cplx> values_;
};

// coeff * prod_{s in sites} n_s; diagonal, so it commutes with every n_x.
struct DensityTerm {
  std::vector<Site> sites;
  double coeff = 0.0;
};

// Hamiltonian data: hopping + density interactions + chemical potential, on a
// fixed particle-number sector.
struct HamiltonianSpec {
  TorusLattice lattice{2};
  HoppingAmplitudes hopping;
  std::vector<DensityTerm> interactions;
  double mu = 0.0;
  int N = 0;
  double base_flux = 0.0;  // informational: flux per plaquette baked into `hopping`
  std::uint64_t basis_cap = 5'000'000;

  BasisPtr basis() const {
    if (!cached_basis_) cached_basis_ = build_sector_basis(lattice, N, basis_cap);
    return cached_basis_;
  }

 private:
  mutable BasisPtr cached_basis_;
};

// Interacting Harper model: horizontal bonds t, vertical bonds t e^{i Phi x1},
// nearest-neighbour density-density interaction U, chemical potential mu.
inline HamiltonianSpec harper_spec(int L, double t, double Phi, double U, double mu, int N,
                                   std::uint64_t basis_cap = 5'000'000) {
  const double steps = Phi * L / (2.0 * std::numbers::pi);
  if (std::abs(steps - std::round(steps)) > 1e-12)
    throw ConfigError("harper_spec: flux must lie in 2*pi*Z/L to be well defined on the torus");
  HamiltonianSpec spec;
  spec.lattice = TorusLattice(L);
  spec.hopping = HoppingAmplitudes(spec.lattice);
  spec.mu = mu;
  spec.N = N;
  spec.base_flux = Phi;
  spec.basis_cap = basis_cap;
  for (int i = 0; i < spec.lattice.num_sites(); ++i) {
    Site s = spec.lattice.site_at(i);
    spec.hopping.at(spec.lattice, s, 1) = cplx(t, 0);
    spec.hopping.at(spec.lattice, s, 2) = t * std::exp(cplx(0, Phi * s.x1));
  }
  if (U != 0.0) {
    for (int i = 0; i < spec.lattice.num_sites(); ++i) {
      Site s = spec.lattice.site_at(i);
      for (int axis : {1, 2})
        spec.interactions.push_back({{s, spec.lattice.neighbor(s, axis, +1)}, U});
    }
  }
  return spec;
}

// Appends on-site density terms sum_x w(x) n_x to the interaction list. Used to
// lift accidental momentum degeneracies on very small tori, where the bare
// model violates the non-degenerate ground-state assumption.
inline void add_onsite_potential(HamiltonianSpec& spec, const SiteFunction& w) {
  for (int i = 0; i < spec.lattice.num_sites(); ++i) {
    double v = w.at_index(i);
    if (v != 0.0) spec.interactions.push_back({{spec.lattice.site_at(i)}, v});
  }
}

// Fixed aperiodic pinning profile; any symmetry-free on-site pattern does.
inline SiteFunction pinning_profile(const TorusLattice& lat, double amplitude) {
  SiteFunction w(lat);
  for (int i = 0; i < lat.num_sites(); ++i) w.at_index(i) = amplitude * std::sin(3.7 * i + 0.5);
  return w;
}

namespace detail {

// Assembles sum over directed bonds of coeff(x,y) c†_x c_y, optionally plus the
// diagonal (interactions and -mu N). bond_coeff(s, axis) supplies the
// coefficient of the canonical bond c†_s c_{s+e_axis}; the reverse bond gets
// its conjugate. Flux derivatives drop the diagonal: it carries no phases.
template <typename PhaseFn>
ManyBodyOperator assemble_hamiltonian(const HamiltonianSpec& spec, PhaseFn&& bond_coeff,
                                      bool include_diagonal = true) {
  const auto basis = spec.basis();
  const auto& lat = spec.lattice;
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(static_cast<std::size_t>(basis->dim()) * (2 * 2 + 1));

  struct Bond {
    int from, to;  // site indices, canonical direction
    cplx coeff;    // coefficient of c†_{from} c_{to}... see loop below
  };
  std::vector<Bond> bonds;
  bonds.reserve(4 * lat.num_sites());
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    for (int axis : {1, 2}) {
      Site tgt = lat.neighbor(s, axis, +1);
      cplx c = bond_coeff(s, axis);
      if (c != cplx(0, 0)) {
        bonds.push_back({lat.index_of(s), lat.index_of(tgt), c});            // c†_s c_{s+e}
        bonds.push_back({lat.index_of(tgt), lat.index_of(s), std::conj(c)});  // adjoint bond
      }
    }
  }

  struct DiagTerm {
    std::uint64_t mask;
    double coeff;
  };
  std::vector<DiagTerm> diag;
  if (include_diagonal) {
    for (const auto& term : spec.interactions) {
      std::uint64_t mask = 0;
      for (Site s : term.sites) mask |= 1ull << lat.index_of(s);
      diag.push_back({mask, term.coeff});
    }
  }

  for (std::int64_t col = 0; col < basis->dim(); ++col) {
    const std::uint64_t p = basis->state(col);
    double d = include_diagonal ? -spec.mu * std::popcount(p) : 0.0;
    for (const auto& t : diag)
      if ((p & t.mask) == t.mask) d += t.coeff;
    if (d != 0.0) trips.emplace_back(col, col, cplx(d, 0));
    for (const auto& b : bonds) {
      std::uint64_t out;
      int sign;
      if (basis->apply_hop(p, b.from, b.to, &out, &sign))
        trips.emplace_back(basis->index_of(out), col, b.coeff * static_cast<double>(sign));
    }
  }
  return ManyBodyOperator::from_triplets(basis, trips);
}

}  // namespace detail

// H with no vector potential.
inline ManyBodyOperator assemble(const HamiltonianSpec& spec) {
  return detail::assemble_hamiltonian(
      spec, [&](Site s, int axis) { return spec.hopping.at(spec.lattice, s, axis); });
}

// Peierls substitution H -> H_A.
inline ManyBodyOperator with_vector_potential(const HamiltonianSpec& spec, const OneForm& A) {
  const auto& lat = spec.lattice;
  return detail::assemble_hamiltonian(spec, [&](Site s, int axis) {
    Site t = lat.neighbor(s, axis, +1);
    // coefficient of c†_s c_t picks up the phase along (t -> s)
    return spec.hopping.at(lat, s, axis) * std::exp(cplx(0, A(lat, {t, s})));
  });
}

// H(phi1, phi2) = H_{phi1 xi1 + phi2 xi2}, with the twist phases written out.
inline ManyBodyOperator twist_hamiltonian(const HamiltonianSpec& spec, double phi1, double phi2) {
  const double L = spec.lattice.L();
  const cplx f1 = std::exp(cplx(0, -phi1 / L)), f2 = std::exp(cplx(0, -phi2 / L));
  return detail::assemble_hamiltonian(spec, [&](Site s, int axis) {
    return spec.hopping.at(spec.lattice, s, axis) * (axis == 1 ? f1 : f2);
  });
}

// W(A) = d/ds H_{sA} at s=0: every bond coefficient of c†_x c_y is multiplied
// by i A((y,x)). For globally exact A = dtheta this equals i[<theta,n>, H].
inline ManyBodyOperator drive_generator(const HamiltonianSpec& spec, const OneForm& A) {
  const auto& lat = spec.lattice;
  return detail::assemble_hamiltonian(
      spec,
      [&](Site s, int axis) {
        Site t = lat.neighbor(s, axis, +1);
        return spec.hopping.at(lat, s, axis) * cplx(0, A(lat, {t, s}));
      },
      /*include_diagonal=*/false);
}

// d/d(phi_j) H(phi) at phi=0; the twist phases make this -i/L on the canonical
// bonds of the j-direction.
inline ManyBodyOperator flux_derivative(const HamiltonianSpec& spec, int direction) {
  if (direction != 1 && direction != 2) throw ConfigError("flux_derivative: direction must be 1 or 2");
  const double L = spec.lattice.L();
  return detail::assemble_hamiltonian(
      spec,
      [&](Site s, int axis) {
        return axis == direction ? spec.hopping.at(spec.lattice, s, axis) * cplx(0, -1.0 / L)
                                 : cplx(0, 0);
      },
      /*include_diagonal=*/false);
}

// Charge current through an oriented dual path. Each dual edge contributes the
// hopping flow across it, signed so that for a full region boundary (right
// sites inside) the sum equals i[H, n_X] exactly.
struct CurrentOperator {
  std::vector<DualPath> components;
  ManyBodyOperator op;
};

namespace detail {

inline ManyBodyOperator current_from_edges(const HamiltonianSpec& spec,
                                           const std::vector<DualEdge>& edges,
                                           const OneForm* A) {
  const auto basis = spec.basis();
  const auto& lat = spec.lattice;
  std::vector<Eigen::Triplet<cplx>> trips;
  for (const auto& e : edges) {
    cplx a_lr = spec.hopping.alpha(lat, e.left, e.right);   // c†_L c_R coefficient
    cplx a_rl = std::conj(a_lr);
    if (A) {
      a_lr *= std::exp(cplx(0, (*A)(lat, {e.right, e.left})));
      a_rl = std::conj(a_lr);
    }
    const int li = lat.index_of(e.left), ri = lat.index_of(e.right);
    for (std::int64_t col = 0; col < basis->dim(); ++col) {
      const std::uint64_t p = basis->state(col);
      std::uint64_t out;
      int sign;
      if (basis->apply_hop(p, li, ri, &out, &sign))
        trips.emplace_back(basis->index_of(out), col, cplx(0, 1) * a_lr * static_cast<double>(sign));
      if (basis->apply_hop(p, ri, li, &out, &sign))
        trips.emplace_back(basis->index_of(out), col, cplx(0, -1) * a_rl * static_cast<double>(sign));
    }
  }
  return ManyBodyOperator::from_triplets(basis, trips);
}

}  // namespace detail

// J_gamma for a dual path (validated); A, when given, Peierls-substitutes the
// amplitudes entering the current.
inline CurrentOperator current_path(const HamiltonianSpec& spec, const DualPath& gamma,
                                    const OneForm* A = nullptr) {
  validate_dual_path(spec.lattice, gamma);
  return {{gamma}, detail::current_from_edges(spec, gamma.edges, A)};
}

// J_{boundary of X} = i [H, n_X], assembled as the dual-edge sum over all
// boundary components.
inline CurrentOperator current_loop(const HamiltonianSpec& spec, const SiteSet& X,
                                    const OneForm* A = nullptr) {
  if (X.empty() || X.size() == spec.lattice.num_sites())
    return {{}, ManyBodyOperator::zero(spec.basis())};
  auto loops = boundary_path(spec.lattice, X);
  std::vector<DualEdge> all;
  for (const auto& l : loops) all.insert(all.end(), l.edges.begin(), l.edges.end());
  return {loops, detail::current_from_edges(spec, all, A)};
}

}  // namespace hall
