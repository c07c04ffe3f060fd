#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "hall/hamiltonian.hpp"
#include "hall/lanczos.hpp"

namespace hall {

enum class SpectralMode { Full, GroundOnly };

struct SpectralOptions {
  int dense_cap = 4000;       // largest dimension for a full eigendecomposition
  double gap_floor = 1e-8;    // below this the gap assumption is declared violated
  double lanczos_tol = 1e-12;
  int lanczos_max_iter = 600;
};

// Spectral filter profile: odd, purely imaginary, continuous, with
// W_hat(zeta) = -i / (sqrt(2 pi) zeta) for |zeta| >= g/2 and a linear
// continuation inside the gap window.
struct FilterTransform {
  double gap = 0.0;

  cplx what(double zeta) const {
    const double s = std::sqrt(2.0 * std::numbers::pi);
    if (std::abs(zeta) >= gap / 2.0) return cplx(0, -1.0 / (s * zeta));
    return cplx(0, -4.0 * zeta / (s * gap * gap));
  }

  // sqrt(2 pi) * W_hat, the factor applied per eigenpair.
  cplx scaled(double zeta) const {
    if (std::abs(zeta) >= gap / 2.0) return cplx(0, -1.0 / zeta);
    return cplx(0, -4.0 * zeta / (gap * gap));
  }

  double sup_abs_what() const { return 2.0 / (std::sqrt(2.0 * std::numbers::pi) * gap); }
};

// Ground-state data of a sector Hamiltonian: energy, state, gap, and (in full
// mode) the complete eigendecomposition.
class SpectralCache {
 public:
  SpectralCache(ManyBodyOperator H, SpectralMode mode, const SpectralOptions& opts = {})
      : H_(std::move(H)), mode_(mode) {
    const double scale = std::max(1.0, H_.max_abs());
    if ((H_ - H_.adjoint()).max_abs() > 1e-11 * scale)
      throw ConfigError("SpectralCache: operator is not Hermitian");

    if (mode_ == SpectralMode::Full) {
      if (H_.dim() > opts.dense_cap)
        throw CapacityError("SpectralCache: dimension " + std::to_string(H_.dim()) +
                            " above dense cap " + std::to_string(opts.dense_cap));
      Eigen::SelfAdjointEigenSolver<DenseMat> es(H_.dense());
      if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
      evals_ = es.eigenvalues();
      evecs_ = es.eigenvectors();
      E0_ = evals_(0);
      psi_ = evecs_.col(0);
      gap_ = H_.dim() > 1 ? evals_(1) - evals_(0) : std::numeric_limits<double>::infinity();
      residual_ = 0.0;
    } else {
      auto r = lanczos_lowest(H_.matrix(), 2, opts.lanczos_tol, opts.lanczos_max_iter);
      E0_ = r.values(0);
      psi_ = r.vectors.col(0);
      gap_ = r.values.size() > 1 ? r.values(1) - r.values(0)
                                 : std::numeric_limits<double>::infinity();
      residual_ = r.residual;
      // Lanczos finds one copy of a degenerate level; a second run from an
      // independent start vector exposes hidden degeneracy through the ground
      // vectors disagreeing.
      auto r2 = lanczos_lowest(H_.matrix(), 1, opts.lanczos_tol, opts.lanczos_max_iter, 0xf00dULL);
      double overlap = std::abs(psi_.dot(r2.vectors.col(0)));
      if (overlap * overlap < 1.0 - 1e-6)
        throw AssumptionViolation("ground state degenerate: independent Lanczos runs disagree");
    }
    if (gap_ < opts.gap_floor)
      throw AssumptionViolation("ground state degenerate within gap floor: gap = " +
                                std::to_string(gap_));
  }

  const ManyBodyOperator& hamiltonian() const { return H_; }
  const BasisPtr& basis() const { return H_.basis(); }
  bool full() const { return mode_ == SpectralMode::Full; }
  double ground_energy() const { return E0_; }
  double gap() const { return gap_; }
  double solver_residual() const { return residual_; }
  const Vec& ground_state() const { return psi_; }

  const Eigen::VectorXd& eigenvalues() const {
    require_full();
    return evals_;
  }
  const DenseMat& eigenvectors() const {
    require_full();
    return evecs_;
  }

  FilterTransform filter() const { return FilterTransform{gap_}; }

  void require_full() const {
    if (!full())
      throw CapabilityError("operation requires a full eigendecomposition (mode Full)");
  }

 private:
  ManyBodyOperator H_;
  SpectralMode mode_;
  double E0_ = 0.0, gap_ = 0.0, residual_ = 0.0;
  Vec psi_;
  Eigen::VectorXd evals_;
  DenseMat evecs_;
};

inline SpectralCache ground_state(const ManyBodyOperator& H, SpectralMode mode,
                                  const SpectralOptions& opts = {}) {
  return SpectralCache(H, mode, opts);
}

// omega(O) = <Psi, O Psi>.
inline cplx expectation(const SpectralCache& cache, const ManyBodyOperator& O) {
  cache.hamiltonian().check_compatible(O);
  return cache.ground_state().dot(O.apply(cache.ground_state()));
}

// Off-diagonal projection O -> P O P^perp + P^perp O P (rank <= 2).
inline ManyBodyOperator offdiag(const SpectralCache& cache, const ManyBodyOperator& O) {
  cache.hamiltonian().check_compatible(O);
  const Vec& psi = cache.ground_state();
  Vec opsi = O.apply(psi);
  Vec odag_psi = O.adjoint().apply(psi);
  cplx w = psi.dot(opsi);
  DenseMat out = psi * odag_psi.adjoint() + opsi * psi.adjoint() -
                 (2.0 * w) * (psi * psi.adjoint());
  return ManyBodyOperator::from_dense(O.basis(), out);
}

// I(O): matrix elements sqrt(2 pi) W_hat(E_m - E_n) O_mn in the eigenbasis.
// On off-diagonal operators this inverts -i ad_H: [H, I(O-bar)] = -i O-bar.
inline ManyBodyOperator quasi_adiabatic_map(const SpectralCache& cache,
                                            const ManyBodyOperator& O) {
  cache.require_full();
  cache.hamiltonian().check_compatible(O);
  const auto& V = cache.eigenvectors();
  const auto& E = cache.eigenvalues();
  const FilterTransform f = cache.filter();
  DenseMat tilde = V.adjoint() * O.dense() * V;
  for (int m = 0; m < tilde.rows(); ++m)
    for (int n = 0; n < tilde.cols(); ++n) {
      double z = E(m) - E(n);
      tilde(m, n) *= (m == n) ? cplx(0, 0) : f.scaled(z);
    }
  return ManyBodyOperator::from_dense(O.basis(), DenseMat(V * tilde * V.adjoint()));
}

// K_j = I(d/d(phi_j) H); generates parallel transport: dP/d(phi_j) = -i [K_j, P].
inline ManyBodyOperator parallel_transport_generator(const SpectralCache& cache,
                                                     const HamiltonianSpec& spec, int direction) {
  return quasi_adiabatic_map(cache, flux_derivative(spec, direction));
}

enum class DerivativeMethod { Perturbation, FiniteDifference };

// dP/d(phi_j) at phi = 0. Perturbation route uses the reduced resolvent of the
// non-degenerate ground state; finite differences build P(+-h) from fresh
// ground states of the twisted Hamiltonian.
inline ManyBodyOperator projector_derivative(const SpectralCache& cache,
                                             const HamiltonianSpec& spec, int direction,
                                             DerivativeMethod method = DerivativeMethod::Perturbation,
                                             double h = 1e-4,
                                             const SpectralOptions& opts = {}) {
  if (method == DerivativeMethod::Perturbation) {
    cache.require_full();
    const auto& V = cache.eigenvectors();
    const auto& E = cache.eigenvalues();
    ManyBodyOperator D = flux_derivative(spec, direction);
    DenseMat tilde = V.adjoint() * D.dense() * V;
    const int n = static_cast<int>(tilde.rows());
    DenseMat dP = DenseMat::Zero(n, n);
    for (int m = 1; m < n; ++m) {
      dP(m, 0) = tilde(m, 0) / (E(0) - E(m));
      dP(0, m) = tilde(0, m) / (E(0) - E(m));
    }
    return ManyBodyOperator::from_dense(D.basis(), DenseMat(V * dP * V.adjoint()));
  }
  // central difference of the ground projector
  auto projector_at = [&](double phi) {
    ManyBodyOperator Hp = direction == 1 ? twist_hamiltonian(spec, phi, 0.0)
                                         : twist_hamiltonian(spec, 0.0, phi);
    SpectralCache c(Hp, SpectralMode::GroundOnly, opts);
    const Vec& p = c.ground_state();
    return DenseMat(p * p.adjoint());
  };
  DenseMat dP = (projector_at(+h) - projector_at(-h)) / (2.0 * h);
  return ManyBodyOperator::from_dense(cache.basis(), dP);
}

}  // namespace hall
