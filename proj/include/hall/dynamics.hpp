#pragma once

#include <cmath>
#include <numbers>

#include "hall/response.hpp"

namespace hall {

// Drive amplitude a(s) = s * w(s) on s in [-1, 0]: identically zero up to
// flat_end (all derivatives vanish there), a(0) = 0 and a'(0) = 1, and on
// [ramp_end, 0] the Hamiltonian family is exactly H_{sA}.
struct SwitchingFunction {
  double flat_end = -0.9;
  double ramp_end = -0.4;

  static double smoothstep(double u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
  }

  double window(double s) const { return smoothstep((s - flat_end) / (ramp_end - flat_end)); }
  double operator()(double s) const { return s * window(s); }

  double slope_at_zero() const {
    const double h = 1e-6;
    return ((*this)(h) - (*this)(-h)) / (2 * h);
  }

  double max_abs_derivative(double at, int orders = 4, double h = 1e-3) const {
    // central-difference derivative estimates, used for the flat-start check
    double worst = 0.0;
    std::vector<double> vals;
    for (int k = -orders; k <= orders; ++k) vals.push_back((*this)(at + k * h));
    std::vector<double> cur = vals;
    for (int o = 1; o <= orders; ++o) {
      std::vector<double> next(cur.size() - 1);
      for (std::size_t i = 0; i + 1 < cur.size(); ++i) next[i] = (cur[i + 1] - cur[i]) / h;
      cur = next;
      worst = std::max(worst, std::abs(cur[cur.size() / 2]));
    }
    return worst;
  }
};

struct RampProtocol {
  OneForm drive;           // the one-form A being switched on
  double rate = 0.05;      // eps
  double dt_factor = 0.05; // dt = min(dt_factor / ||H||_bound, dt_factor)
  int checkpoints = 32;
  SwitchingFunction a;
};

struct AdiabaticRun {
  std::vector<double> s_grid;
  std::vector<double> observable_trace;  // <J>(s) at the checkpoints
  std::vector<double> energy_trace;      // <H(s)>(s)
  double final_observable = 0.0;
  double norm_drift = 0.0;
  double ground_fidelity = 0.0;  // |<Psi_0, Psi(s=0)>|
  Vec final_state;
};

namespace detail {

// Cached matrix structure of H_{aA} as a function of the drive amplitude a:
// every hopping entry is base * exp(i a phase), the diagonal is amplitude
// independent. Filling a preallocated dense matrix this way is orders of
// magnitude cheaper than reassembling a sparse operator per time step.
class DriveableHamiltonian {
 public:
  DriveableHamiltonian(const HamiltonianSpec& spec, const OneForm& A) {
    const auto basis = spec.basis();
    const auto& lat = spec.lattice;
    dim_ = basis->dim();

    struct Bond {
      int from, to;
      cplx coeff;
      double phase;
    };
    std::vector<Bond> bonds;
    for (int i = 0; i < lat.num_sites(); ++i) {
      Site s = lat.site_at(i);
      for (int axis : {1, 2}) {
        Site t = lat.neighbor(s, axis, +1);
        cplx c = spec.hopping.at(lat, s, axis);
        if (c == cplx(0, 0)) continue;
        double ph = A(lat, {t, s});  // phase along annihilation -> creation
        bonds.push_back({lat.index_of(s), lat.index_of(t), c, ph});
        bonds.push_back({lat.index_of(t), lat.index_of(s), std::conj(c), -ph});
      }
    }
    std::vector<std::pair<std::uint64_t, double>> diag_terms;
    for (const auto& term : spec.interactions) {
      std::uint64_t mask = 0;
      for (Site s : term.sites) mask |= 1ull << lat.index_of(s);
      diag_terms.push_back({mask, term.coeff});
    }
    diag_.resize(dim_);
    for (std::int64_t col = 0; col < dim_; ++col) {
      const std::uint64_t p = basis->state(col);
      double d = -spec.mu * std::popcount(p);
      for (const auto& [mask, coeff] : diag_terms)
        if ((p & mask) == mask) d += coeff;
      diag_[col] = d;
      for (const auto& b : bonds) {
        std::uint64_t out;
        int sign;
        if (basis->apply_hop(p, b.from, b.to, &out, &sign))
          entries_.push_back({basis->index_of(out), col,
                              b.coeff * static_cast<double>(sign), b.phase});
      }
    }
  }

  std::int64_t dim() const { return dim_; }

  // H(combo) = sum_k weight_k * H(amplitude_k), filled into a dense matrix.
  void fill(const std::vector<std::pair<double, double>>& weight_amp, DenseMat& out) const {
    out.setZero(dim_, dim_);
    double wsum = 0;
    for (auto [w, a] : weight_amp) wsum += w;
    for (std::int64_t i = 0; i < dim_; ++i) out(i, i) = wsum * diag_[i];
    for (const auto& e : entries_) {
      cplx v(0, 0);
      for (auto [w, a] : weight_amp) v += w * std::exp(cplx(0, e.phase * a));
      out(e.row, e.col) += e.base * v;
    }
  }

  // Same with a fixed-pattern sparse matrix for the Krylov path; the pattern
  // and value slots are computed once.
  void prepare_sparse(SparseMat& m) {
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(entries_.size() + dim_);
    for (std::int64_t i = 0; i < dim_; ++i) trips.emplace_back(i, i, cplx(1, 0));
    for (const auto& e : entries_) trips.emplace_back(e.row, e.col, cplx(1, 0));
    m.resize(dim_, dim_);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    auto slot = [&](std::int64_t row, std::int64_t col) {
      const auto* outer = m.outerIndexPtr();
      const auto* inner = m.innerIndexPtr();
      auto lo = inner + outer[col], hi = inner + outer[col + 1];
      return static_cast<std::ptrdiff_t>(std::lower_bound(lo, hi, row) - inner);
    };
    entry_slots_.resize(entries_.size());
    for (std::size_t k = 0; k < entries_.size(); ++k)
      entry_slots_[k] = slot(entries_[k].row, entries_[k].col);
    diag_slots_.resize(dim_);
    for (std::int64_t i = 0; i < dim_; ++i) diag_slots_[i] = slot(i, i);
  }

  void fill_sparse(const std::vector<std::pair<double, double>>& weight_amp, SparseMat& m) const {
    cplx* vals = m.valuePtr();
    std::fill(vals, vals + m.nonZeros(), cplx(0, 0));
    double wsum = 0;
    for (auto [w, a] : weight_amp) wsum += w;
    for (std::int64_t i = 0; i < dim_; ++i) vals[diag_slots_[i]] = wsum * diag_[i];
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      const auto& e = entries_[k];
      cplx v(0, 0);
      for (auto [w, a] : weight_amp) v += w * std::exp(cplx(0, e.phase * a));
      vals[entry_slots_[k]] += e.base * v;
    }
  }

  double gershgorin() const {
    std::vector<double> rows(dim_, 0.0);
    for (std::int64_t i = 0; i < dim_; ++i) rows[i] = std::abs(diag_[i]);
    for (const auto& e : entries_) rows[e.row] += std::abs(e.base);
    double b = 0;
    for (double r : rows) b = std::max(b, r);
    return std::max(b, 1e-12);
  }

 private:
  struct Entry {
    std::int64_t row, col;
    cplx base;
    double phase;
  };
  std::int64_t dim_ = 0;
  std::vector<Entry> entries_;
  std::vector<double> diag_;
  std::vector<std::ptrdiff_t> entry_slots_, diag_slots_;
};

inline double gershgorin_bound(const SparseMat& m) {
  std::vector<double> row_sums(m.rows(), 0.0);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
  double b = 0;
  for (double r : row_sums) b = std::max(b, r);
  return std::max(b, 1e-12);
}

// psi <- exp(-i dt H) psi by a Lanczos-Krylov projection. For the step sizes
// the propagator chooses (||H|| dt ~ 0.05) a handful of Krylov vectors is
// converged to rounding; the step-refinement invariant in the tests guards it.
template <typename Op>
inline void apply_exponential(const Op& H, double dt, Vec& psi, int krylov = 20) {
  const int n = static_cast<int>(H.rows());
  const int m = std::min(krylov, n);
  double norm0 = psi.norm();
  std::vector<Vec> basis;
  basis.reserve(m);
  basis.push_back(psi / norm0);
  std::vector<double> alpha, beta;
  for (int j = 0; j < m; ++j) {
    Vec w = H * basis[j];
    double a = basis[j].dot(w).real();
    alpha.push_back(a);
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    for (const auto& b : basis) w -= b.dot(w) * b;  // full reorth
    double bn = w.norm();
    if (j + 1 == m || bn < 1e-14) {
      int mm = j + 1;
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mm, mm);
      for (int i = 0; i < mm; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < mm) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      Eigen::VectorXcd small = Eigen::VectorXcd::Zero(mm);
      for (int i = 0; i < mm; ++i) {
        cplx c(0, 0);
        for (int p = 0; p < mm; ++p)
          c += es.eigenvectors()(i, p) * std::exp(cplx(0, -dt * es.eigenvalues()(p))) *
               es.eigenvectors()(0, p);
        small(i) = c;
      }
      Vec out = Vec::Zero(psi.size());
      for (int i = 0; i < mm; ++i) out += small(i) * basis[i];
      psi = norm0 * out;
      return;
    }
    beta.push_back(bn);
    basis.push_back(w / bn);
  }
}

}  // namespace detail

// Integrates i d/dt Psi = H(a(eps t) A) Psi from s = -1 to s = 0 with a
// fourth-order commutator-free Magnus scheme (two exponentials per step, the
// Hamiltonian sampled at the two Gauss nodes).
inline AdiabaticRun propagate(const HamiltonianSpec& spec, const RampProtocol& ramp,
                              const ManyBodyOperator& J, const SpectralOptions& opts = {}) {
  const double eps = ramp.rate;
  if (eps <= 0) throw ConfigError("propagate: rate must be positive");

  detail::DriveableHamiltonian drive(spec, ramp.drive);
  const std::int64_t dim = drive.dim();
  const bool dense_path = dim <= 512;

  SpectralCache start(assemble(spec), SpectralMode::GroundOnly, opts);  // a(-1) = 0
  Vec psi = start.ground_state();
  const Vec psi0 = psi;

  const double hbound = drive.gershgorin();
  double dt = std::min(ramp.dt_factor / hbound, ramp.dt_factor);
  const double T = 1.0 / eps;
  const long steps = std::max<long>(1, std::lround(T / dt));
  dt = T / steps;

  const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double w1 = 0.25 - std::sqrt(3.0) / 6.0, w2 = 0.25 + std::sqrt(3.0) / 6.0;

  DenseMat gd;
  SparseMat gs;
  if (!dense_path) drive.prepare_sparse(gs);
  auto step_with = [&](double amp1, double amp2, double wa, double wb) {
    if (dense_path) {
      drive.fill({{wa, amp1}, {wb, amp2}}, gd);
      detail::apply_exponential(gd, dt, psi);
    } else {
      drive.fill_sparse({{wa, amp1}, {wb, amp2}}, gs);
      detail::apply_exponential(gs, dt, psi);
    }
  };

  AdiabaticRun run;
  const long stride = std::max<long>(1, steps / std::max(1, ramp.checkpoints));
  auto h_expectation = [&](double s) {
    if (dense_path) {
      drive.fill({{1.0, ramp.a(s)}}, gd);
      return psi.dot(gd * psi).real();
    }
    drive.fill_sparse({{1.0, ramp.a(s)}}, gs);
    return psi.dot(gs * psi).real();
  };
  for (long step = 0; step < steps; ++step) {
    double t = -T + step * dt;
    double amp1 = ramp.a(eps * (t + c1 * dt)), amp2 = ramp.a(eps * (t + c2 * dt));
    step_with(amp1, amp2, w2, w1);  // exp(-i dt (w2 H1 + w1 H2)) first
    step_with(amp1, amp2, w1, w2);
    if (step % stride == 0 || step == steps - 1) {
      double s = eps * (t + dt);
      run.s_grid.push_back(s);
      run.observable_trace.push_back(psi.dot(J.apply(psi)).real());
      run.energy_trace.push_back(h_expectation(s));
    }
  }
  run.norm_drift = std::abs(psi.norm() - 1.0);
  if (run.norm_drift > 1e-8)
    throw SolverError("propagate: norm drift " + std::to_string(run.norm_drift) +
                      "; reduce the step size");
  run.final_state = psi;
  run.final_observable = psi.dot(J.apply(psi)).real();
  run.ground_fidelity = std::abs(psi0.dot(psi));
  return run;
}

struct AdiabaticResponseResult {
  std::vector<double> rates;
  std::vector<double> quotients;  // (<J>_eps - <J>_gs) / (eps a'(0))
  double value = 0.0;             // Richardson-extrapolated chi_ad
  double error_bar = 0.0;
  double slope_normalization = 1.0;
};

// chi_ad from a ladder of slow rates, extrapolated with the quadratic model
// chi(eps) = chi0 + c1 eps + c2 eps^2. The reported bar combines the fit
// residual with the curvature-term scale at the smallest rate.
inline AdiabaticResponseResult adiabatic_response(const HamiltonianSpec& spec, const OneForm& A,
                                                  const ManyBodyOperator& J,
                                                  const std::vector<double>& ladder,
                                                  const RampProtocol& proto = {},
                                                  const SpectralOptions& opts = {}) {
  if (ladder.size() < 3) throw ConfigError("adiabatic_response: need at least 3 rates");
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
    if (ladder[i + 1] >= ladder[i])
      throw ConfigError("adiabatic_response: ladder must decrease monotonically");

  SpectralCache gs(assemble(spec), SpectralMode::GroundOnly, opts);
  const double j_gs = expectation(gs, J).real();
  const double slope = proto.a.slope_at_zero();

  AdiabaticResponseResult out;
  out.slope_normalization = slope;
  out.rates = ladder;
  out.quotients.resize(ladder.size());
  parallel_for(static_cast<int>(ladder.size()), [&](int i) {
    RampProtocol ramp = proto;
    ramp.drive = A;
    ramp.rate = ladder[i];
    AdiabaticRun run = propagate(spec, ramp, J, opts);
    out.quotients[i] = (run.final_observable - j_gs) / (ladder[i] * slope);
  });

  // least-squares quadratic fit in eps
  const int n = static_cast<int>(ladder.size());
  Eigen::MatrixXd M(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    M(i, 0) = 1.0;
    M(i, 1) = ladder[i];
    M(i, 2) = ladder[i] * ladder[i];
    y(i) = out.quotients[i];
  }
  Eigen::VectorXd coef = M.colPivHouseholderQr().solve(y);
  out.value = coef(0);
  double rss = (M * coef - y).norm() / std::sqrt(std::max(1, n - 3 + 1));
  double floor = std::abs(coef(2)) * ladder.back() * ladder.back();
  out.error_bar = rss + floor;
  return out;
}

// Exact eigenbasis evaluation of the same limit:
// chi_ad = i sum_m [W_0m J_m0 - J_0m W_m0] / (E_m - E_0)^2, W the drive
// generator. Cross-validates the propagated value.
inline double adiabatic_response_spectral(const SpectralCache& cache, const HamiltonianSpec& spec,
                                          const OneForm& A, const ManyBodyOperator& J) {
  cache.require_full();
  Vec w = detail::ground_row(cache, drive_generator(spec, A));
  Vec j = detail::ground_row(cache, J);
  const auto& E = cache.eigenvalues();
  cplx acc(0, 0);
  for (int m = 1; m < w.size(); ++m) {
    double delta = E(m) - E(0);
    acc += (std::conj(w(m)) * j(m) - std::conj(j(m)) * w(m)) / (delta * delta);
  }
  return (cplx(0, 1) * acc).real();
}

struct EmfResult {
  double kappa = 0.0;
  double chi_ad = 0.0;
  double chi_ad_bar = 0.0;
  double emf = 0.0;
  double discrepancy = 0.0;
  double relative_error = 0.0;
  bool degenerate_drive = false;
};

// Slowly switching on a vortex-free A drives J_gamma; the ratio of response to
// electromotive force approximates the curvature. Open paths require A to
// vanish on radius-r balls around the endpoints.
inline EmfResult emf_experiment(const HamiltonianSpec& spec, const DualPath& gamma,
                                const OneForm& A, double r, const std::vector<double>& ladder,
                                const RampProtocol& proto = {}, const SpectralOptions& opts = {}) {
  const auto& lat = spec.lattice;
  validate_dual_path(lat, gamma);
  if (!is_vortex_free(lat, A))
    throw ConfigError("emf_experiment: drive must be vortex-free");
  if (!gamma.closed()) {
    if (!vanishes_near_dual_vertex(lat, A, gamma.edges.front().from, r) ||
        !vanishes_near_dual_vertex(lat, A, gamma.edges.back().to, r))
      throw ConfigError("emf_experiment: drive must vanish near the path endpoints");
  }
  EmfResult out;
  out.emf = integrate_along_dual(lat, A, gamma);
  out.kappa = adiabatic_curvature(spec, CurvatureRoute::Generators, opts).value;
  ManyBodyOperator J = current_path(spec, gamma).op;
  auto resp = adiabatic_response(spec, A, J, ladder, proto, opts);
  out.chi_ad = resp.value;
  out.chi_ad_bar = resp.error_bar;
  if (std::abs(out.emf) < 1e-12) {
    out.degenerate_drive = true;
    return out;
  }
  out.discrepancy = std::abs(out.kappa - out.chi_ad / out.emf);
  out.relative_error = out.discrepancy / std::max(1e-300, std::abs(out.kappa));
  return out;
}

}  // namespace hall
