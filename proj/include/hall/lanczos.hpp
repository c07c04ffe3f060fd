#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <random>
#include <vector>

#include "hall/errors.hpp"

namespace hall {

struct LanczosResult {
  Eigen::VectorXd values;   // lowest eigenvalues, ascending
  Eigen::MatrixXcd vectors; // matching Ritz vectors
  int iterations = 0;
  double residual = 0.0;    // max residual norm over the returned pairs
};

// Lowest k eigenpairs of a Hermitian sparse matrix by Lanczos with full
// reorthogonalization. Deterministic start vector, so results are reproducible.
inline LanczosResult lanczos_lowest(const Eigen::SparseMatrix<std::complex<double>>& H, int k,
                                    double tol = 1e-12, int max_iter = 600,
                                    std::uint64_t seed = 0x5eedULL) {
  using Vec = Eigen::VectorXcd;
  const int n = static_cast<int>(H.rows());
  if (n == 0) throw SolverError("lanczos: empty matrix");

  if (n <= std::max(256, 4 * k)) {
    Eigen::MatrixXcd dense(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    LanczosResult r;
    int kk = std::min<int>(k, n);
    r.values = es.eigenvalues().head(kk);
    r.vectors = es.eigenvectors().leftCols(kk);
    r.residual = 0.0;
    return r;
  }

  std::mt19937_64 rng(seed);  // numerics only, not physics
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = std::complex<double>(gauss(rng), gauss(rng));
  v.normalize();

  const int m_max = std::min(n, max_iter);
  std::vector<Vec> basis;
  basis.reserve(m_max);
  basis.push_back(v);
  std::vector<double> alpha, beta;

  double h_scale = 0.0;
  for (int j = 0; j < H.outerSize(); ++j)
    for (Eigen::SparseMatrix<std::complex<double>>::InnerIterator it(H, j); it; ++it)
      h_scale = std::max(h_scale, std::abs(it.value()));
  h_scale = std::max(h_scale, 1.0);

  LanczosResult result;
  for (int j = 0; j < m_max; ++j) {
    Vec w = H * basis[j];
    std::complex<double> a = basis[j].dot(w);
    alpha.push_back(a.real());
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    double bnorm = w.norm();

    const int m = j + 1;
    bool check_now = (m >= 2 * k && m % 5 == 0) || bnorm < 1e-13 * h_scale || j == m_max - 1;
    if (check_now) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const int kk = std::min(k, m);
      // Residual estimate: |beta_m * last component of Ritz vector|.
      double rmax = 0.0;
      for (int p = 0; p < kk; ++p)
        rmax = std::max(rmax, bnorm * std::abs(es.eigenvectors()(m - 1, p)));
      if (rmax <= tol * h_scale || bnorm < 1e-13 * h_scale || j == m_max - 1) {
        if (rmax > 1e-6 * h_scale && j == m_max - 1)
          throw SolverError("lanczos: no convergence; residual " + std::to_string(rmax));
        result.values = es.eigenvalues().head(kk);
        result.vectors = Eigen::MatrixXcd::Zero(n, kk);
        for (int p = 0; p < kk; ++p)
          for (int i = 0; i < m; ++i) result.vectors.col(p) += es.eigenvectors()(i, p) * basis[i];
        for (int p = 0; p < kk; ++p) result.vectors.col(p).normalize();
        result.iterations = m;
        result.residual = rmax;
        return result;
      }
    }
    if (bnorm < 1e-13 * h_scale) break;  // invariant subspace, handled above
    beta.push_back(bnorm);
    basis.push_back(w / bnorm);
  }
  throw SolverError("lanczos: iteration limit reached without convergence");
}

}  // namespace hall
