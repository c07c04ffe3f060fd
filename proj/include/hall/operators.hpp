#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <vector>

#include "hall/basis.hpp"
#include "hall/one_form.hpp"

namespace hall {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx>;
using DenseMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Sparse operator on a fixed-N sector. Mixing operators from different sectors
// is rejected.
class ManyBodyOperator {
 public:
  ManyBodyOperator() = default;
  ManyBodyOperator(BasisPtr basis, SparseMat mat) : basis_(std::move(basis)), mat_(std::move(mat)) {}

  static ManyBodyOperator zero(BasisPtr basis) {
    SparseMat m(basis->dim(), basis->dim());
    return {std::move(basis), std::move(m)};
  }

  static ManyBodyOperator identity(BasisPtr basis) {
    SparseMat m(basis->dim(), basis->dim());
    m.setIdentity();
    return {std::move(basis), std::move(m)};
  }

  static ManyBodyOperator from_triplets(BasisPtr basis,
                                        const std::vector<Eigen::Triplet<cplx>>& trips) {
    SparseMat m(basis->dim(), basis->dim());
    m.setFromTriplets(trips.begin(), trips.end());
    return {std::move(basis), std::move(m)};
  }

  static ManyBodyOperator from_dense(BasisPtr basis, const DenseMat& d, double prune = 0.0) {
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int j = 0; j < d.cols(); ++j)
      for (int i = 0; i < d.rows(); ++i)
        if (std::abs(d(i, j)) > prune) trips.emplace_back(i, j, d(i, j));
    return from_triplets(std::move(basis), trips);
  }

  const BasisPtr& basis() const { return basis_; }
  const SparseMat& matrix() const { return mat_; }
  std::int64_t dim() const { return mat_.rows(); }

  DenseMat dense() const { return DenseMat(mat_); }

  Vec apply(const Vec& v) const { return mat_ * v; }

  ManyBodyOperator adjoint() const { return {basis_, SparseMat(mat_.adjoint())}; }

  double max_abs() const {
    double m = 0.0;
    for (int k = 0; k < mat_.outerSize(); ++k)
      for (SparseMat::InnerIterator it(mat_, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
  }

  ManyBodyOperator& operator+=(const ManyBodyOperator& o) {
    check_compatible(o);
    mat_ += o.mat_;
    return *this;
  }
  ManyBodyOperator& operator-=(const ManyBodyOperator& o) {
    check_compatible(o);
    mat_ -= o.mat_;
    return *this;
  }
  friend ManyBodyOperator operator+(ManyBodyOperator a, const ManyBodyOperator& b) { return a += b; }
  friend ManyBodyOperator operator-(ManyBodyOperator a, const ManyBodyOperator& b) { return a -= b; }
  friend ManyBodyOperator operator*(cplx c, ManyBodyOperator a) {
    a.mat_ *= c;
    return a;
  }
  friend ManyBodyOperator operator*(const ManyBodyOperator& a, const ManyBodyOperator& b) {
    a.check_compatible(b);
    return {a.basis_, SparseMat(a.mat_ * b.mat_)};
  }

  void check_compatible(const ManyBodyOperator& o) const {
    if (!basis_ || !o.basis_ || !basis_->same_sector(*o.basis_) || mat_.rows() != o.mat_.rows())
      throw BasisMismatch("operators live on different sectors");
  }

 private:
  BasisPtr basis_;
  SparseMat mat_;
};

inline ManyBodyOperator commutator(const ManyBodyOperator& a, const ManyBodyOperator& b) {
  return a * b - b * a;
}

// amplitude * c†_x c_y with the row-major Jordan-Wigner sign convention.
inline ManyBodyOperator hopping_term(BasisPtr basis, Site x, Site y, cplx amplitude) {
  const auto& lat = basis->lattice();
  const int xi = lat.index_of(x), yi = lat.index_of(y);
  if (xi == yi) throw ConfigError("hopping_term: x == y; use number_operator for densities");
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::int64_t col = 0; col < basis->dim(); ++col) {
    std::uint64_t out;
    int sign;
    if (basis->apply_hop(basis->state(col), xi, yi, &out, &sign))
      trips.emplace_back(basis->index_of(out), col, amplitude * static_cast<double>(sign));
  }
  return ManyBodyOperator::from_triplets(std::move(basis), trips);
}

// n_X = sum of site densities over X (diagonal).
inline ManyBodyOperator number_operator(BasisPtr basis, const SiteSet& X) {
  const auto& lat = basis->lattice();
  std::uint64_t mask = 0;
  for (Site s : X.sites(lat)) mask |= 1ull << lat.index_of(s);
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(basis->dim());
  for (std::int64_t i = 0; i < basis->dim(); ++i) {
    int c = std::popcount(basis->state(i) & mask);
    if (c) trips.emplace_back(i, i, cplx(c, 0));
  }
  return ManyBodyOperator::from_triplets(std::move(basis), trips);
}

inline ManyBodyOperator site_number(BasisPtr basis, Site s) {
  SiteSet X(basis->lattice());
  X.add(basis->lattice(), s);
  return number_operator(std::move(basis), X);
}

// <theta, n> = sum_x theta(x) n_x (diagonal).
inline ManyBodyOperator potential_operator(BasisPtr basis, const SiteFunction& theta) {
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(basis->dim());
  for (std::int64_t i = 0; i < basis->dim(); ++i) {
    std::uint64_t p = basis->state(i);
    double v = 0.0;
    while (p) {
      v += theta.at_index(std::countr_zero(p));
      p &= p - 1;
    }
    trips.emplace_back(i, i, cplx(v, 0));
  }
  return ManyBodyOperator::from_triplets(std::move(basis), trips);
}

// U_theta = exp(i <theta, n>), a diagonal unitary.
inline ManyBodyOperator gauge_unitary(BasisPtr basis, const SiteFunction& theta) {
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(basis->dim());
  for (std::int64_t i = 0; i < basis->dim(); ++i) {
    std::uint64_t p = basis->state(i);
    double v = 0.0;
    while (p) {
      v += theta.at_index(std::countr_zero(p));
      p &= p - 1;
    }
    trips.emplace_back(i, i, std::exp(cplx(0, v)));
  }
  return ManyBodyOperator::from_triplets(std::move(basis), trips);
}

// coeff * prod_{s in sites} n_s (diagonal density monomial).
inline ManyBodyOperator density_monomial(BasisPtr basis, const std::vector<Site>& sites,
                                         double coeff) {
  const auto& lat = basis->lattice();
  std::uint64_t mask = 0;
  for (Site s : sites) mask |= 1ull << lat.index_of(s);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::int64_t i = 0; i < basis->dim(); ++i)
    if ((basis->state(i) & mask) == mask) trips.emplace_back(i, i, cplx(coeff, 0));
  return ManyBodyOperator::from_triplets(std::move(basis), trips);
}

}  // namespace hall
