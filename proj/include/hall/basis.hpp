#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <memory>
#include <sstream>
#include <vector>

#include "hall/lattice.hpp"

namespace hall {

namespace detail {

inline const std::array<std::array<std::uint64_t, 65>, 65>& binomial_table() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, 65>, 65> c{};
    for (int n = 0; n <= 64; ++n) {
      c[n][0] = 1;
      for (int k = 1; k <= n; ++k)
        c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
    }
    return c;
  }();
  return table;
}

}  // namespace detail

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n || n < 0 || n > 64) return 0;
  return detail::binomial_table()[n][k];
}

// Occupation basis of the N-particle sector on a torus with L^2 <= 64 sites.
// States are bit patterns ordered by increasing numeric value; bit i of a
// pattern is the occupation of site index i (row-major site ordering). A basis
// state is Prod_{i ascending} c†_i |vac>, which fixes all fermionic signs.
class SectorBasis {
 public:
  SectorBasis(const TorusLattice& lattice, int N, std::uint64_t dimension_cap = 5'000'000)
      : lattice_(lattice), N_(N) {
    const int M = lattice_.num_sites();
    if (M > 64) throw CapacityError("SectorBasis: more than 64 sites");
    if (N < 0 || N > M) throw ConfigError("SectorBasis: N outside [0, L^2]");
    const std::uint64_t dim = binomial(M, N);
    if (dim > dimension_cap) {
      std::ostringstream msg;
      msg << "SectorBasis: binomial(" << M << "," << N << ") = " << dim
          << " exceeds the dimension cap " << dimension_cap;
      throw CapacityError(msg.str());
    }
    states_.reserve(dim);
    if (N == 0) {
      states_.push_back(0);
    } else {
      std::uint64_t v = (N == 64) ? ~0ull : ((1ull << N) - 1);
      const std::uint64_t limit = (M == 64) ? ~0ull : (1ull << M);
      while (true) {
        states_.push_back(v);
        if (states_.size() == dim) break;
        // Gosper's hack: next pattern with the same popcount.
        std::uint64_t c = v & (~v + 1), r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
        if (M < 64 && v >= limit) break;
      }
    }
  }

  const TorusLattice& lattice() const { return lattice_; }
  int particles() const { return N_; }
  int num_modes() const { return lattice_.num_sites(); }
  std::int64_t dim() const { return static_cast<std::int64_t>(states_.size()); }
  std::uint64_t state(std::int64_t i) const { return states_[i]; }

  // Position of a pattern via the combinatorial number system (colex rank).
  std::int64_t index_of(std::uint64_t pattern) const {
    std::int64_t rank = 0;
    int i = 1;
    std::uint64_t p = pattern;
    while (p) {
      int b = std::countr_zero(p);
      rank += static_cast<std::int64_t>(binomial(b, i));
      p &= p - 1;
      ++i;
    }
    return rank;
  }

  bool same_sector(const SectorBasis& other) const {
    return lattice_.L() == other.lattice_.L() && N_ == other.N_;
  }

  // Sign and target of c†_x c_y applied to `pattern`; returns false if it
  // annihilates. For x == y this is the number operator n_y.
  bool apply_hop(std::uint64_t pattern, int x, int y, std::uint64_t* out, int* sign) const {
    const std::uint64_t bx = 1ull << x, by = 1ull << y;
    if (!(pattern & by)) return false;
    if (x == y) {
      *out = pattern;
      *sign = 1;
      return true;
    }
    if (pattern & bx) return false;
    *out = (pattern ^ by) | bx;
    int lo = std::min(x, y), hi = std::max(x, y);
    std::uint64_t between = hi - lo > 1 ? ((1ull << hi) - 1) & ~((1ull << (lo + 1)) - 1) : 0ull;
    *sign = (std::popcount(pattern & between) & 1) ? -1 : 1;
    return true;
  }

 private:
  TorusLattice lattice_;
  int N_;
  std::vector<std::uint64_t> states_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

inline BasisPtr build_sector_basis(const TorusLattice& lattice, int N,
                                   std::uint64_t dimension_cap = 5'000'000) {
  return std::make_shared<SectorBasis>(lattice, N, dimension_cap);
}

}  // namespace hall
