#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hall/errors.hpp"

namespace hall {

// Lattice site of the discrete torus, coordinates represented in {-L/2+1, ..., L/2}.
struct Site {
  int x1 = 0;
  int x2 = 0;

  friend bool operator==(Site a, Site b) { return a.x1 == b.x1 && a.x2 == b.x2; }
  friend bool operator!=(Site a, Site b) { return !(a == b); }
};

// Oriented nearest-neighbour edge (source -> target).
struct OrientedEdge {
  Site source;
  Site target;
};

inline OrientedEdge reversed(const OrientedEdge& e) { return {e.target, e.source}; }

// Square torus Z_L x Z_L. Coordinates are represented in {-L/2+1, ..., L/2}
// (for odd L the symmetric window {-(L-1)/2, ..., (L-1)/2}); distances are
// Euclidean on the continuous torus [-L/2, L/2]^2 with opposite edges
// identified.
class TorusLattice {
 public:
  explicit TorusLattice(int L) : L_(L) {
    if (L < 2) throw ConfigError("TorusLattice: L must be at least 2");
  }

  int L() const { return L_; }
  int num_sites() const { return L_ * L_; }
  int coord_min() const { return -((L_ - 1) / 2); }

  // Representative of c mod L in the coordinate window.
  int wrap(int c) const {
    int m = ((c % L_) + L_) % L_;  // in {0..L-1}
    return m > L_ / 2 ? m - L_ : m;
  }

  Site wrap(Site s) const { return {wrap(s.x1), wrap(s.x2)}; }

  bool contains(Site s) const {
    return s.x1 >= coord_min() && s.x1 < coord_min() + L_ && s.x2 >= coord_min() &&
           s.x2 < coord_min() + L_;
  }

  // Row-major site ordering; this ordering also fixes the fermionic sign convention.
  int index_of(Site s) const {
    s = wrap(s);
    return (s.x1 - coord_min()) * L_ + (s.x2 - coord_min());
  }

  Site site_at(int idx) const {
    return {idx / L_ + coord_min(), idx % L_ + coord_min()};
  }

  std::vector<Site> all_sites() const {
    std::vector<Site> out;
    out.reserve(num_sites());
    for (int i = 0; i < num_sites(); ++i) out.push_back(site_at(i));
    return out;
  }

  // Neighbour in direction axis (1 or 2), step +1 or -1, with wrap-around.
  Site neighbor(Site s, int axis, int step) const {
    if (axis == 1) return wrap(Site{s.x1 + step, s.x2});
    if (axis == 2) return wrap(Site{s.x1, s.x2 + step});
    throw ConfigError("neighbor: axis must be 1 or 2");
  }

  bool adjacent(Site a, Site b) const {
    int d1 = std::abs(wrap(a.x1 - b.x1));
    int d2 = std::abs(wrap(a.x2 - b.x2));
    return (d1 == 1 && d2 == 0) || (d1 == 0 && d2 == 1);
  }

  // Minimal-image coordinate difference, in [-L/2, L/2].
  double delta(int a, int b) const {
    int d = ((a - b) % L_ + L_) % L_;
    if (d > L_ / 2) d -= L_;
    return static_cast<double>(d);
  }

  double dist(Site a, Site b) const {
    double d1 = delta(a.x1, b.x1);
    double d2 = delta(a.x2, b.x2);
    return std::sqrt(d1 * d1 + d2 * d2);
  }

 private:
  int L_;
};

// Subset of lattice sites, held as a membership mask.
class SiteSet {
 public:
  SiteSet() = default;
  explicit SiteSet(const TorusLattice& lat) : L_(lat.L()), mask_(lat.num_sites(), 0) {}

  static SiteSet full(const TorusLattice& lat) {
    SiteSet s(lat);
    std::fill(s.mask_.begin(), s.mask_.end(), 1);
    s.count_ = lat.num_sites();
    return s;
  }

  int L() const { return L_; }
  int size() const { return count_; }
  bool empty() const { return count_ == 0; }

  void add(const TorusLattice& lat, Site s) {
    auto& m = mask_[lat.index_of(s)];
    if (!m) { m = 1; ++count_; }
  }

  void remove(const TorusLattice& lat, Site s) {
    auto& m = mask_[lat.index_of(s)];
    if (m) { m = 0; --count_; }
  }

  bool contains(const TorusLattice& lat, Site s) const { return mask_[lat.index_of(s)] != 0; }
  bool contains_index(int idx) const { return mask_[idx] != 0; }

  std::vector<Site> sites(const TorusLattice& lat) const {
    std::vector<Site> out;
    out.reserve(count_);
    for (int i = 0; i < static_cast<int>(mask_.size()); ++i)
      if (mask_[i]) out.push_back(lat.site_at(i));
    return out;
  }

  SiteSet complement(const TorusLattice& lat) const {
    SiteSet out(lat);
    for (int i = 0; i < static_cast<int>(mask_.size()); ++i)
      if (!mask_[i]) { out.mask_[i] = 1; ++out.count_; }
    return out;
  }

 private:
  int L_ = 0;
  std::vector<std::uint8_t> mask_;
  int count_ = 0;
};

// S^r = {x : dist(x, S) <= r}.
inline SiteSet neighborhood(const TorusLattice& lat, const SiteSet& S, double r) {
  SiteSet out(lat);
  if (S.empty()) return out;
  const auto members = S.sites(lat);
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site x = lat.site_at(i);
    for (Site s : members) {
      if (lat.dist(x, s) <= r + 1e-12) {
        out.add(lat, x);
        break;
      }
    }
  }
  return out;
}

inline SiteSet ball(const TorusLattice& lat, Site center, double r) {
  SiteSet c(lat);
  c.add(lat, center);
  return neighborhood(lat, c, r);
}

}  // namespace hall
