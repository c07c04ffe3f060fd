#pragma once

#include <cmath>
#include <cstdlib>
#include <deque>
#include <optional>
#include <sstream>
#include <vector>

#include "hall/lattice.hpp"

namespace hall {

// Real scalar function on lattice sites (electrostatic potentials, gauge angles).
class SiteFunction {
 public:
  SiteFunction() = default;
  explicit SiteFunction(const TorusLattice& lat, double value = 0.0)
      : L_(lat.L()), values_(lat.num_sites(), value) {}

  int L() const { return L_; }
  double operator()(const TorusLattice& lat, Site s) const { return values_[lat.index_of(s)]; }
  double& at(const TorusLattice& lat, Site s) { return values_[lat.index_of(s)]; }
  double at_index(int i) const { return values_[i]; }
  double& at_index(int i) { return values_[i]; }
  int size() const { return static_cast<int>(values_.size()); }

  SiteFunction& operator+=(const SiteFunction& o) {
    for (int i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  friend SiteFunction operator+(SiteFunction a, const SiteFunction& b) { return a += b; }
  SiteFunction& operator*=(double c) {
    for (auto& v : values_) v *= c;
    return *this;
  }
  friend SiteFunction operator*(double c, SiteFunction f) { return f *= c; }

 private:
  int L_ = 0;
  std::vector<double> values_;
};

// Discrete one-form: antisymmetric real function on oriented edges. Values are
// stored on the two positive-direction edges per site; the accessor applies the
// sign flip for reversed orientation.
class OneForm {
 public:
  OneForm() = default;
  explicit OneForm(const TorusLattice& lat) : L_(lat.L()), values_(2 * lat.num_sites(), 0.0) {}

  int L() const { return L_; }

  double operator()(const TorusLattice& lat, const OrientedEdge& e) const {
    auto [slot, sign] = locate(lat, e);
    return sign * values_[slot];
  }

  void set(const TorusLattice& lat, const OrientedEdge& e, double v) {
    auto [slot, sign] = locate(lat, e);
    values_[slot] = sign * v;
  }

  void add(const TorusLattice& lat, const OrientedEdge& e, double v) {
    auto [slot, sign] = locate(lat, e);
    values_[slot] += sign * v;
  }

  // sup-norm over edges
  double norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  OneForm& operator+=(const OneForm& o) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  friend OneForm operator+(OneForm a, const OneForm& b) { return a += b; }
  OneForm& operator*=(double c) {
    for (auto& v : values_) v *= c;
    return *this;
  }
  friend OneForm operator*(double c, OneForm a) { return a *= c; }

 private:
  // Slot layout: 2*site_index + (axis-1), holding the value on (s, s+e_axis).
  std::pair<int, double> locate(const TorusLattice& lat, const OrientedEdge& e) const {
    Site s = lat.wrap(e.source), t = lat.wrap(e.target);
    int d1 = lat.wrap(t.x1 - s.x1), d2 = lat.wrap(t.x2 - s.x2);
    if (d1 == 1 && d2 == 0) return {2 * lat.index_of(s) + 0, 1.0};
    if (d1 == -1 && d2 == 0) return {2 * lat.index_of(t) + 0, -1.0};
    if (d1 == 0 && d2 == 1) return {2 * lat.index_of(s) + 1, 1.0};
    if (d1 == 0 && d2 == -1) return {2 * lat.index_of(t) + 1, -1.0};
    throw MalformedPath("OneForm: edge endpoints are not adjacent");
  }

  int L_ = 0;
  std::vector<double> values_;
};

// d(theta)((x,y)) = theta(y) - theta(x).
inline OneForm exterior_derivative(const TorusLattice& lat, const SiteFunction& theta) {
  OneForm d(lat);
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    for (int axis : {1, 2}) {
      Site t = lat.neighbor(s, axis, +1);
      d.set(lat, {s, t}, theta(lat, t) - theta(lat, s));
    }
  }
  return d;
}

inline bool is_path(const std::vector<OrientedEdge>& gamma) {
  for (std::size_t i = 0; i + 1 < gamma.size(); ++i)
    if (gamma[i].target != gamma[i + 1].source) return false;
  return true;
}

inline bool is_loop(const std::vector<OrientedEdge>& gamma) {
  return is_path(gamma) && !gamma.empty() && gamma.back().target == gamma.front().source;
}

// Sum of A over the edges of a chained path.
inline double integrate(const TorusLattice& lat, const OneForm& A,
                        const std::vector<OrientedEdge>& gamma) {
  if (!is_path(gamma)) throw MalformedPath("integrate: edges do not chain");
  double s = 0.0;
  for (const auto& e : gamma) s += A(lat, e);
  return s;
}

namespace detail {

// Walks a BFS forest of the edge-subgraph on Sigma, accumulating a candidate
// potential. Returns false (with an optional witness cycle) if some subgraph
// edge disagrees with the accumulated potential, i.e. a cycle has nonzero
// circulation.
inline bool potential_scan(const TorusLattice& lat, const OneForm& A, const SiteSet& sigma,
                           SiteFunction* theta_out, std::vector<OrientedEdge>* witness,
                           double tol) {
  const int n = lat.num_sites();
  std::vector<char> visited(n, 0);
  std::vector<int> parent(n, -1);
  std::vector<double> theta(n, 0.0);

  auto in_sigma = [&](Site s) { return sigma.contains(lat, s); };

  for (int root = 0; root < n; ++root) {
    if (!sigma.contains_index(root) || visited[root]) continue;
    visited[root] = 1;
    theta[root] = 0.0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      int ui = queue.front();
      queue.pop_front();
      Site u = lat.site_at(ui);
      for (int axis : {1, 2}) {
        for (int step : {+1, -1}) {
          Site v = lat.neighbor(u, axis, step);
          if (!in_sigma(v)) continue;
          int vi = lat.index_of(v);
          double along = A(lat, {u, v});
          if (!visited[vi]) {
            visited[vi] = 1;
            parent[vi] = ui;
            theta[vi] = theta[ui] + along;
            queue.push_back(vi);
          } else if (std::abs(theta[ui] + along - theta[vi]) > tol) {
            if (witness) {
              // Fundamental cycle: tree path root->u, edge (u,v), tree path v->root.
              auto tree_path_to_root = [&](int a) {
                std::vector<int> p{a};
                while (parent[p.back()] != -1) p.push_back(parent[p.back()]);
                return p;
              };
              auto up = tree_path_to_root(ui);   // u ... root
              auto vp = tree_path_to_root(vi);   // v ... root
              witness->clear();
              for (auto it = up.rbegin(); it + 1 != up.rend(); ++it)
                witness->push_back({lat.site_at(*it), lat.site_at(*(it + 1))});
              witness->push_back({u, v});
              for (std::size_t k = 0; k + 1 < vp.size(); ++k)
                witness->push_back({lat.site_at(vp[k]), lat.site_at(vp[k + 1])});
            }
            return false;
          }
        }
      }
    }
  }
  if (theta_out) {
    *theta_out = SiteFunction(lat);
    for (int i = 0; i < n; ++i)
      if (sigma.contains_index(i)) theta_out->at_index(i) = theta[i];
  }
  return true;
}

}  // namespace detail

// True iff every cycle of the edge-subgraph on Sigma has zero circulation,
// including the non-contractible ones when Sigma wraps the torus.
inline bool is_exact(const TorusLattice& lat, const OneForm& A, const SiteSet& sigma,
                     double tol = 1e-10) {
  return detail::potential_scan(lat, A, sigma, nullptr, nullptr, tol);
}

inline bool is_exact(const TorusLattice& lat, const OneForm& A, double tol = 1e-10) {
  return is_exact(lat, A, SiteSet::full(lat), tol);
}

// Reconstructs theta with A|_{Sigma^e} = d(theta), anchored to 0 at one site per
// connected component. Throws InexactFormError carrying a witness cycle otherwise.
inline SiteFunction find_potential(const TorusLattice& lat, const OneForm& A,
                                   const SiteSet& sigma, double tol = 1e-10) {
  SiteFunction theta;
  std::vector<OrientedEdge> witness;
  if (!detail::potential_scan(lat, A, sigma, &theta, &witness, tol)) {
    std::ostringstream msg;
    msg << "find_potential: one-form is not exact on the region; witness cycle:";
    for (const auto& e : witness)
      msg << " (" << e.source.x1 << "," << e.source.x2 << ")->(" << e.target.x1 << ","
          << e.target.x2 << ")";
    throw InexactFormError(msg.str());
  }
  return theta;
}

inline SiteFunction find_potential(const TorusLattice& lat, const OneForm& A,
                                   double tol = 1e-10) {
  return find_potential(lat, A, SiteSet::full(lat), tol);
}

// Zero circulation around every elementary plaquette (contractible loops);
// winding around the torus handles is still allowed.
inline bool is_vortex_free(const TorusLattice& lat, const OneForm& A, double tol = 1e-10) {
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site a = lat.site_at(i);
    Site b = lat.neighbor(a, 1, +1), c = lat.neighbor(b, 2, +1), d = lat.neighbor(a, 2, +1);
    double circ = A(lat, {a, b}) + A(lat, {b, c}) + A(lat, {c, d}) + A(lat, {d, a});
    if (std::abs(circ) > tol) return false;
  }
  return true;
}

// xi_d: value 1/L on edges pointing in the positive d-direction, zero on the
// perpendicular ones. Integrates to delta_{dj} around the winding loop gamma_j.
inline OneForm standard_flux_form(const TorusLattice& lat, int direction) {
  if (direction != 1 && direction != 2) throw ConfigError("standard_flux_form: direction must be 1 or 2");
  OneForm xi(lat);
  const double v = 1.0 / lat.L();
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    xi.set(lat, {s, lat.neighbor(s, direction, +1)}, v);
  }
  return xi;
}

// The loop winding once around the torus in the given direction (increasing
// coordinate), passing through the other coordinate = 0 line.
inline std::vector<OrientedEdge> winding_loop(const TorusLattice& lat, int direction) {
  std::vector<OrientedEdge> loop;
  Site s = direction == 1 ? Site{-lat.L() / 2 + 1, 0} : Site{0, -lat.L() / 2 + 1};
  for (int k = 0; k < lat.L(); ++k) {
    Site t = lat.neighbor(s, direction, +1);
    loop.push_back({s, t});
    s = t;
  }
  return loop;
}

enum class StripVariant { Bulk, FlatFlanks, TwoZone };

struct StripPotential {
  SiteFunction v;
  double delta_v = 0.0;  // v(l, 0) - v(-l, 0)
  double sup_dv = 0.0;   // sup-norm of dv, for the boundedness diagnostic
};

// Electrostatic potential with dv = E dx1 on the strip {|x1| <= l}. FlatFlanks
// keeps v constant on the bands just outside the strip (clipped to the columns
// actually available); the remaining drop back to -E*l happens by linear descent
// over the free columns (Bulk, FlatFlanks) or concentrated at the column arc
// boundary (TwoZone). v depends on x1 only, so all vertical edges carry dv = 0.
inline StripPotential build_strip_potential(const TorusLattice& lat, double E, int ell, int r,
                                            StripVariant variant) {
  const int L = lat.L();
  if (ell < 1 || 2 * ell + 1 > L - 1)
    throw ConfigError("build_strip_potential: strip {|x1|<=l} must leave at least one free column");
  if (r < 0) throw ConfigError("build_strip_potential: r must be nonnegative");

  // Column values, keyed by the representative coordinate.
  std::vector<double> col(L, 0.0);
  auto cset = [&](int x1, double v) { col[(x1 + L) % L] = v; };
  auto cget = [&](int x1) { return col[(x1 + L) % L]; };

  for (int x1 = -ell; x1 <= ell; ++x1) cset(x1, E * x1);

  // Arc of columns outside the strip, walked in increasing coordinate from
  // ell+1 around to -ell-1.
  const int arc_len = L - (2 * ell + 1);
  int flank = 0;
  if (variant != StripVariant::Bulk) flank = std::min(2 * r, (arc_len - 1) / 2);
  std::vector<int> arc;
  for (int k = 1; k <= arc_len; ++k) arc.push_back(ell + k);  // wrapped by cset/cget

  for (int k = 0; k < flank; ++k) {
    cset(arc[k], E * ell);                    // right flank, constant
    cset(arc[arc_len - 1 - k], -E * ell);     // left flank, constant
  }
  const int free_begin = flank, free_end = arc_len - flank;  // [free_begin, free_end)
  const int n_free = free_end - free_begin;
  if (variant == StripVariant::TwoZone) {
    // Entire drop across one column boundary: right half of the free zone stays
    // at +E*l, left half at -E*l.
    for (int k = free_begin; k < free_end; ++k)
      cset(arc[k], k - free_begin < n_free / 2 ? E * ell : -E * ell);
    if (n_free % 2 == 1 && n_free > 0) cset(arc[free_begin + n_free / 2], 0.0);
  } else {
    // Linear descent from +E*l to -E*l across the free columns.
    for (int k = free_begin; k < free_end; ++k) {
      double frac = static_cast<double>(k - free_begin + 1) / (n_free + 1);
      cset(arc[k], E * ell * (1.0 - 2.0 * frac));
    }
  }

  StripPotential out;
  out.v = SiteFunction(lat);
  for (int i = 0; i < lat.num_sites(); ++i) out.v.at_index(i) = cget(lat.site_at(i).x1);
  out.delta_v = cget(ell) - cget(-ell);
  OneForm dv = exterior_derivative(lat, out.v);
  out.sup_dv = dv.norm();
  return out;
}

}  // namespace hall
