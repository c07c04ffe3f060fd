#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "hall/one_form.hpp"

namespace hall {

// Dual-lattice vertex (a, b) sits at (a + 1/2, b + 1/2) on the continuous torus.
// An oriented dual edge knows the lattice sites it passes: `left`/`right` are
// taken relative to the walking direction in the standard orientation (x1 to
// the right, x2 up).
struct DualEdge {
  Site from;   // integer dual coordinates
  Site to;
  Site left;   // lattice site just left of the edge
  Site right;  // lattice site just right of the edge
};

inline DualEdge make_dual_edge(const TorusLattice& lat, Site from, int axis, int step) {
  DualEdge e;
  e.from = lat.wrap(from);
  e.to = lat.neighbor(e.from, axis, step);
  int a = e.from.x1, b = e.from.x2;
  if (axis == 1 && step == +1) {
    e.left = {a + 1, b + 1};
    e.right = {a + 1, b};
  } else if (axis == 1 && step == -1) {
    e.left = {a, b};
    e.right = {a, b + 1};
  } else if (axis == 2 && step == +1) {
    e.left = {a, b + 1};
    e.right = {a + 1, b + 1};
  } else if (axis == 2 && step == -1) {
    e.left = {a + 1, b};
    e.right = {a, b};
  } else {
    throw ConfigError("make_dual_edge: axis must be 1 or 2, step +-1");
  }
  e.left = lat.wrap(e.left);
  e.right = lat.wrap(e.right);
  return e;
}

inline DualEdge reversed(const TorusLattice& lat, const DualEdge& e) {
  Site d{e.to.x1 - e.from.x1, e.to.x2 - e.from.x2};
  d = {lat.wrap(d.x1), lat.wrap(d.x2)};
  int axis = d.x1 != 0 ? 1 : 2;
  int step = (axis == 1 ? d.x1 : d.x2) > 0 ? -1 : +1;
  return make_dual_edge(lat, e.to, axis, step);
}

// Oriented path in the dual lattice.
struct DualPath {
  std::vector<DualEdge> edges;

  bool chained() const {
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
      if (edges[i].to != edges[i + 1].from) return false;
    return true;
  }
  bool closed() const {
    return chained() && !edges.empty() && edges.back().to == edges.front().from;
  }
  int length() const { return static_cast<int>(edges.size()); }
};

inline DualPath reversed(const TorusLattice& lat, const DualPath& p) {
  DualPath out;
  out.edges.reserve(p.edges.size());
  for (auto it = p.edges.rbegin(); it != p.edges.rend(); ++it)
    out.edges.push_back(reversed(lat, *it));
  return out;
}

// Requires chaining and forbids immediate backtracking; this is what a subpath
// of some region boundary always satisfies.
inline void validate_dual_path(const TorusLattice& lat, const DualPath& p) {
  if (p.edges.empty()) throw MalformedPath("dual path: empty");
  if (!p.chained()) throw MalformedPath("dual path: edges do not chain");
  for (std::size_t i = 0; i + 1 < p.edges.size(); ++i)
    if (p.edges[i + 1].to == p.edges[i].from && p.edges[i + 1].from == p.edges[i].to)
      throw MalformedPath("dual path: immediate reversal");
  (void)lat;
}

namespace detail {

inline int dual_dir_code(const TorusLattice& lat, const DualEdge& e) {
  int d1 = lat.wrap(e.to.x1 - e.from.x1), d2 = lat.wrap(e.to.x2 - e.from.x2);
  if (d1 == 1) return 0;   // +x1
  if (d2 == 1) return 1;   // +x2
  if (d1 == -1) return 2;  // -x1
  return 3;                // -x2
}

}  // namespace detail

// Oriented boundary of X in the dual lattice: one closed loop per boundary
// component, each dual edge having its right site in X and its left site
// outside. Loops are chained with a right-turn-first rule, which keeps them
// from crossing themselves at pinch points.
inline std::vector<DualPath> boundary_path(const TorusLattice& lat, const SiteSet& X) {
  std::vector<DualPath> loops;
  if (X.empty() || X.size() == lat.num_sites()) return loops;

  // Cut edges, one per ordered pair (s in X) -> (t outside).
  std::vector<DualEdge> cuts;
  for (Site s : X.sites(lat)) {
    for (int axis : {1, 2}) {
      for (int step : {+1, -1}) {
        Site t = lat.neighbor(s, axis, step);
        if (X.contains(lat, t)) continue;
        // Dual edge crossing (s,t) with s on its right: direction is the
        // 90-degree clockwise rotation of t - s.
        int u1 = lat.wrap(t.x1 - s.x1), u2 = lat.wrap(t.x2 - s.x2);
        int d1 = u2, d2 = -u1;
        Site from;
        if (d1 == 0 && d2 == -1) from = {s.x1, s.x2};            // u = +x1
        else if (d1 == 0 && d2 == +1) from = {s.x1 - 1, s.x2 - 1};  // u = -x1
        else if (d1 == +1 && d2 == 0) from = {s.x1 - 1, s.x2};      // u = +x2
        else from = {s.x1, s.x2 - 1};                               // u = -x2
        int axis_d = d1 != 0 ? 1 : 2;
        int step_d = (axis_d == 1 ? d1 : d2);
        cuts.push_back(make_dual_edge(lat, from, axis_d, step_d));
      }
    }
  }

  auto key = [&](Site dual) { return lat.index_of(dual); };
  std::map<int, std::vector<int>> outgoing;  // dual vertex -> indices into cuts
  for (int i = 0; i < static_cast<int>(cuts.size()); ++i)
    outgoing[key(cuts[i].from)].push_back(i);

  std::vector<char> used(cuts.size(), 0);
  // Deterministic start: scan cuts in construction order.
  for (int start = 0; start < static_cast<int>(cuts.size()); ++start) {
    if (used[start]) continue;
    DualPath loop;
    int cur = start;
    while (true) {
      used[cur] = 1;
      loop.edges.push_back(cuts[cur]);
      if (cuts[cur].to == cuts[start].from) break;
      int dir = detail::dual_dir_code(lat, cuts[cur]);
      const auto& cands = outgoing[key(cuts[cur].to)];
      int next = -1;
      // Preference: right turn, straight, left turn.
      for (int turn : {3, 0, 1}) {
        int want = (dir + turn) % 4;
        for (int c : cands)
          if (!used[c] && detail::dual_dir_code(lat, cuts[c]) == want) { next = c; break; }
        if (next != -1) break;
      }
      if (next == -1) throw MalformedPath("boundary_path: walk failed to close");
      cur = next;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

// Lattice edge running parallel to a dual edge, on its right-hand side.
inline OrientedEdge parallel_lift(const TorusLattice& lat, const DualEdge& e) {
  int d1 = lat.wrap(e.to.x1 - e.from.x1), d2 = lat.wrap(e.to.x2 - e.from.x2);
  Site v = e.right;
  Site u = lat.wrap(Site{v.x1 - d1, v.x2 - d2});
  return {u, v};
}

// EMF-style pairing of a one-form with a dual path: integrate A over the
// right-hand parallel lift, edge by edge. (The lift of a corner path need not
// chain; the pairing is still a plain edge sum.)
inline double integrate_along_dual(const TorusLattice& lat, const OneForm& A,
                                   const DualPath& gamma) {
  double s = 0.0;
  for (const auto& e : gamma.edges) s += A(lat, parallel_lift(lat, e));
  return s;
}

// Continuous-torus position of a dual vertex.
inline std::pair<double, double> dual_position(Site dual) {
  return {dual.x1 + 0.5, dual.x2 + 0.5};
}

// True if A vanishes on every edge touching a site within distance r of the
// given dual vertex.
inline bool vanishes_near_dual_vertex(const TorusLattice& lat, const OneForm& A, Site dual,
                                      double r, double tol = 1e-14) {
  auto [px, py] = dual_position(dual);
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    double dx = std::remainder(s.x1 - px, static_cast<double>(lat.L()));
    double dy = std::remainder(s.x2 - py, static_cast<double>(lat.L()));
    if (std::sqrt(dx * dx + dy * dy) > r) continue;
    for (int axis : {1, 2}) {
      for (int step : {+1, -1}) {
        if (std::abs(A(lat, {s, lat.neighbor(s, axis, step)})) > tol) return false;
      }
    }
  }
  return true;
}

}  // namespace hall
