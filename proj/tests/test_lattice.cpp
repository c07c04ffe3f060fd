#include <catch2/catch_amalgamated.hpp>

#include "hall/lattice.hpp"

using namespace hall;

TEST_CASE("torus has L^2 sites, each with four distinct neighbours") {
  TorusLattice lat(6);
  REQUIRE(lat.num_sites() == 36);
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    REQUIRE(lat.index_of(s) == i);
    std::vector<Site> nbrs;
    for (int axis : {1, 2})
      for (int step : {+1, -1}) nbrs.push_back(lat.neighbor(s, axis, step));
    for (std::size_t a = 0; a < nbrs.size(); ++a) {
      REQUIRE(lat.adjacent(s, nbrs[a]));
      for (std::size_t b = a + 1; b < nbrs.size(); ++b) REQUIRE(nbrs[a] != nbrs[b]);
    }
  }
}

TEST_CASE("coordinates live in {-L/2+1, ..., L/2}") {
  TorusLattice lat(4);
  for (int i = 0; i < lat.num_sites(); ++i) {
    Site s = lat.site_at(i);
    REQUIRE(s.x1 >= -1);
    REQUIRE(s.x1 <= 2);
    REQUIRE(s.x2 >= -1);
    REQUIRE(s.x2 <= 2);
  }
  REQUIRE(lat.wrap(3) == -1);   // L/2 + 1 wraps to -L/2 + 1
  REQUIRE(lat.wrap(-2) == 2);   // -L/2 wraps to L/2
}

TEST_CASE("distance is the minimal-image Euclidean metric") {
  TorusLattice lat(6);
  // brute-force oracle: minimize over all integer shifts by multiples of L
  auto brute = [&](Site a, Site b) {
    double best = 1e9;
    for (int k1 = -2; k1 <= 2; ++k1)
      for (int k2 = -2; k2 <= 2; ++k2) {
        double d1 = a.x1 - b.x1 + 6 * k1, d2 = a.x2 - b.x2 + 6 * k2;
        best = std::min(best, std::sqrt(d1 * d1 + d2 * d2));
      }
    return best;
  };
  for (int i = 0; i < lat.num_sites(); ++i)
    for (int j = 0; j < lat.num_sites(); ++j) {
      Site a = lat.site_at(i), b = lat.site_at(j);
      REQUIRE(lat.dist(a, b) == Catch::Approx(brute(a, b)).margin(1e-12));
      REQUIRE(lat.dist(a, b) == Catch::Approx(lat.dist(b, a)).margin(1e-15));
      REQUIRE(lat.dist(a, b) <= 6.0 / std::sqrt(2.0) + 1e-12);
    }
}

TEST_CASE("neighborhood of a point") {
  TorusLattice lat(6);
  SiteSet origin(lat);
  origin.add(lat, {0, 0});

  SECTION("radius zero is the point itself") {
    auto s = neighborhood(lat, origin, 0.0);
    REQUIRE(s.size() == 1);
    REQUIRE(s.contains(lat, {0, 0}));
  }
  SECTION("radius one adds the four nearest neighbours") {
    // oracle: scan all 36 sites by distance
    auto s = neighborhood(lat, origin, 1.0);
    int count = 0;
    for (int i = 0; i < lat.num_sites(); ++i)
      if (lat.dist(lat.site_at(i), {0, 0}) <= 1.0) ++count;
    REQUIRE(s.size() == count);
    REQUIRE(s.size() == 5);
    for (Site n : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}})
      REQUIRE(s.contains(lat, n));
  }
  SECTION("radius past the torus diameter captures everything") {
    auto s = neighborhood(lat, origin, 6.0 / std::sqrt(2.0));
    REQUIRE(s.size() == lat.num_sites());
  }
  SECTION("monotone in r and contains S") {
    SiteSet S(lat);
    S.add(lat, {1, -2});
    S.add(lat, {0, 2});
    int prev = 0;
    for (double r : {0.0, 1.0, 1.5, 2.0, 3.0}) {
      auto s = neighborhood(lat, S, r);
      REQUIRE(s.size() >= prev);
      REQUIRE(s.contains(lat, {1, -2}));
      REQUIRE(s.contains(lat, {0, 2}));
      prev = s.size();
    }
  }
  SECTION("empty set stays empty") {
    SiteSet empty(lat);
    REQUIRE(neighborhood(lat, empty, 3.0).empty());
  }
}

TEST_CASE("degenerate sizes are rejected") {
  REQUIRE_THROWS_AS(TorusLattice(0), ConfigError);
  REQUIRE_THROWS_AS(TorusLattice(1), ConfigError);
  REQUIRE_THROWS_AS(TorusLattice(-4), ConfigError);
}

TEST_CASE("odd sizes use the symmetric coordinate window") {
  TorusLattice lat(3);
  REQUIRE(lat.num_sites() == 9);
  for (int i = 0; i < 9; ++i) {
    Site s = lat.site_at(i);
    REQUIRE(lat.index_of(s) == i);
    REQUIRE(s.x1 >= -1);
    REQUIRE(s.x1 <= 1);
  }
  REQUIRE(lat.wrap(2) == -1);
  REQUIRE(lat.dist({-1, 0}, {1, 0}) == Catch::Approx(1.0).margin(1e-13));
}
