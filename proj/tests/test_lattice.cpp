#include "doctest.h"

#include <cmath>
#include <vector>

#include "asep/error.hpp"
#include "asep/lattice.hpp"

using namespace asep;

TEST_CASE("jump law construction") {
  SUBCASE("tasep 1d") {
    auto law = JumpLaw::tasep_1d();
    CHECK(law.dimension() == 1);
    CHECK(law.mean()[0] == 1.0);
    CHECK(law.mean()[1] == 0.0);
    CHECK(law.range() == 2);
  }
  SUBCASE("tasep 2d has drift e1") {
    auto law = JumpLaw::tasep_2d();
    CHECK(law.mean()[0] == 1.0);
    CHECK(law.mean()[1] == 0.0);
    CHECK(law.total_rate() == 2.0);
    CHECK(law.second_moment(1, 1) == 1.0);
  }
  SUBCASE("symmetric law rejected when asymmetry is required") {
    std::vector<JumpEntry> e{{{1, 0}, 0.5}, {{-1, 0}, 0.5}};
    CHECK_THROWS_AS(JumpLaw::build(1, e), Error);
    CHECK_NOTHROW(JumpLaw::build(1, e, false));
  }
  SUBCASE("invalid entries") {
    std::vector<JumpEntry> neg{{{1, 0}, -1.0}};
    std::vector<JumpEntry> zero{{{0, 0}, 1.0}, {{1, 0}, 1.0}};
    std::vector<JumpEntry> empty;
    std::vector<JumpEntry> offaxis{{{1, 1}, 1.0}};
    CHECK_THROWS_AS(JumpLaw::build(1, neg), Error);
    CHECK_THROWS_AS(JumpLaw::build(1, zero), Error);
    CHECK_THROWS_AS(JumpLaw::build(1, empty), Error);
    CHECK_THROWS_AS(JumpLaw::build(1, offaxis), Error);
  }
  SUBCASE("duplicates merge") {
    std::vector<JumpEntry> e{{{1, 0}, 0.25}, {{1, 0}, 0.75}};
    auto law = JumpLaw::build(1, e);
    CHECK(law.entries().size() == 1);
    CHECK(law.entries()[0].rate == 1.0);
  }
}

TEST_CASE("torus geometry") {
  TorusGeometry g(2, 6, 8);
  CHECK(g.sites() == 48);
  for (int s = 0; s < g.sites(); ++s) CHECK(g.index(g.coords(s)) == s);
  CHECK(g.shift(g.index({5, 7}), {1, 1}) == g.index({0, 0}));
  auto m = g.minimal_image({5, 4});
  CHECK(m[0] == -1);
  CHECK(m[1] == 4);
  CHECK(g.admits(JumpLaw::tasep_2d()));
  CHECK(TorusGeometry(1, 6).admits(JumpLaw::tasep_1d()));
  CHECK_FALSE(TorusGeometry(1, 5).admits(JumpLaw::tasep_1d()));
  CHECK_FALSE(TorusGeometry(1, 5).admits(JumpLaw::tasep_2d()));
  CHECK_THROWS_AS(TorusGeometry(1, 1), Error);
  CHECK_THROWS_AS(TorusGeometry(3, 4, 4), Error);
}

TEST_CASE("bernoulli sampling") {
  TorusGeometry g(1, 4096);
  RngStream r1(42, 0), r2(42, 0);
  auto a = sample_bernoulli(g, 0.5, r1);
  auto b = sample_bernoulli(g, 0.5, r2);
  CHECK(a == b);
  CHECK(a.particles() == a.popcount());
  // binomial band: 4096 * 0.5 +- 3 * 32
  CHECK(std::abs(a.particles() - 2048) <= 96);
  CHECK_THROWS_AS(sample_bernoulli(g, 0.0, r1), Error);
  CHECK_THROWS_AS(sample_bernoulli(g, 1.0, r1), Error);
}

TEST_CASE("exchange") {
  Configuration c(10);
  c.set(2, true);
  auto d = apply_exchange(c, 2, 7);
  CHECK_FALSE(d.occupied(2));
  CHECK(d.occupied(7));
  CHECK(apply_exchange(d, 2, 7) == c);
  c.set(7, true);
  CHECK(apply_exchange(c, 2, 7) == c);
  CHECK_THROWS_AS(apply_exchange(c, 3, 3), Error);
}

TEST_CASE("exchange conserves particles over many random moves") {
  TorusGeometry g(1, 257);
  RngStream rng(5, 1);
  auto c = sample_bernoulli(g, 0.3, rng);
  const int k = c.particles();
  for (int i = 0; i < 1000000; ++i) {
    int x = static_cast<int>(rng.below(257));
    int y = static_cast<int>(rng.below(257));
    if (x == y) continue;
    c.exchange(x, y);
  }
  CHECK(c.particles() == k);
  CHECK(c.popcount() == k);
}

TEST_CASE("instantaneous currents") {
  TorusGeometry g1(1, 8);
  Configuration c(8);
  c.set(3, true);
  CHECK(instantaneous_current(g1, c, 3, 0) == 1.0);
  c.set(4, true);
  CHECK(instantaneous_current(g1, c, 3, 0) == 0.0);
  CHECK(renormalized_current(g1, c, 3, 0, 0.5) == 0.25);

  TorusGeometry g2(2, 6, 6);
  Configuration e(36);
  e.set(g2.index({1, 2}), true);
  CHECK(instantaneous_current(g2, e, g2.index({1, 1}), 1) == 0.5);
  CHECK(instantaneous_current(g2, e, g2.index({1, 2}), 1) == -0.5);
  CHECK(renormalized_current(g2, e, g2.index({1, 1}), 1, 0.5) == 0.0);
}

TEST_CASE("renormalized current has zero mean under the product measure") {
  TorusGeometry g(1, 4096);
  RngStream rng(9, 0);
  double sum = 0.0, sumsq = 0.0;
  int n = 0;
  for (int rep = 0; rep < 50; ++rep) {
    auto c = sample_bernoulli(g, 0.5, rng);
    for (int x = 0; x < g.sites(); x += 2) {
      double w = renormalized_current(g, c, x, 0, 0.5);
      sum += w;
      sumsq += w * w;
      ++n;
    }
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean) < 3.0 * se);
}
