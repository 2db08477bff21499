#include "asep/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>

#include "asep/error.hpp"

namespace asep {

JumpLaw JumpLaw::build(int dimension, std::span<const JumpEntry> entries, bool require_asymmetric) {
  require(dimension == 1 || dimension == 2, "jump law: dimension must be 1 or 2");
  std::map<Vec2i, double> merged;
  for (const auto& e : entries) {
    require(std::isfinite(e.rate) && e.rate >= 0.0, "jump law: rates must be finite and nonnegative");
    Vec2i z = e.displacement;
    if (dimension == 1) require(z[1] == 0, "jump law: second displacement component must be 0 in d=1");
    if (e.rate == 0.0) continue;
    require(z != Vec2i{0, 0}, "jump law: p(0) must be 0");
    merged[z] += e.rate;
  }
  require(!merged.empty(), "jump law: empty support");

  JumpLaw law;
  law.dimension_ = dimension;
  int max_norm = 0;
  for (const auto& [z, r] : merged) {
    law.entries_.push_back({z, r});
    law.mean_[0] += z[0] * r;
    law.mean_[1] += z[1] * r;
    law.total_rate_ += r;
    max_norm = std::max(max_norm, std::abs(z[0]) + std::abs(z[1]));
  }
  law.range_ = max_norm + 1;
  if (require_asymmetric) {
    require(std::abs(law.mean_[0]) + std::abs(law.mean_[1]) > 1e-12 * law.total_rate_,
            "jump law: zero mean drift but asymmetry required");
  }
  return law;
}

JumpLaw JumpLaw::tasep_1d() {
  const JumpEntry e[] = {{{1, 0}, 1.0}};
  return build(1, e);
}

JumpLaw JumpLaw::tasep_2d() {
  const JumpEntry e[] = {{{1, 0}, 1.0}, {{0, 1}, 0.5}, {{0, -1}, 0.5}};
  return build(2, e);
}

double JumpLaw::second_moment(int i, int j) const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.rate * e.displacement[i] * e.displacement[j];
  return s;
}

TorusGeometry::TorusGeometry(int dimension, int side1, int side2) : dimension_(dimension) {
  require(dimension == 1 || dimension == 2, "torus: dimension must be 1 or 2");
  if (dimension == 1) side2 = 1;
  require(side1 >= 2 && (dimension == 1 || side2 >= 2), "torus: side lengths must be >= 2");
  sides_ = {side1, side2};
  sites_ = side1 * side2;
}

int TorusGeometry::index(Vec2i x) const {
  int a = ((x[0] % sides_[0]) + sides_[0]) % sides_[0];
  int b = ((x[1] % sides_[1]) + sides_[1]) % sides_[1];
  return a + sides_[0] * b;
}

Vec2i TorusGeometry::coords(int site) const { return {site % sides_[0], site / sides_[0]}; }

Vec2i TorusGeometry::minimal_image(Vec2i z) const {
  Vec2i out{};
  for (int k = 0; k < 2; ++k) {
    int n = sides_[k];
    int r = ((z[k] % n) + n) % n;
    if (r > n / 2) r -= n;
    out[k] = r;
  }
  return out;
}

bool TorusGeometry::admits(const JumpLaw& law) const {
  if (law.dimension() != dimension_) return false;
  for (int k = 0; k < dimension_; ++k)
    if (sides_[k] < 2 * law.range() + 2) return false;
  return true;
}

Configuration::Configuration(int sites) : sites_(sites), words_((sites + 63) / 64, 0) {}

void Configuration::set(int site, bool value) {
  std::uint64_t mask = std::uint64_t{1} << (site & 63);
  std::uint64_t& w = words_[site >> 6];
  bool old = w & mask;
  if (old == value) return;
  w ^= mask;
  particles_ += value ? 1 : -1;
}

void Configuration::exchange(int x, int y) {
  require(x != y, "exchange: x and y must differ");
  bool a = occupied(x), b = occupied(y);
  if (a == b) return;
  words_[x >> 6] ^= std::uint64_t{1} << (x & 63);
  words_[y >> 6] ^= std::uint64_t{1} << (y & 63);
}

int Configuration::popcount() const {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

Configuration sample_bernoulli(const TorusGeometry& geometry, double density, RngStream& rng) {
  require(density > 0.0 && density < 1.0, "density must lie in (0,1), got " + std::to_string(density));
  Configuration c(geometry.sites());
  for (int s = 0; s < geometry.sites(); ++s)
    if (rng.uniform() < density) c.set(s, true);
  return c;
}

Configuration apply_exchange(const Configuration& config, int x, int y) {
  Configuration out = config;
  out.exchange(x, y);
  return out;
}

double instantaneous_current(const TorusGeometry& geometry, const Configuration& config, int site, int axis) {
  require(axis >= 0 && axis < geometry.dimension(), "current: axis out of range");
  if (axis == 0) {
    int y = geometry.shift(site, {1, 0});
    return config.occupied(site) && !config.occupied(y) ? 1.0 : 0.0;
  }
  int y = geometry.shift(site, {0, 1});
  return 0.5 * (static_cast<double>(config.occupied(y)) - static_cast<double>(config.occupied(site)));
}

double renormalized_current(const TorusGeometry& geometry, const Configuration& config, int site, int axis, double density) {
  require(axis >= 0 && axis < geometry.dimension(), "current: axis out of range");
  if (axis == 1) return 0.0;
  int y = geometry.shift(site, {1, 0});
  return (config.occupied(site) - density) * (config.occupied(y) - density);
}

}  // namespace asep
