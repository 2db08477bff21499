#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "asep/rng.hpp"

namespace asep {

using Vec2i = std::array<int, 2>;  // displacement or site; second component is 0 when d = 1

struct JumpEntry {
  Vec2i displacement{};
  double rate = 0.0;
};

// Finite-range jump law p(z). Entries with equal displacement are merged.
class JumpLaw {
 public:
  static JumpLaw build(int dimension, std::span<const JumpEntry> entries, bool require_asymmetric = true);

  // d = 1: p(+1) = 1.
  static JumpLaw tasep_1d();
  // d = 2: p(e1) = 1, p(e2) = p(-e2) = 1/2.
  static JumpLaw tasep_2d();

  int dimension() const { return dimension_; }
  std::span<const JumpEntry> entries() const { return entries_; }
  std::array<double, 2> mean() const { return mean_; }
  // Smallest L with p(z) = 0 for |z|_1 >= L.
  int range() const { return range_; }
  double total_rate() const { return total_rate_; }
  // sum_z p(z) z_i z_j
  double second_moment(int i, int j) const;

 private:
  int dimension_ = 1;
  std::vector<JumpEntry> entries_;
  std::array<double, 2> mean_{};
  int range_ = 1;
  double total_rate_ = 0.0;
};

class TorusGeometry {
 public:
  // Side lengths >= 2; d = 1 ignores side2.
  TorusGeometry(int dimension, int side1, int side2 = 1);

  int dimension() const { return dimension_; }
  int side(int axis) const { return sides_[axis]; }
  int sites() const { return sites_; }

  int index(Vec2i x) const;
  Vec2i coords(int site) const;
  int shift(int site, Vec2i z) const { return index(add(coords(site), z)); }
  // Minimal-image representative of a displacement, components in (-side/2, side/2].
  Vec2i minimal_image(Vec2i z) const;

  // Torus large enough for wrap-free jumps: every side >= 2L + 2.
  bool admits(const JumpLaw& law) const;

  static Vec2i add(Vec2i a, Vec2i b) { return {a[0] + b[0], a[1] + b[1]}; }

 private:
  int dimension_;
  std::array<int, 2> sides_;
  int sites_;
};

// Occupation field, bit-packed in 64-bit words with a cached particle count.
class Configuration {
 public:
  explicit Configuration(int sites = 0);

  int sites() const { return sites_; }
  int particles() const { return particles_; }
  bool occupied(int site) const { return (words_[site >> 6] >> (site & 63)) & 1u; }
  void set(int site, bool value);
  // Swap occupations at x and y; x != y.
  void exchange(int x, int y);

  std::span<const std::uint64_t> words() const { return words_; }
  bool operator==(const Configuration& other) const = default;

  // Recount from bits; equals particles() whenever the invariant holds.
  int popcount() const;

 private:
  int sites_ = 0;
  int particles_ = 0;
  std::vector<std::uint64_t> words_;
};

Configuration sample_bernoulli(const TorusGeometry& geometry, double density, RngStream& rng);

// Value-returning exchange; throws when x == y.
Configuration apply_exchange(const Configuration& config, int x, int y);

// Instantaneous current w~_{x,x+e_i} of the special models: eta_x (1 - eta_{x+e1}) for
// axis 0 and (eta_{x+e2} - eta_x) / 2 for axis 1.
double instantaneous_current(const TorusGeometry& geometry, const Configuration& config, int site, int axis);

// Degree-two renormalized current along axis: (eta_x - rho)(eta_{x+e1} - rho) for axis 0, and 0 for axis 1.
double renormalized_current(const TorusGeometry& geometry, const Configuration& config, int site, int axis, double density);

}  // namespace asep
