#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "asep/lattice.hpp"

namespace asep {

// Z^d, or a torus when the functions are compared against the exact oracle.
struct DualLattice {
  int dimension = 1;
  std::optional<TorusGeometry> torus;

  static DualLattice infinite(int dimension);
  static DualLattice on_torus(const TorusGeometry& geometry);

  Vec2i wrap(Vec2i x) const;
  Vec2i add(Vec2i x, Vec2i z) const { return wrap(TorusGeometry::add(x, z)); }
  // l1 lattice distance (minimal image on a torus)
  int distance(Vec2i x, Vec2i y) const;
  std::vector<Vec2i> unit_steps() const;  // +-e_j
};

enum class Representation {
  HardCore,   // coefficients f_A on n-subsets A; the symmetric extension vanishes on coinciding points
  Symmetric,  // symmetric function on (Z^d)^n stored on sorted tuples; coinciding points allowed
};

using Support = std::vector<Vec2i>;  // sorted lexicographically

// One representative z (lexicographically positive) per unordered pair {x, x+z}.
struct PairRate {
  Vec2i z;
  double s;  // (p(z) + p(-z)) / 2
  double a;  // (p(z) - p(-z)) / 2
};
std::vector<PairRate> pair_rates(const JumpLaw& law);

// A degree-n function in the xi basis (rho = 1/2). Zero coefficients are not stored.
class MonomialFunction {
 public:
  MonomialFunction(DualLattice lattice, int degree, Representation rep = Representation::HardCore);

  const DualLattice& lattice() const { return lattice_; }
  int degree() const { return degree_; }
  Representation representation() const { return rep_; }
  const std::map<Support, double>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Value at any ordering of the points; hard-core functions are 0 on coinciding points.
  double get(Support points) const;
  void set(Support points, double value);
  void add(Support points, double value);

  MonomialFunction translated(Vec2i z) const;
  MonomialFunction& operator+=(const MonomialFunction& other);
  MonomialFunction& operator*=(double c);
  void prune(double tolerance = 0.0);

  Support canonical(Support points) const;

 private:
  DualLattice lattice_;
  int degree_;
  Representation rep_;
  std::map<Support, double> terms_;
};

MonomialFunction operator+(MonomialFunction a, const MonomialFunction& b);
MonomialFunction operator-(MonomialFunction a, const MonomialFunction& b);
MonomialFunction operator*(double c, MonomialFunction a);
double max_abs_difference(const MonomialFunction& a, const MonomialFunction& b);

// Components f_1, ..., f_n by degree; the mean is kept apart and never enters <<.,.>>.
struct GradedFunction {
  double mean = 0.0;
  std::vector<MonomialFunction> parts;  // parts[k-1] has degree k
  const MonomialFunction& degree(int k) const { return parts.at(static_cast<std::size_t>(k - 1)); }
};

// f given by its table on a finite window (bit i of the index is eta at window[i]) expanded in
// xi_A = prod (eta_x - rho)/sqrt(chi). Coefficients are <f, xi_A> under nu_rho.
GradedFunction decompose_local_function(const DualLattice& lattice, std::span<const Vec2i> window,
                                        std::span<const double> table, double density);
// Inverse of the above on the same window: f(eta) = mean + sum_A f_A xi_A(eta).
double evaluate_local_function(const GradedFunction& f, std::span<const Vec2i> window, std::uint64_t bits, double density);

// <<g,h>> = sum_x <tau_x g; h>: per degree, the product of translation-class sums.
double semi_inner_product(const MonomialFunction& g, const MonomialFunction& h);
double semi_inner_product(const GradedFunction& g, const GradedFunction& h);
// Plain <g,h> = (1/n!) sum over ordered tuples.
double l2_inner_product(const MonomialFunction& g, const MonomialFunction& h);

// Symmetric part of the generator in the xi basis: each pair {x, x+z} exchanges at rate
// (p(z) + p(-z))/2. For nearest-neighbour TASEP this is 1/2 per bond.
MonomialFunction apply_S_hardcore(const MonomialFunction& f, const JumpLaw& law);
// Degree-raising part of the antisymmetric generator at rho = 1/2:
// (A+ f)_B = -sum_{x, x+z in B} a(z) [f_{B-x} - f_{B-(x+z)}], a(z) = (p(z) - p(-z))/2.
MonomialFunction apply_Aplus_hardcore(const MonomialFunction& f, const JumpLaw& law);
// Transposed stencil, the adjoint of A+ for <<.,.>> and for <.,.>.
MonomialFunction apply_Aplus_adjoint(const MonomialFunction& g, const JumpLaw& law);

// Free Laplacian on (Z^d)^n, unit rate per coordinate and direction; plane waves have eigenvalue -omega(p).
MonomialFunction apply_Delta_free(const MonomialFunction& f);
// A+ without the exclusion factors, same sign convention as the hard-core operator.
MonomialFunction apply_Aplus_free(const MonomialFunction& f, const JumpLaw& law);

// Hard-core coefficients viewed as a symmetric function (zero off E1), and back.
MonomialFunction to_symmetric(const MonomialFunction& f);

enum class CollisionClass { E1, E2, E3 };
inline constexpr int kIsolationRadius = 5;
// E1: distinct points; E2: every collision an isolated double site; E3: the rest.
CollisionClass classify(const DualLattice& lattice, const Support& points);

// F = T f: F = f on E1, neighbour average at isolated double sites on E2, 0 on E3.
MonomialFunction extend_T(const MonomialFunction& f);
// R F: F restricted to E1, returned in the hard-core representation.
MonomialFunction restrict_R(const MonomialFunction& f);

}  // namespace asep
