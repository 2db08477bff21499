#pragma once

#include <Eigen/Sparse>

#include <unordered_map>
#include <vector>

#include "asep/dual_space.hpp"

namespace asep {

enum class Dynamics {
  HardCore,  // S and A+ with exclusion, functions on n-subsets
  Free,      // free Laplacian and free A+, symmetric functions on n-multisets
};

struct SupportHash {
  std::size_t operator()(const Support& s) const noexcept;
};

// Translation classes of degree-k supports. On Z^d a class is kept when its extent is at most
// `window` in every coordinate (Dirichlet truncation); on a torus every class is kept.
// A translation-invariant function is stored by its value u_c on each class, and
// <<f,g>> = sum_c weight_c u_c v_c, with weight_c = 1/|stabiliser| (torus) times 1/prod m_x! (free).
class QuotientSpace {
 public:
  QuotientSpace(DualLattice lattice, int degree, Dynamics dynamics, int window);

  const DualLattice& lattice() const { return lattice_; }
  int degree() const { return degree_; }
  Dynamics dynamics() const { return dynamics_; }
  int window() const { return window_; }
  std::size_t size() const { return states_.size(); }
  const Support& state(std::size_t i) const { return states_[i]; }
  double weight(std::size_t i) const { return weight_[i]; }

  // Index of the class of `points` (any translate, any order), or -1 if outside the window.
  long find(const Support& points) const;

 private:
  DualLattice lattice_;
  int degree_;
  Dynamics dynamics_;
  int window_;
  std::vector<Support> states_;
  std::vector<double> weight_;
  std::unordered_map<Support, long, SupportHash> index_;

  bool inside(const Support& canonical) const;
};

// Lexicographically smallest translate and the number of translations fixing the support.
struct CanonicalClass {
  Support representative;
  int stabiliser = 1;
};
CanonicalClass canonical_class(const DualLattice& lattice, Support points);

using SparseMatrixD = Eigen::SparseMatrix<double>;

// All matrices below act on coordinates sqrt(weight_c) u_c, in which <<.,.>> is Euclidean.
// -S (hard-core) or -Delta (free) restricted to the space; symmetric positive semidefinite.
SparseMatrixD negative_symmetric_part(const QuotientSpace& space, const JumpLaw& law);
// A+ from degree k to degree k+1; A+* is its transpose.
SparseMatrixD raising_operator(const QuotientSpace& from, const QuotientSpace& to, const JumpLaw& law);
// The degree-two current w at rho = 1/2 (sum_z p(z) z_1 chi xi_{0,z}).
Eigen::VectorXd current_vector(const QuotientSpace& degree_two, const JumpLaw& law);

}  // namespace asep
