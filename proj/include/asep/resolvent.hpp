#pragma once

#include <array>
#include <optional>
#include <vector>

#include "asep/lattice.hpp"
#include "asep/quotient.hpp"

namespace asep {

struct ResolventProblem {
  double lambda = 1.0;
  int degree = 3;   // cutoff n in {2, 3, 4}
  int window = 16;  // M: extent of every class per coordinate
  Dynamics dynamics = Dynamics::HardCore;
  double tolerance = 1e-10;  // relative residual of the conjugate-gradient solve
  int max_iterations = 10000;
  JumpLaw law = JumpLaw::tasep_1d();
  // When set, the classes of this torus replace the window (the window then covers the torus).
  std::optional<TorusGeometry> torus;
  bool check_window = true;  // re-solve at 2M
};

struct ResolventResult {
  double value = 0.0;                  // <<w,(lambda - L_n)^-1 w>> on the window
  double doubled_window_value = 0.0;   // same at 2M (equal to value on a torus)
  double window_change = 0.0;          // relative change between M and 2M
  bool window_converged = false;       // window_change < 10 tolerance
  std::vector<double> solution_norms;  // ||u_k|| for k = 2..n
  std::vector<std::size_t> states;     // classes per degree 2..n
  int iterations = 0;
};

// Eliminates degree n down to degree 2: H_n = lambda - S_n, H_k = lambda - S_k + A+* H_{k+1}^-1 A+,
// value = <<w, H_2^-1 w>>. Zero values are imposed outside the window.
ResolventResult solve_truncated_resolvent(const ResolventProblem& problem);

struct MonotonicityTable {
  double lambda = 0.0;
  int window = 0;
  Dynamics dynamics = Dynamics::HardCore;
  std::array<double, 3> values{};  // n = 2, 3, 4
  std::array<bool, 3> converged{};
};

// Solves n = 2, 3, 4 on a shared window and tolerance and throws if
// value(3) <= value(4) <= value(2) fails by more than 10 tolerance (relative).
MonotonicityTable monotonicity_table(double lambda, int window, Dynamics dynamics, double tolerance = 1e-10,
                                     bool check_window = false);

}  // namespace asep
