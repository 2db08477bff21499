#pragma once

#include <vector>

namespace asep {

// Test function for the d = 1 lower bound, in reduced coordinates: the degree-two function whose
// shift sum over pairs {y, y+1+x} is fbar(x) = lambda^{-1/4} exp(-lambda^{3/4} x), x >= 0.
double variational_profile(double lambda, double x);

struct VariationalTerms {
  double lambda = 0.0;
  double overlap = 0.0;    // <<w,f>> = fbar(0)/4
  double mass = 0.0;       // lambda <<f,f>> = lambda sum fbar^2
  double dirichlet = 0.0;  // <<f,-S f>> = sum (fbar(x+1) - fbar(x))^2
  double raised = 0.0;     // <<A+ f, (lambda - S)^-1 A+ f>>
  double quadratic() const { return mass + dirichlet + raised; }
};

// 2 alpha <<w,f>> - alpha^2 (<<f,(lambda - S) f>> + <<A+ f,(lambda - S)^-1 A+ f>>).
double variational_value(const VariationalTerms& terms, double alpha);

struct VariationalOptions {
  double mesh_ratio = 1.12;   // geometric growth of the mesh beyond the unit-spaced core
  int unit_core = 16;         // unit-spaced nodes next to each axis
  double extent = 40.0;       // domain side in units of max(lambda^{-3/4}, lambda^{-1/2})
  double refinement_tolerance = 2e-3;
};

// The degree-three term is the lattice walk's resolvent replaced by its continuum limit
// (generator d1^2 + d2^2 - d1 d2 on the quadrant with reflecting axes), solved with bilinear
// elements on a graded tensor mesh; the source keeps its lattice values on the axes.
VariationalTerms variational_terms_d1(double lambda, const VariationalOptions& options = {});
// Same terms on the exact lattice, classes of extent <= window (small windows only).
VariationalTerms variational_terms_d1_lattice(double lambda, int window);

struct VariationalBound {
  double lambda = 0.0;
  double bound = 0.0;
  double alpha = 0.0;
  VariationalTerms terms;
  double refinement_change = 0.0;  // relative change of the raised term under mesh refinement
  bool converged = false;
};

// Maximises over alpha in {2^-10, ..., 1}.
VariationalBound variational_bound_d1(double lambda, const VariationalOptions& options = {});

}  // namespace asep
