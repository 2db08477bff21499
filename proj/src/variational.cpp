#include "asep/variational.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

#include "asep/error.hpp"
#include "asep/quotient.hpp"

namespace asep {

double variational_profile(double lambda, double x) {
  return std::pow(lambda, -0.25) * std::exp(-std::pow(lambda, 0.75) * x);
}

double variational_value(const VariationalTerms& t, double alpha) {
  return 2.0 * alpha * t.overlap - alpha * alpha * t.quadratic();
}

namespace {

void require_lambda(double lambda) {
  require(lambda > 0.0 && lambda <= 0.1, "variational bound: lambda must lie in (0, 0.1]");
}

// Closed forms of the degree-two terms (geometric series in q = e^{-lambda^{3/4}}).
void degree_two_terms(double lambda, VariationalTerms& t) {
  const double a = std::pow(lambda, 0.75);
  t.lambda = lambda;
  t.overlap = 0.25 * std::pow(lambda, -0.25);
  t.mass = std::sqrt(lambda) / -std::expm1(-2.0 * a);
  t.dirichlet = std::pow(lambda, -0.5) * -std::expm1(-a) / (1.0 + std::exp(-a));
}

// Source A+ f on the gap coordinates (x1, x2) >= 0 of {0, 1+x1, 2+x1+x2}:
// (1/2) d(x2) on the axis x1 = 0 and -(1/2) d(x1) on the axis x2 = 0, d(x) = fbar(x+1) - fbar(x).
double profile_step(double lambda, double x) {
  return std::pow(lambda, -0.25) * std::exp(-std::pow(lambda, 0.75) * x) * std::expm1(-std::pow(lambda, 0.75));
}

std::vector<double> graded_nodes(int core, double ratio, double length) {
  std::vector<double> x;
  for (int i = 0; i <= core; ++i) x.push_back(i);
  double h = 1.0;
  while (x.back() < length) {
    h *= ratio;
    x.push_back(std::round(x.back() + h));
  }
  return x;
}

double raised_term_fe(double lambda, double ratio, const VariationalOptions& o) {
  const double scale = std::max(std::pow(lambda, -0.75), std::pow(lambda, -0.5));
  const auto x = graded_nodes(o.unit_core, ratio, o.extent * scale);
  const auto n = static_cast<Eigen::Index>(x.size());
  auto id = [n](Eigen::Index i, Eigen::Index j) { return i * n + j; };

  // Bilinear element matrices for the form int (K grad u . grad v + lambda u v), K = [[1,-1/2],[-1/2,1]].
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(16 * n * n));
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      const double hx = x[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i)];
      const double hy = x[static_cast<std::size_t>(j + 1)] - x[static_cast<std::size_t>(j)];
      Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
      for (double s : gp)
        for (double r : gp) {
          const double phi[4] = {(1 - s) * (1 - r), s * (1 - r), (1 - s) * r, s * r};
          const double dx[4] = {-(1 - r) / hx, (1 - r) / hx, -r / hx, r / hx};
          const double dy[4] = {-(1 - s) / hy, -s / hy, (1 - s) / hy, s / hy};
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              ke(a, b) += 0.25 * hx * hy *
                          (dx[a] * dx[b] + dy[a] * dy[b] - 0.5 * (dx[a] * dy[b] + dy[a] * dx[b]) + lambda * phi[a] * phi[b]);
        }
      const Eigen::Index nodes[4] = {id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) trip.emplace_back(nodes[a], nodes[b], ke(a, b));
    }
  Eigen::SparseMatrix<double> k(n * n, n * n);
  k.setFromTriplets(trip.begin(), trip.end());

  // Load: lattice sum of the source against the hat functions along each axis.
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n * n);
  const auto last = static_cast<long>(x.back());
  std::size_t cell = 0;
  for (long p = 0; p <= last; ++p) {
    while (cell + 2 < x.size() && x[cell + 1] < static_cast<double>(p)) ++cell;
    const double t = (static_cast<double>(p) - x[cell]) / (x[cell + 1] - x[cell]);
    const double d = profile_step(lambda, static_cast<double>(p));
    const auto c = static_cast<Eigen::Index>(cell);
    // axis x1 = 0 carries +d/2 at x2 = p, axis x2 = 0 carries -d/2 at x1 = p
    b[id(0, c)] += 0.5 * d * (1 - t);
    b[id(0, c + 1)] += 0.5 * d * t;
    b[id(c, 0)] -= 0.5 * d * (1 - t);
    b[id(c + 1, 0)] -= 0.5 * d * t;
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(k);
  require(solver.info() == Eigen::Success, "variational bound: finite-element factorisation failed");
  const Eigen::VectorXd u = solver.solve(b);
  return b.dot(u);
}

}  // namespace

VariationalTerms variational_terms_d1(double lambda, const VariationalOptions& o) {
  require_lambda(lambda);
  require(o.mesh_ratio > 1.0 && o.unit_core >= 1 && o.extent > 0.0, "variational bound: invalid mesh options");
  VariationalTerms t;
  degree_two_terms(lambda, t);
  t.raised = raised_term_fe(lambda, o.mesh_ratio, o);
  return t;
}

VariationalTerms variational_terms_d1_lattice(double lambda, int window) {
  require_lambda(lambda);
  const auto z1 = DualLattice::infinite(1);
  const auto law = JumpLaw::tasep_1d();
  QuotientSpace two(z1, 2, Dynamics::HardCore, window), three(z1, 3, Dynamics::HardCore, window);
  Eigen::VectorXd f(static_cast<Eigen::Index>(two.size()));
  for (std::size_t c = 0; c < two.size(); ++c)
    f[static_cast<Eigen::Index>(c)] = variational_profile(lambda, two.state(c)[1][0] - 1);
  const Eigen::VectorXd w = current_vector(two, law);
  const SparseMatrixD s2 = negative_symmetric_part(two, law);
  SparseMatrixD h3 = negative_symmetric_part(three, law);
  SparseMatrixD id(h3.rows(), h3.cols());
  id.setIdentity();
  h3 = 0.5 * (h3 + SparseMatrixD(h3.transpose())) + lambda * id;
  const Eigen::VectorXd g = raising_operator(two, three, law) * f;
  Eigen::SimplicialLLT<SparseMatrixD> llt(h3);
  require(llt.info() == Eigen::Success, "variational bound: lattice factorisation failed");
  VariationalTerms t;
  t.lambda = lambda;
  t.overlap = w.dot(f);
  t.mass = lambda * f.squaredNorm();
  t.dirichlet = f.dot(s2 * f);
  t.raised = g.dot(llt.solve(g));
  return t;
}

VariationalBound variational_bound_d1(double lambda, const VariationalOptions& o) {
  VariationalBound out;
  out.lambda = lambda;
  out.terms = variational_terms_d1(lambda, o);
  VariationalOptions fine = o;
  fine.mesh_ratio = std::sqrt(o.mesh_ratio);
  fine.unit_core = 2 * o.unit_core;
  const double refined = variational_terms_d1(lambda, fine).raised;
  out.refinement_change = std::abs(refined - out.terms.raised) / std::abs(refined);
  out.converged = out.refinement_change < o.refinement_tolerance;
  out.bound = -std::numeric_limits<double>::infinity();
  for (int e = -10; e <= 0; ++e) {
    const double alpha = std::ldexp(1.0, e);
    const double v = variational_value(out.terms, alpha);
    if (v > out.bound) {
      out.bound = v;
      out.alpha = alpha;
    }
  }
  return out;
}

}  // namespace asep
