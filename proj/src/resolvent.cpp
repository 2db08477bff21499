#include "asep/resolvent.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>

#include "asep/error.hpp"

namespace asep {
namespace {

constexpr std::size_t kDenseCap = 9000;  // largest intermediate degree kept as a dense matrix

SparseMatrixD symmetrised(const SparseMatrixD& m) {
  SparseMatrixD t = m.transpose();
  const double asym = SparseMatrixD(m - t).coeffs().cwiseAbs().maxCoeff();
  const double size = m.coeffs().cwiseAbs().maxCoeff();
  require(!(asym > 1e-12 * std::max(1.0, size)), "resolvent: symmetric part is not symmetric (operator bug)");
  return 0.5 * (m + t);
}

struct WindowSolution {
  double value = 0.0;
  std::vector<double> norms;
  std::vector<std::size_t> states;
  int iterations = 0;
};

WindowSolution solve_window(const ResolventProblem& p, int window) {
  const DualLattice lattice = p.torus ? DualLattice::on_torus(*p.torus) : DualLattice::infinite(p.law.dimension());
  const int n = p.degree;
  std::vector<QuotientSpace> spaces;
  for (int k = 2; k <= n; ++k) spaces.emplace_back(lattice, k, p.dynamics, window);
  auto idx = [](int k) { return static_cast<std::size_t>(k - 2); };

  std::vector<SparseMatrixD> h0, up;
  for (int k = 2; k <= n; ++k) {
    SparseMatrixD h = symmetrised(negative_symmetric_part(spaces[idx(k)], p.law));
    SparseMatrixD id(h.rows(), h.cols());
    id.setIdentity();
    h0.push_back(h + p.lambda * id);
  }
  for (int k = 2; k < n; ++k) up.push_back(raising_operator(spaces[idx(k)], spaces[idx(k + 1)], p.law));

  // Top degree: sparse Cholesky. Lower degrees: dense Schur complements.
  Eigen::SimplicialLLT<SparseMatrixD> top;
  std::vector<std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>>> dense(static_cast<std::size_t>(n + 1));
  Eigen::MatrixXd schur;  // H_k for the current k, dense
  if (n > 2) {
    top.compute(h0.back());
    require(top.info() == Eigen::Success, "resolvent: factorisation of the top degree failed");
  }
  for (int k = n - 1; k >= 2; --k) {
    const auto& a = up[idx(k)];
    const auto rows = static_cast<std::size_t>(a.cols());
    require(rows <= kDenseCap, "resolvent: window too large for the dense Schur complement");
    Eigen::MatrixXd term(a.cols(), a.cols());
    const Eigen::Index chunk = 256;
    for (Eigen::Index j = 0; j < a.cols(); j += chunk) {
      const Eigen::Index b = std::min(chunk, a.cols() - j);
      Eigen::MatrixXd rhs = Eigen::MatrixXd(a.middleCols(j, b));
      Eigen::MatrixXd x = (k + 1 == n) ? Eigen::MatrixXd(top.solve(rhs)) : Eigen::MatrixXd(dense[static_cast<std::size_t>(k + 1)]->solve(rhs));
      term.middleCols(j, b) = a.transpose() * x;
    }
    schur = Eigen::MatrixXd(h0[idx(k)]) + 0.5 * (term + term.transpose());
    if (k > 2) {
      dense[static_cast<std::size_t>(k)] = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(schur);
      require(dense[static_cast<std::size_t>(k)]->info() == Eigen::Success, "resolvent: Schur complement is not positive definite");
    }
  }

  const Eigen::VectorXd w = current_vector(spaces[0], p.law);
  SparseMatrixD h2 = n > 2 ? SparseMatrixD(schur.sparseView()) : h0[0];
  Eigen::ConjugateGradient<SparseMatrixD, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(p.tolerance);
  cg.setMaxIterations(p.max_iterations);
  cg.compute(h2);
  Eigen::VectorXd u = cg.solve(w);
  if (cg.info() != Eigen::Success)
    fail(ErrorKind::Compute, "resolvent: conjugate gradient did not reach the tolerance within " +
                                 std::to_string(p.max_iterations) + " iterations");

  WindowSolution out;
  out.value = w.dot(u);
  out.iterations = static_cast<int>(cg.iterations());
  for (const auto& s : spaces) out.states.push_back(s.size());
  out.norms.push_back(u.norm());
  for (int k = 3; k <= n; ++k) {
    Eigen::VectorXd rhs = up[idx(k - 1)] * u;
    u = (k == n) ? Eigen::VectorXd(top.solve(rhs)) : Eigen::VectorXd(dense[static_cast<std::size_t>(k)]->solve(rhs));
    out.norms.push_back(u.norm());
  }
  return out;
}

}  // namespace

ResolventResult solve_truncated_resolvent(const ResolventProblem& p) {
  require(p.lambda > 0.0, "resolvent: lambda must be positive");
  require(p.degree >= 2 && p.degree <= 4, "resolvent: degree cutoff must be 2, 3 or 4");
  require(p.torus.has_value() || p.window >= 4, "resolvent: window must be >= 4");
  require(p.tolerance > 0.0, "resolvent: tolerance must be positive");
  require(p.max_iterations > 0, "resolvent: max_iterations must be positive");
  ResolventResult r;
  auto first = solve_window(p, p.window);
  r.value = first.value;
  r.solution_norms = first.norms;
  r.states = first.states;
  r.iterations = first.iterations;
  if (p.torus || !p.check_window) {
    r.doubled_window_value = r.value;
    r.window_converged = p.torus.has_value();
    return r;
  }
  const auto second = solve_window(p, 2 * p.window);
  r.doubled_window_value = second.value;
  r.window_change = std::abs(second.value - first.value) / std::abs(second.value);
  r.window_converged = r.window_change < 10.0 * p.tolerance;
  return r;
}

MonotonicityTable monotonicity_table(double lambda, int window, Dynamics dynamics, double tolerance, bool check_window) {
  MonotonicityTable t;
  t.lambda = lambda;
  t.window = window;
  t.dynamics = dynamics;
  for (int n = 2; n <= 4; ++n) {
    ResolventProblem p;
    p.lambda = lambda;
    p.degree = n;
    p.window = window;
    p.dynamics = dynamics;
    p.tolerance = tolerance;
    p.check_window = check_window;
    const auto r = solve_truncated_resolvent(p);
    t.values[static_cast<std::size_t>(n - 2)] = r.value;
    t.converged[static_cast<std::size_t>(n - 2)] = r.window_converged;
  }
  const double slack = 10.0 * tolerance * std::abs(t.values[0]);
  if (!(t.values[1] <= t.values[2] + slack && t.values[2] <= t.values[0] + slack))
    fail(ErrorKind::Compute, "monotonicity violated: L3 = " + std::to_string(t.values[1]) + ", L4 = " +
                                 std::to_string(t.values[2]) + ", L2 = " + std::to_string(t.values[0]));
  return t;
}

}  // namespace asep
