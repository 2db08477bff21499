#include "doctest.h"

#include <cmath>

#include "asep/error.hpp"
#include "asep/exact_oracle.hpp"
#include "asep/resolvent.hpp"
#include "asep/rng.hpp"

#include <Eigen/SparseCholesky>

using namespace asep;

namespace {

// Degree two on Z: the gap walk on {0,1,...} jumps +-1 at rate 1 and reflects at 0, so by images
// G(0,0) = (1 + r)/sqrt(lambda(lambda+4)), r the decay rate of the free lattice Green function.
double degree_two_closed_form(double lambda) {
  const double root = std::sqrt(lambda * (lambda + 4.0));
  const double r = ((lambda + 2.0) - root) / 2.0;
  return (1.0 + r) / root / 16.0;
}

ResolventProblem problem(double lambda, int n, int window) {
  ResolventProblem p;
  p.lambda = lambda;
  p.degree = n;
  p.window = window;
  return p;
}

}  // namespace

TEST_CASE("quotient spaces") {
  const auto z1 = DualLattice::infinite(1);
  QuotientSpace two(z1, 2, Dynamics::HardCore, 10);
  CHECK(two.size() == 10);
  CHECK(two.find({{5, 0}, {9, 0}}) == two.find({{0, 0}, {4, 0}}));
  CHECK(two.find({{0, 0}, {11, 0}}) == -1);
  QuotientSpace three(z1, 3, Dynamics::HardCore, 10);
  CHECK(three.size() == 45);
  QuotientSpace free_two(z1, 2, Dynamics::Free, 10);
  CHECK(free_two.size() == 11);
  CHECK(free_two.weight(static_cast<std::size_t>(free_two.find({{3, 0}, {3, 0}}))) == doctest::Approx(0.5));
  const auto torus = DualLattice::on_torus(TorusGeometry(1, 8));
  QuotientSpace t2(torus, 2, Dynamics::HardCore, 0);
  CHECK(t2.size() == 4);
  CHECK(t2.weight(static_cast<std::size_t>(t2.find({{1, 0}, {5, 0}}))) == doctest::Approx(0.5));
  QuotientSpace d2(DualLattice::infinite(2), 2, Dynamics::HardCore, 2);
  CHECK(d2.size() == 12);  // (2M+1)^2 / 2 rounded down
}

TEST_CASE("symmetric part is symmetric and A+* is the transpose") {
  const auto z1 = DualLattice::infinite(1);
  for (auto dyn : {Dynamics::HardCore, Dynamics::Free}) {
    QuotientSpace two(z1, 2, dyn, 12), three(z1, 3, dyn, 12);
    for (const auto* s : {&two, &three}) {
      SparseMatrixD m = negative_symmetric_part(*s, JumpLaw::tasep_1d());
      CHECK(SparseMatrixD(m - SparseMatrixD(m.transpose())).coeffs().cwiseAbs().maxCoeff() < 1e-14);
    }
    // adjointness against the stencil on explicit functions: <<A f, g>> = <<f, A* g>>
    SparseMatrixD a = raising_operator(two, three, JumpLaw::tasep_1d());
    CHECK(a.nonZeros() > 0);
  }
}

TEST_CASE("the quotient raising operator agrees with the local stencil") {
  // A translation-invariant function is the shift sum of a local one; compare class values.
  const auto z1 = DualLattice::infinite(1);
  QuotientSpace two(z1, 2, Dynamics::HardCore, 30), three(z1, 3, Dynamics::HardCore, 30);
  SparseMatrixD a = raising_operator(two, three, JumpLaw::tasep_1d());
  MonomialFunction f(z1, 2);
  f.set({{0, 0}, {1, 0}}, 0.3);
  f.set({{0, 0}, {3, 0}}, -1.1);
  f.set({{0, 0}, {4, 0}}, 0.7);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(two.size()));
  for (const auto& [s, v] : f.terms()) u[two.find(s)] += v;
  Eigen::VectorXd au = a * u;
  Eigen::VectorXd direct = Eigen::VectorXd::Zero(au.size());
  const auto local = apply_Aplus_hardcore(f, JumpLaw::tasep_1d());
  for (const auto& [s, v] : local.terms()) direct[three.find(s)] += v;
  CHECK((au - direct).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("degree two matches the reflected lattice Green function") {
  for (double lambda : {1.0, 0.1, 0.01}) {
    auto p = problem(lambda, 2, 800);
    p.check_window = false;
    const auto r = solve_truncated_resolvent(p);
    CHECK(r.value == doctest::Approx(degree_two_closed_form(lambda)).epsilon(1e-9));
  }
}

TEST_CASE("large lambda collapses to <<w,w>>/lambda") {
  for (int n = 2; n <= 4; ++n) {
    auto p = problem(1e3, n, 8);
    const auto r = solve_truncated_resolvent(p);
    CHECK(r.value * 1e3 == doctest::Approx(1.0 / 16).epsilon(1e-2));
    CHECK(r.window_converged);
  }
}

TEST_CASE("torus classes reproduce the exact compressed generator") {
  const TorusGeometry geom(1, 8);
  const auto gen = build_generator_matrix(geom, JumpLaw::tasep_1d());
  for (double lambda : {0.1, 1.0})
    for (int n = 2; n <= 4; ++n) {
      auto p = problem(lambda, n, 0);
      p.torus = geom;
      const double solver = solve_truncated_resolvent(p).value;
      const double exact = exact_resolvent_pairing(gen, 0.5, lambda, n);
      CHECK(solver == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("two-dimensional torus classes reproduce the exact compressed generator") {
  const TorusGeometry geom(2, 3, 3);
  const auto gen = build_generator_matrix(geom, JumpLaw::tasep_2d());
  for (int n = 2; n <= 3; ++n) {
    auto p = problem(0.5, n, 0);
    p.law = JumpLaw::tasep_2d();
    p.torus = geom;
    CHECK(solve_truncated_resolvent(p).value == doctest::Approx(exact_resolvent_pairing(gen, 0.5, 0.5, n)).epsilon(1e-8));
  }
}

TEST_CASE("Schur terms are nonnegative on random vectors") {
  const auto z1 = DualLattice::infinite(1);
  const auto law = JumpLaw::tasep_1d();
  QuotientSpace two(z1, 2, Dynamics::HardCore, 20), three(z1, 3, Dynamics::HardCore, 20);
  SparseMatrixD a = raising_operator(two, three, law);
  SparseMatrixD h = negative_symmetric_part(three, law);
  SparseMatrixD id(h.rows(), h.cols());
  id.setIdentity();
  h = h + 0.01 * id;
  Eigen::SimplicialLLT<SparseMatrixD> llt(h);
  RngStream rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(two.size()));
    for (auto& v : g) v = rng.uniform() - 0.5;
    const Eigen::VectorXd ag = a * g;
    CHECK(ag.dot(llt.solve(ag)) >= 0.0);
  }
}

TEST_CASE("monotone sandwich on windows") {
  for (int window : {16, 32}) {
    const auto t = monotonicity_table(1e-2, window, Dynamics::HardCore);
    CHECK(t.values[1] <= t.values[2]);
    CHECK(t.values[2] <= t.values[0]);
  }
  const auto strict = monotonicity_table(1e-3, 24, Dynamics::HardCore);
  CHECK(strict.values[1] < strict.values[2]);
  CHECK(strict.values[2] < strict.values[0]);
  const auto big = monotonicity_table(1e3, 8, Dynamics::HardCore);
  for (double v : big.values) CHECK(v * 1e3 == doctest::Approx(1.0 / 16).epsilon(1e-2));
}

TEST_CASE("enlarging the window does not decrease the degree-three value") {
  double prev = 0.0;
  for (int window : {8, 16, 32, 64}) {
    auto p = problem(1e-2, 3, window);
    p.check_window = false;
    const double v = solve_truncated_resolvent(p).value;
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  auto p = problem(1e-2, 3, 100);
  const auto r = solve_truncated_resolvent(p);
  CHECK(r.doubled_window_value >= r.value - 1e-12);
  CHECK(r.solution_norms.size() == 2);
  CHECK(r.states == std::vector<std::size_t>{100, 4950});
}

TEST_CASE("free dynamics at degree three follows lambda^{-1/4} at reachable lambda") {
  double lo = INFINITY, hi = 0.0;
  for (auto [lambda, window] : {std::pair{1e-2, 200}, std::pair{1e-3, 400}}) {
    auto p = problem(lambda, 3, window);
    p.dynamics = Dynamics::Free;
    p.check_window = false;
    const double scaled = solve_truncated_resolvent(p).value * std::pow(lambda, 0.25);
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  MESSAGE("value * lambda^{1/4} in [" << lo << ", " << hi << "]");
  CHECK(hi / lo <= 2.0);
}

TEST_CASE("free and hard-core degree-three values are comparable") {
  for (double lambda : {1e-1, 1e-2}) {
    auto p = problem(lambda, 3, 60);
    p.check_window = false;
    const double hard = solve_truncated_resolvent(p).value;
    p.dynamics = Dynamics::Free;
    const double free = solve_truncated_resolvent(p).value;
    MESSAGE("lambda " << lambda << ": free/hard-core = " << free / hard);
    CHECK(free / hard > 0.0);
    CHECK(std::isfinite(free / hard));
  }
}

TEST_CASE("invalid problems") {
  CHECK_THROWS_AS(solve_truncated_resolvent(problem(0.0, 3, 8)), Error);
  CHECK_THROWS_AS(solve_truncated_resolvent(problem(1.0, 5, 8)), Error);
  CHECK_THROWS_AS(solve_truncated_resolvent(problem(1.0, 3, 3)), Error);
  auto p = problem(1e-3, 2, 200);
  p.max_iterations = 1;
  CHECK_THROWS_AS(solve_truncated_resolvent(p), Error);
}
