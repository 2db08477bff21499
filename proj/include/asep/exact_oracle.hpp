#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "asep/lattice.hpp"

namespace asep {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Rate matrix of the exclusion process on all 2^N configurations of a small torus.
// State s encodes eta_x as bit x. (Lf)(s) = sum_s' rates(s, s') f(s').
struct GeneratorMatrix {
  TorusGeometry geometry{1, 2};
  JumpLaw law = JumpLaw::tasep_1d();
  SparseRowMatrix rates;                       // rows sum to zero
  std::array<SparseRowMatrix, 2> displacement; // off-diagonal rate * z_i
  std::array<std::array<SparseRowMatrix, 2>, 2> displacement2;  // off-diagonal rate * z_i * z_j

  std::size_t states() const { return static_cast<std::size_t>(rates.rows()); }
  int sites() const { return geometry.sites(); }
};

GeneratorMatrix build_generator_matrix(const TorusGeometry& geometry, const JumpLaw& law, int max_sites = 16);

// Configurations with the given particle number, ascending, and the (invariant) block of L on them.
std::vector<std::uint32_t> sector_states(const GeneratorMatrix& gen, int particles);
SparseRowMatrix sector_block(const GeneratorMatrix& gen, int particles);

Eigen::VectorXd product_measure(const GeneratorMatrix& gen, double density);

// ||mu L||_inf for an arbitrary measure, and for nu_rho.
double stationarity_residual(const GeneratorMatrix& gen, const Eigen::VectorXd& measure);
double check_stationarity(const GeneratorMatrix& gen, double density);

// mu e^{tL} by uniformization, truncating the Poisson series once its tail is below tol.
Eigen::VectorXd evolve_measure(const GeneratorMatrix& gen, const Eigen::VectorXd& measure, double t, double tol = 1e-14);

// S(x,t) = E_nu[(eta_x(t) - eta_x(0)) eta_0(0)], indexed by site of x.
std::vector<double> exact_structure_function(const GeneratorMatrix& gen, double density, double t);

struct ExactCurrentMoments {
  std::array<double, 2> mean{};
  std::array<std::array<double, 2>, 2> second{};     // E[J_i J_j]
  std::array<std::array<double, 2>, 2> conditional{}; // E[Cov(J_i, J_j | K)]
};

// Moments of the integrated current J(t) from the stationary start, via the tilted generator.
ExactCurrentMoments exact_current_moments(const GeneratorMatrix& gen, double density, double t, double tol = 1e-14);

struct ExactDiffusivity {
  double t = 0.0;
  // (1/2 chi t)[sum_x x_i x_j S(x,t) - chi v_i v_j t^2] with minimal-image x (wraps on small tori)
  std::array<std::array<double, 2>, 2> structure{};
  // (1/2 chi t)[Cov(J_i, J_j)/N - chi v_i v_j t^2], v = m (1 - 2 rho); exact on the torus
  std::array<std::array<double, 2>, 2> current{};
  // (1/2 chi t) E[Cov(J_i, J_j | K)] / N, the fixed-particle-number version
  std::array<std::array<double, 2>, 2> canonical{};
};

ExactDiffusivity exact_diffusivity(const GeneratorMatrix& gen, double density, double t);

// Orthonormal product basis xi_A = prod_{x in A} (eta_x - rho)/sqrt(chi), A a subset of sites.
// Subsets are ordered by size, then by bit mask.
struct XiBasis {
  int sites = 0;
  double density = 0.5;
  std::vector<std::uint32_t> subsets;
  std::vector<int> position;   // mask -> index in subsets
  Eigen::MatrixXd values;      // values(state, index) = xi_A(state)
};

XiBasis make_xi_basis(int sites, double density, int max_sites = 12);

// Matrix of L in the xi basis: (L f)_A = sum_B M(A, B) f_B.
Eigen::MatrixXd xi_generator(const GeneratorMatrix& gen, const XiBasis& basis);

// W = sum_x sum_z p(z) z_1 (eta_x - rho)(eta_{x+z} - rho), the summed degree-two current (sign dropped).
// For TASEP this is sum_x (eta_x - rho)(eta_{x+1} - rho); it vanishes identically for a symmetric law.
Eigen::VectorXd summed_current(const GeneratorMatrix& gen, double density);

// <<w,(lambda - L)^-1 w>> = N^-1 <W, (lambda - L)^-1 W>_nu. With a degree cutoff n the generator
// is compressed to degrees 1..n of the xi basis (L_n = pi_n L pi_n).
double exact_resolvent_pairing(const GeneratorMatrix& gen, double density, double lambda,
                               std::optional<int> degree = std::nullopt);

struct LaplaceCheck {
  double lambda = 0.0;
  double lhs = 0.0;       // int_0^inf e^{-lambda t} t D_11(t) dt, quadrature of the exact D
  double rhs = 0.0;       // sum_z p(z) z_1^2 / (2 lambda^2) + chi^-1 lambda^-2 <<w,(lambda-L)^-1 w>>
  double pairing = 0.0;
  double quadrature_error = 0.0;
  double relative_gap = 0.0;
};

// rho = 1/2 only (the current is then purely of degree two).
LaplaceCheck laplace_identity_check(const GeneratorMatrix& gen, double density, double lambda);

}  // namespace asep
