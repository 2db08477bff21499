#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asep/lattice.hpp"
#include "asep/rng.hpp"

namespace asep {

// Rejection-free continuous-time simulation of the exclusion process.
//
// Admissible directed bonds (occupied source, empty target) are kept in one
// swap-remove list per jump displacement, so an event costs O(#displacements).
class KmcSimulator {
 public:
  KmcSimulator(TorusGeometry geometry, JumpLaw law, Configuration initial);

  // Run until time t (>= time()). The pending exponential clock is discarded
  // at the horizon, which is exact by memorylessness.
  void advance_to(double t, RngStream& rng);

  double time() const { return time_; }
  const Configuration& configuration() const { return config_; }
  std::uint64_t events() const { return events_; }
  double total_rate() const;
  // Net particle displacement summed over all jumps since construction (unwrapped).
  std::array<double, 2> integrated_current() const { return {static_cast<double>(current_[0]), static_cast<double>(current_[1])}; }

 private:
  void refresh_bond(int type, int source);
  void refresh_around(int site);

  TorusGeometry geometry_;
  JumpLaw law_;
  Configuration config_;
  std::vector<std::vector<int>> active_;    // per type: source sites of admissible bonds
  std::vector<std::vector<int>> position_;  // per type: index into active_, -1 if inactive
  std::vector<int> targets_;                // [type * sites + source] -> target site
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  std::array<long long, 2> current_{};
};

enum class InitialEnsemble {
  Bernoulli,  // i.i.d. occupations with density rho
  Canonical,  // Bernoulli measure conditioned on round(rho * N) particles
};

struct SimulationParams {
  TorusGeometry geometry{1, 64};
  JumpLaw law = JumpLaw::tasep_1d();
  double density = 0.5;
  std::vector<double> times;  // strictly increasing, > 0
  InitialEnsemble ensemble = InitialEnsemble::Bernoulli;
};

struct TrajectoryRecord {
  Configuration initial;
  std::vector<Configuration> snapshots;               // one per observation time
  std::vector<std::array<double, 2>> current;         // integrated current at each time
};

// One replica: eta(0) ~ nu_rho, then snapshots at each observation time.
TrajectoryRecord run_trajectory(const SimulationParams& params, RngStream& rng);

struct TrajectoryBatch {
  SimulationParams params;
  std::uint64_t seed = 0;
  std::vector<TrajectoryRecord> replicas;
};

// Replica r uses RngStream(seed, r); results do not depend on thread count.
TrajectoryBatch run_batch(const SimulationParams& params, int replicas, std::uint64_t seed, int threads = 0);

// Per-replica translation-averaged correlation data at one observation time.
struct ReplicaMoments {
  std::array<double, 2> first{};          // sum_x x_i S_r(x,t)
  std::array<std::array<double, 2>, 2> second{};  // sum_x x_i x_j S_r(x,t)
  double abs_first = 0.0;                  // sum_x |x|_1 S_r(x,t)
  double bond_current_sq = 0.0;            // d = 1: N^-1 sum_b (J_b(t) - E J_b(t))^2
  std::array<double, 2> current{};        // integrated current J_r(t)
  double density = 0.0;                    // realised K / N
};

// Associative reduction of replicas: sums of S_r and S_r^2 per (t, x) plus per-replica moments.
class StructureStatistics {
 public:
  StructureStatistics(const SimulationParams& params);

  void add(const TrajectoryRecord& record);
  void merge(const StructureStatistics& other);

  const SimulationParams& params() const { return params_; }
  int replicas() const { return replicas_; }
  std::size_t time_count() const { return params_.times.size(); }
  // replica-mean S(x, t_k) at torus displacement index (site index of x)
  double mean(std::size_t k, int site) const;
  double stderr_of_mean(std::size_t k, int site) const;
  const std::vector<std::vector<ReplicaMoments>>& moments() const { return moments_; }  // [replica][k]

 private:
  SimulationParams params_;
  int replicas_ = 0;
  std::vector<std::vector<double>> sum_;     // [k][site]
  std::vector<std::vector<double>> sumsq_;
  std::vector<std::vector<ReplicaMoments>> moments_;
};

// Simulate and reduce on the fly without storing configurations.
StructureStatistics simulate_statistics(const SimulationParams& params, int replicas, std::uint64_t seed, int threads = 0);

StructureStatistics reduce_batch(const TrajectoryBatch& batch);

// Translation-averaged S_r(x,t) = N^-1 sum_y eta_y(0) (eta_{y+x}(t) - eta_{y+x}(0)), indexed by torus site of x.
std::vector<double> replica_structure_function(const TorusGeometry& geometry, const Configuration& initial,
                                               const Configuration& later);

struct StructureRow {
  double t;
  Vec2i x;
  double value;
  double stderr;
};

// Rows ordered by t, then minimal-image x lexicographically. t = 0 rows are exactly zero.
std::vector<StructureRow> estimate_structure_function(const StructureStatistics& stats, bool include_zero_time = true);

struct VelocityEstimate {
  std::array<double, 2> value{};
  std::array<double, 2> stderr{};
  std::vector<double> times;                       // times used
  std::vector<std::array<double, 2>> per_time;      // v_hat(t) at each time
  std::vector<std::string> warnings;
};

// v_hat = chi^-1 sum_x x S_hat(x,t) / t, averaged over the observation times.
VelocityEstimate estimate_velocity(const StructureStatistics& stats);

// Linear-response form of the same quantity: sum_x x S(x,t) = Cov(J(t), K) / N under the
// product measure, so v is the regression slope of J(t)/t on the particle number K.
// Orders of magnitude less noisy than the first moment of S_hat; needs the Bernoulli ensemble.
VelocityEstimate estimate_velocity_from_current(const StructureStatistics& stats);

struct DiffusivityEstimate {
  double t = 0.0;
  std::array<std::array<double, 2>, 2> value{};
  std::array<std::array<double, 2>, 2> stderr{};
  int replicas = 0;
};

struct DiffusivitySeries {
  std::vector<DiffusivityEstimate> estimates;  // accepted times only
  std::vector<double> refused_times;           // beyond the wrap-around guard
  std::array<double, 2> velocity{};            // velocity subtracted
  std::vector<std::string> warnings;
};

// Largest time the estimators accept: N_min / (4 max(1, |v| + 1)).
double wraparound_horizon(const TorusGeometry& geometry, std::array<double, 2> velocity);

// D_ij(t) = (1/t)(1/2chi)[sum_x x_i x_j S(x,t) - chi v_i v_j t^2]; v = 0 at rho = 1/2.
DiffusivitySeries estimate_diffusivity(const StructureStatistics& stats);

// Same quantity through the integrated current: 2 chi t D_ij = E[(J_i - E[J_i|K])(J_j - E[J_j|K])] / N,
// with the exact conditional mean E[J|K] = m t K(N-K)/(N-1). Removing the particle-number mode
// plays the role of the chi v v t^2 subtraction. Far lower variance than the S_hat moments.
DiffusivitySeries estimate_diffusivity_from_current(const StructureStatistics& stats);

struct SpreadPoint {
  double t;
  double value;
  double stderr;
  // Variance of the integrated current across one bond, translation-averaged. Equals
  // sum_x |x| S(x,t) when v = 0 and has far smaller replica noise.
  double bond_variance;
  double bond_stderr;
};

// sum_x |x| S(x,t) per observation time (d = 1).
std::vector<SpreadPoint> estimate_current_spread(const StructureStatistics& stats);

// Integrated currents J_b(t) across every bond (b, b+1) of a d = 1 torus, reconstructed
// from the two snapshots and the total current by continuity: J_{b-1} - J_b = eta_b(t) - eta_b(0).
std::vector<double> bond_currents(const Configuration& initial, const Configuration& later, double total_current);

}  // namespace asep
