#include "asep/kmc.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "asep/error.hpp"

namespace asep {

KmcSimulator::KmcSimulator(TorusGeometry geometry, JumpLaw law, Configuration initial)
    : geometry_(geometry), law_(std::move(law)), config_(std::move(initial)) {
  require(config_.sites() == geometry_.sites(), "kmc: configuration size does not match torus");
  require(law_.dimension() == geometry_.dimension(), "kmc: jump law dimension does not match torus");
  const int n = geometry_.sites();
  const auto types = law_.entries().size();
  active_.assign(types, {});
  position_.assign(types, std::vector<int>(n, -1));
  targets_.resize(types * n);
  for (std::size_t k = 0; k < types; ++k)
    for (int x = 0; x < n; ++x) targets_[k * n + x] = geometry_.shift(x, law_.entries()[k].displacement);
  for (std::size_t k = 0; k < types; ++k)
    for (int x = 0; x < n; ++x) refresh_bond(static_cast<int>(k), x);
}

double KmcSimulator::total_rate() const {
  double r = 0.0;
  for (std::size_t k = 0; k < active_.size(); ++k) r += law_.entries()[k].rate * static_cast<double>(active_[k].size());
  return r;
}

void KmcSimulator::refresh_bond(int type, int source) {
  const int n = geometry_.sites();
  const int target = targets_[static_cast<std::size_t>(type) * n + source];
  const bool admissible = config_.occupied(source) && !config_.occupied(target);
  auto& list = active_[type];
  auto& pos = position_[type];
  if (admissible && pos[source] < 0) {
    pos[source] = static_cast<int>(list.size());
    list.push_back(source);
  } else if (!admissible && pos[source] >= 0) {
    int idx = pos[source];
    int last = list.back();
    list[idx] = last;
    pos[last] = idx;
    list.pop_back();
    pos[source] = -1;
  }
}

void KmcSimulator::refresh_around(int site) {
  for (std::size_t k = 0; k < active_.size(); ++k) {
    const auto& z = law_.entries()[k].displacement;
    refresh_bond(static_cast<int>(k), site);
    refresh_bond(static_cast<int>(k), geometry_.shift(site, {-z[0], -z[1]}));
  }
}

void KmcSimulator::advance_to(double t, RngStream& rng) {
  require(t >= time_, "kmc: cannot advance backwards in time");
  const int n = geometry_.sites();
  const auto entries = law_.entries();
  for (;;) {
    const double rate = total_rate();
    if (rate <= 0.0) break;
    const double dt = rng.exponential(rate);
    if (time_ + dt > t) break;
    time_ += dt;

    double u = rng.uniform() * rate;
    std::size_t k = 0;
    for (; k + 1 < active_.size(); ++k) {
      const double w = entries[k].rate * static_cast<double>(active_[k].size());
      if (u < w) break;
      u -= w;
    }
    while (active_[k].empty()) --k;  // guards the last-bucket rounding case
    const int x = active_[k][rng.below(active_[k].size())];
    const int y = targets_[k * n + x];
    config_.exchange(x, y);
    current_[0] += entries[k].displacement[0];
    current_[1] += entries[k].displacement[1];
    ++events_;
    refresh_around(x);
    refresh_around(y);
  }
  time_ = t;
}

namespace {

Configuration sample_canonical(const TorusGeometry& geometry, double density, RngStream& rng) {
  require(density > 0.0 && density < 1.0, "density must lie in (0,1)");
  const int n = geometry.sites();
  const int k = static_cast<int>(std::lround(density * n));
  std::vector<int> sites(n);
  std::iota(sites.begin(), sites.end(), 0);
  Configuration c(n);
  for (int i = 0; i < k; ++i) {
    auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(sites[i], sites[j]);
    c.set(sites[i], true);
  }
  return c;
}

void validate(const SimulationParams& p) {
  require(p.geometry.admits(p.law), "simulation: torus sides must be >= 2L+2 and match the jump law dimension");
  require(p.density > 0.0 && p.density < 1.0, "simulation: density must lie in (0,1)");
  require(!p.times.empty(), "simulation: no observation times");
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    require(p.times[i] > 0.0 && std::isfinite(p.times[i]), "simulation: observation times must be positive");
    if (i > 0) require(p.times[i] > p.times[i - 1], "simulation: observation times must increase");
  }
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Bits [offset, offset+64) of a bit buffer padded by at least one word.
inline std::uint64_t window64(const std::vector<std::uint64_t>& buf, std::size_t offset) {
  std::size_t w = offset >> 6, b = offset & 63;
  if (b == 0) return buf[w];
  return (buf[w] >> b) | (buf[w + 1] << (64 - b));
}

std::vector<std::uint64_t> row_bits(const Configuration& c, int row, int len, int copies) {
  std::vector<std::uint64_t> out((static_cast<std::size_t>(len) * copies + 63) / 64 + 2, 0);
  for (int rep = 0; rep < copies; ++rep)
    for (int a = 0; a < len; ++a)
      if (c.occupied(a + len * row)) {
        std::size_t bit = static_cast<std::size_t>(rep) * len + a;
        out[bit >> 6] |= std::uint64_t{1} << (bit & 63);
      }
  return out;
}

// C(z) = sum_y a_y b_{y+z} for every torus displacement z (indexed by site).
std::vector<long long> cross_correlation(const TorusGeometry& g, const Configuration& a, const Configuration& b) {
  const int n1 = g.side(0), n2 = g.side(1);
  const int words = (n1 + 63) / 64;
  std::vector<std::vector<std::uint64_t>> arows, brows;
  for (int r = 0; r < n2; ++r) {
    arows.push_back(row_bits(a, r, n1, 1));
    brows.push_back(row_bits(b, r, n1, 2));
  }
  const std::uint64_t tail_mask = (n1 % 64 == 0) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (n1 % 64)) - 1);
  std::vector<long long> out(static_cast<std::size_t>(n1) * n2, 0);
  for (int z2 = 0; z2 < n2; ++z2)
    for (int z1 = 0; z1 < n1; ++z1) {
      long long s = 0;
      for (int r = 0; r < n2; ++r) {
        const auto& ar = arows[r];
        const auto& br = brows[(r + z2) % n2];
        for (int j = 0; j < words; ++j) {
          std::uint64_t m = ar[j] & window64(br, static_cast<std::size_t>(64) * j + z1);
          if (j == words - 1) m &= tail_mask;
          s += std::popcount(m);
        }
      }
      out[z1 + static_cast<std::size_t>(n1) * z2] = s;
    }
  return out;
}

// Mean current through one bond per unit time, exact for the initial ensemble.
double expected_bond_current(const SimulationParams& p, int particles) {
  const double n = p.geometry.sites();
  const double pair = p.ensemble == InitialEnsemble::Canonical ? particles * (n - particles) / (n * (n - 1))
                                                               : p.density * (1.0 - p.density);
  return p.law.mean()[0] * pair;
}

}  // namespace

std::vector<double> bond_currents(const Configuration& initial, const Configuration& later, double total_current) {
  const int n = initial.sites();
  require(later.sites() == n, "bond currents: size mismatch");
  std::vector<double> j(n);
  double offset = 0.0, acc = 0.0;
  for (int b = 0; b < n; ++b) {
    if (b > 0) acc += static_cast<double>(initial.occupied(b)) - static_cast<double>(later.occupied(b));
    j[b] = acc;  // J_b - J_0
    offset += acc;
  }
  const double j0 = (total_current - offset) / n;
  for (double& v : j) v += j0;
  return j;
}

TrajectoryRecord run_trajectory(const SimulationParams& params, RngStream& rng) {
  validate(params);
  TrajectoryRecord rec;
  rec.initial = params.ensemble == InitialEnsemble::Bernoulli ? sample_bernoulli(params.geometry, params.density, rng)
                                                              : sample_canonical(params.geometry, params.density, rng);
  KmcSimulator sim(params.geometry, params.law, rec.initial);
  for (double t : params.times) {
    sim.advance_to(t, rng);
    rec.snapshots.push_back(sim.configuration());
    rec.current.push_back(sim.integrated_current());
  }
  return rec;
}

TrajectoryBatch run_batch(const SimulationParams& params, int replicas, std::uint64_t seed, int threads) {
  validate(params);
  require(replicas > 0, "simulation: replica count must be positive");
  TrajectoryBatch batch{params, seed, std::vector<TrajectoryRecord>(replicas)};
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r; (r = next.fetch_add(1)) < replicas;) {
      RngStream rng(seed, static_cast<std::uint64_t>(r));
      batch.replicas[r] = run_trajectory(params, rng);
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(resolve_threads(threads), replicas);
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return batch;
}

std::vector<double> replica_structure_function(const TorusGeometry& geometry, const Configuration& initial,
                                               const Configuration& later) {
  const auto c0 = cross_correlation(geometry, initial, initial);
  const auto ct = cross_correlation(geometry, initial, later);
  const double inv = 1.0 / geometry.sites();
  std::vector<double> s(c0.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(ct[i] - c0[i]) * inv;
  return s;
}

StructureStatistics::StructureStatistics(const SimulationParams& params)
    : params_(params),
      sum_(params.times.size(), std::vector<double>(params.geometry.sites(), 0.0)),
      sumsq_(params.times.size(), std::vector<double>(params.geometry.sites(), 0.0)) {}

void StructureStatistics::add(const TrajectoryRecord& record) {
  const auto& g = params_.geometry;
  require(record.snapshots.size() == params_.times.size(), "statistics: snapshot count mismatch");
  std::vector<ReplicaMoments> per_time(params_.times.size());
  for (std::size_t k = 0; k < params_.times.size(); ++k) {
    const auto s = replica_structure_function(g, record.initial, record.snapshots[k]);
    ReplicaMoments m;
    for (int site = 0; site < g.sites(); ++site) {
      const double v = s[site];
      sum_[k][site] += v;
      sumsq_[k][site] += v * v;
      if (v == 0.0) continue;
      const Vec2i z = g.minimal_image(g.coords(site));
      for (int i = 0; i < 2; ++i) {
        // the antipodal shell x_i = N_i/2 has no sign; it is left out of first moments
        const bool antipodal = g.side(i) % 2 == 0 && z[i] == g.side(i) / 2;
        if (!antipodal) m.first[i] += z[i] * v;
        for (int j = 0; j < 2; ++j) m.second[i][j] += static_cast<double>(z[i]) * z[j] * v;
      }
      m.abs_first += (std::abs(z[0]) + std::abs(z[1])) * v;
    }
    if (g.dimension() == 1) {
      const auto jb = bond_currents(record.initial, record.snapshots[k], record.current[k][0]);
      const double expected = expected_bond_current(params_, record.initial.particles()) * params_.times[k];
      for (double j : jb) m.bond_current_sq += (j - expected) * (j - expected);
      m.bond_current_sq /= g.sites();
    }
    m.current = record.current[k];
    m.density = static_cast<double>(record.initial.particles()) / g.sites();
    per_time[k] = m;
  }
  moments_.push_back(std::move(per_time));
  ++replicas_;
}

void StructureStatistics::merge(const StructureStatistics& other) {
  require(other.params_.times == params_.times && other.params_.geometry.sites() == params_.geometry.sites(),
          "statistics: cannot merge incompatible runs");
  for (std::size_t k = 0; k < sum_.size(); ++k)
    for (std::size_t i = 0; i < sum_[k].size(); ++i) {
      sum_[k][i] += other.sum_[k][i];
      sumsq_[k][i] += other.sumsq_[k][i];
    }
  moments_.insert(moments_.end(), other.moments_.begin(), other.moments_.end());
  replicas_ += other.replicas_;
}

double StructureStatistics::mean(std::size_t k, int site) const { return sum_[k][site] / replicas_; }

double StructureStatistics::stderr_of_mean(std::size_t k, int site) const {
  if (replicas_ < 2) return 0.0;
  const double m = mean(k, site);
  const double var = std::max(0.0, (sumsq_[k][site] - replicas_ * m * m) / (replicas_ - 1));
  return std::sqrt(var / replicas_);
}

StructureStatistics simulate_statistics(const SimulationParams& params, int replicas, std::uint64_t seed, int threads) {
  validate(params);
  require(replicas > 0, "simulation: replica count must be positive");
  constexpr int kBlock = 8;
  const int blocks = (replicas + kBlock - 1) / kBlock;
  StructureStatistics total(params);
  std::map<int, StructureStatistics> finished;
  int next_merge = 0;
  std::mutex mu;
  std::atomic<int> next{0};
  std::exception_ptr error;

  auto worker = [&] {
    try {
      for (int b; (b = next.fetch_add(1)) < blocks;) {
        StructureStatistics part(params);
        for (int r = b * kBlock; r < std::min(replicas, (b + 1) * kBlock); ++r) {
          RngStream rng(seed, static_cast<std::uint64_t>(r));
          part.add(run_trajectory(params, rng));
        }
        std::lock_guard lock(mu);
        finished.emplace(b, std::move(part));
        // merge strictly in block order so the floating-point sums are thread-count independent
        for (auto it = finished.find(next_merge); it != finished.end(); it = finished.find(next_merge)) {
          total.merge(it->second);
          finished.erase(it);
          ++next_merge;
        }
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(resolve_threads(threads), blocks);
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return total;
}

StructureStatistics reduce_batch(const TrajectoryBatch& batch) {
  StructureStatistics stats(batch.params);
  for (const auto& r : batch.replicas) stats.add(r);
  return stats;
}

std::vector<StructureRow> estimate_structure_function(const StructureStatistics& stats, bool include_zero_time) {
  require(stats.replicas() > 0, "estimator: empty batch");
  const auto& g = stats.params().geometry;
  std::vector<std::pair<Vec2i, int>> order;
  for (int site = 0; site < g.sites(); ++site) order.emplace_back(g.minimal_image(g.coords(site)), site);
  std::sort(order.begin(), order.end());
  std::vector<StructureRow> rows;
  if (include_zero_time)
    for (const auto& [x, site] : order) rows.push_back({0.0, x, 0.0, 0.0});
  for (std::size_t k = 0; k < stats.time_count(); ++k)
    for (const auto& [x, site] : order)
      rows.push_back({stats.params().times[k], x, stats.mean(k, site), stats.stderr_of_mean(k, site)});
  return rows;
}

namespace {

struct MeanErr {
  double mean = 0.0;
  double stderr = 0.0;
};

MeanErr mean_err(const std::vector<double>& xs) {
  MeanErr out;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr = std::sqrt(ss / (n - 1) / n);
  }
  return out;
}

double compressibility(double rho) { return rho * (1.0 - rho); }

int min_side(const TorusGeometry& g) { return g.dimension() == 1 ? g.side(0) : std::min(g.side(0), g.side(1)); }

}  // namespace

VelocityEstimate estimate_velocity(const StructureStatistics& stats) {
  require(stats.replicas() > 0, "estimator: empty batch");
  const auto& p = stats.params();
  const double chi = compressibility(p.density);
  const int d = p.geometry.dimension();
  VelocityEstimate out;
  out.times = p.times;
  std::array<std::vector<double>, 2> per_replica;
  for (const auto& reps : stats.moments()) {
    for (int i = 0; i < 2; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < p.times.size(); ++k) acc += reps[k].first[i] / (chi * p.times[k]);
      per_replica[i].push_back(acc / static_cast<double>(p.times.size()));
    }
  }
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    std::array<double, 2> v{};
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (const auto& reps : stats.moments()) acc += reps[k].first[i];
      v[i] = acc / stats.replicas() / (chi * p.times[k]);
    }
    out.per_time.push_back(v);
  }
  for (int i = 0; i < d; ++i) {
    auto me = mean_err(per_replica[i]);
    out.value[i] = me.mean;
    out.stderr[i] = me.stderr;
  }
  const double speed = std::hypot(out.value[0], out.value[1]);
  if (speed * p.times.back() > min_side(p.geometry) / 4.0) {
    std::ostringstream msg;
    msg << "correlation front v*t = " << speed * p.times.back() << " exceeds N/4 = " << min_side(p.geometry) / 4.0;
    out.warnings.push_back(msg.str());
  }
  return out;
}

double wraparound_horizon(const TorusGeometry& geometry, std::array<double, 2> velocity) {
  const double speed = std::hypot(velocity[0], velocity[1]);
  return min_side(geometry) / (4.0 * std::max(1.0, speed + 1.0));
}

namespace {

std::array<double, 2> drift_for(const StructureStatistics& stats, std::vector<std::string>& warnings) {
  if (stats.params().density == 0.5) return {0.0, 0.0};
  auto v = estimate_velocity(stats);
  warnings.insert(warnings.end(), v.warnings.begin(), v.warnings.end());
  return v.value;
}

}  // namespace

DiffusivitySeries estimate_diffusivity(const StructureStatistics& stats) {
  require(stats.replicas() > 0, "estimator: empty batch");
  const auto& p = stats.params();
  const double chi = compressibility(p.density);
  const int d = p.geometry.dimension();
  DiffusivitySeries out;
  out.velocity = drift_for(stats, out.warnings);
  const double horizon = wraparound_horizon(p.geometry, out.velocity);
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const double t = p.times[k];
    if (t > horizon) {
      out.refused_times.push_back(t);
      continue;
    }
    DiffusivityEstimate e;
    e.t = t;
    e.replicas = stats.replicas();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        std::vector<double> vals;
        vals.reserve(stats.moments().size());
        for (const auto& reps : stats.moments())
          vals.push_back((reps[k].second[i][j] - chi * out.velocity[i] * out.velocity[j] * t * t) / (2.0 * chi * t));
        auto me = mean_err(vals);
        e.value[i][j] = me.mean;
        e.stderr[i][j] = me.stderr;
      }
    out.estimates.push_back(e);
  }
  if (!out.refused_times.empty()) {
    std::ostringstream msg;
    msg << out.refused_times.size() << " observation time(s) beyond wrap-around horizon " << horizon << " refused";
    out.warnings.push_back(msg.str());
  }
  return out;
}

DiffusivitySeries estimate_diffusivity_from_current(const StructureStatistics& stats) {
  require(stats.replicas() > 1, "estimator: need at least two replicas for a current variance");
  const auto& p = stats.params();
  const double chi = compressibility(p.density);
  const int d = p.geometry.dimension();
  const double n = p.geometry.sites();
  const auto m = p.law.mean();
  DiffusivitySeries out;
  out.velocity = {m[0] * (1.0 - 2.0 * p.density), m[1] * (1.0 - 2.0 * p.density)};
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const double t = p.times[k];
    DiffusivityEstimate e;
    e.t = t;
    e.replicas = stats.replicas();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        std::vector<double> q;
        q.reserve(stats.moments().size());
        for (const auto& reps : stats.moments()) {
          const double kk = reps[k].density * n;
          const double pair = t * kk * (n - kk) / (n - 1.0);
          q.push_back((reps[k].current[i] - m[i] * pair) * (reps[k].current[j] - m[j] * pair) / (2.0 * chi * t * n));
        }
        auto me = mean_err(q);
        e.value[i][j] = me.mean;
        e.stderr[i][j] = me.stderr;
      }
    out.estimates.push_back(e);
  }
  return out;
}

VelocityEstimate estimate_velocity_from_current(const StructureStatistics& stats) {
  const auto& p = stats.params();
  require(p.ensemble == InitialEnsemble::Bernoulli, "velocity from current: needs particle-number fluctuations (Bernoulli ensemble)");
  require(stats.replicas() > 2, "velocity from current: need at least three replicas");
  const double n = p.geometry.sites();
  const int d = p.geometry.dimension();
  const double r = stats.replicas();
  VelocityEstimate out;
  out.times = p.times;

  // OLS slope of y on K; v = slope (N-1)/N since dE[J|K]/dK = t m (N - 2K)/(N-1).
  auto slope = [&](auto&& y) -> MeanErr {
    double mk = 0.0, my = 0.0;
    for (const auto& reps : stats.moments()) {
      mk += reps[0].density * n / r;
      my += y(reps) / r;
    }
    double sxx = 0.0, sxy = 0.0;
    for (const auto& reps : stats.moments()) {
      const double dk = reps[0].density * n - mk;
      sxx += dk * dk;
      sxy += dk * (y(reps) - my);
    }
    require(sxx > 0.0, "velocity from current: particle number did not fluctuate");
    const double b = sxy / sxx;
    double rss = 0.0;
    for (const auto& reps : stats.moments()) {
      const double res = y(reps) - my - b * (reps[0].density * n - mk);
      rss += res * res;
    }
    const double scale = (n - 1.0) / n;
    return {b * scale, std::sqrt(rss / (r - 2.0) / sxx) * scale};
  };

  for (std::size_t k = 0; k < p.times.size(); ++k) {
    std::array<double, 2> v{};
    for (int i = 0; i < d; ++i)
      v[i] = slope([&](const std::vector<ReplicaMoments>& reps) { return reps[k].current[i] / p.times[k]; }).mean;
    out.per_time.push_back(v);
  }
  for (int i = 0; i < d; ++i) {
    auto me = slope([&](const std::vector<ReplicaMoments>& reps) {
      double acc = 0.0;
      for (std::size_t k = 0; k < p.times.size(); ++k) acc += reps[k].current[i] / p.times[k];
      return acc / static_cast<double>(p.times.size());
    });
    out.value[i] = me.mean;
    out.stderr[i] = me.stderr;
  }
  return out;
}

std::vector<SpreadPoint> estimate_current_spread(const StructureStatistics& stats) {
  require(stats.params().geometry.dimension() == 1, "current spread: d = 1 only");
  require(stats.replicas() > 0, "estimator: empty batch");
  std::vector<SpreadPoint> out;
  const auto& p = stats.params();
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    std::vector<double> vals, bonds;
    for (const auto& reps : stats.moments()) {
      vals.push_back(reps[k].abs_first);
      bonds.push_back(reps[k].bond_current_sq);
    }
    auto me = mean_err(vals);
    auto be = mean_err(bonds);
    out.push_back({p.times[k], me.mean, me.stderr, be.mean, be.stderr});
  }
  return out;
}

}  // namespace asep
