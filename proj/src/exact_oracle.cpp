#include "asep/exact_oracle.hpp"

#include <Eigen/SparseLU>
#include <boost/math/quadrature/exp_sinh.hpp>

#include <bit>
#include <cmath>
#include <limits>

#include "asep/error.hpp"

namespace asep {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseRowMatrix from_triplets(std::size_t n, const Triplets& t) {
  SparseRowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double compressibility(double rho) { return rho * (1.0 - rho); }

void require_density(double rho) { require(rho > 0.0 && rho < 1.0, "density must lie in (0,1)"); }

double uniformization_rate(const GeneratorMatrix& gen) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < gen.rates.rows(); ++i) r = std::max(r, -gen.rates.coeff(i, i));
  return r;
}

// x e^{tA} for a row-vector system given the action y = x A. Poisson weights in log space.
template <class Apply>
Eigen::VectorXd uniformize(const Eigen::VectorXd& x0, double rate, double t, double tol, Apply&& apply) {
  if (rate <= 0.0 || t == 0.0) {
    // A has a zero diagonal block structure only when nothing moves; the series is then x0 + t x0 A + ...
    // which for a frozen system (all rates zero) is x0.
    return x0;
  }
  const double lt = rate * t;
  Eigen::VectorXd x = x0, result = Eigen::VectorXd::Zero(x0.size()), ax(x0.size());
  for (long k = 0;; ++k) {
    const double logw = -lt + k * std::log(lt) - std::lgamma(static_cast<double>(k) + 1.0);
    const double w = std::exp(logw);
    result.noalias() += w * x;
    // beyond the mode the remaining weights decay at least geometrically with ratio lt/(k+1)
    if (k > lt + 1.0) {
      const double tail = w * (k + 1.0) / (k + 1.0 - lt);
      if (tail * x.lpNorm<1>() < tol * std::max(1.0, result.lpNorm<1>())) break;
    }
    require(k < 50 * static_cast<long>(lt) + 10000, "uniformization did not converge");
    apply(x, ax);
    x += ax / rate;
  }
  return result;
}

}  // namespace

GeneratorMatrix build_generator_matrix(const TorusGeometry& geometry, const JumpLaw& law, int max_sites) {
  const int n = geometry.sites();
  require(law.dimension() == geometry.dimension(), "oracle: jump law dimension does not match torus");
  require(n <= max_sites && n <= 24, "oracle: torus too large for the 2^N state space");
  const std::size_t states = std::size_t{1} << n;
  Triplets q, dz[2], dz2[2][2];
  std::vector<double> diag(states, 0.0);
  for (std::size_t s = 0; s < states; ++s) {
    for (int x = 0; x < n; ++x) {
      if (!((s >> x) & 1u)) continue;
      for (const auto& e : law.entries()) {
        const int y = geometry.shift(x, e.displacement);
        if (y == x || ((s >> y) & 1u) || e.rate == 0.0) continue;
        const std::size_t s2 = s ^ (std::size_t{1} << x) ^ (std::size_t{1} << y);
        const auto r = static_cast<Eigen::Index>(s), c = static_cast<Eigen::Index>(s2);
        q.emplace_back(r, c, e.rate);
        diag[s] -= e.rate;
        for (int i = 0; i < 2; ++i) {
          if (e.displacement[i] != 0) dz[i].emplace_back(r, c, e.rate * e.displacement[i]);
          for (int j = 0; j < 2; ++j)
            if (e.displacement[i] * e.displacement[j] != 0)
              dz2[i][j].emplace_back(r, c, e.rate * e.displacement[i] * e.displacement[j]);
        }
      }
    }
    q.emplace_back(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s), diag[s]);
  }
  GeneratorMatrix g{geometry, law, from_triplets(states, q), {}, {}};
  for (int i = 0; i < 2; ++i) {
    g.displacement[i] = from_triplets(states, dz[i]);
    for (int j = 0; j < 2; ++j) g.displacement2[i][j] = from_triplets(states, dz2[i][j]);
  }
  return g;
}

std::vector<std::uint32_t> sector_states(const GeneratorMatrix& gen, int particles) {
  require(particles >= 0 && particles <= gen.sites(), "oracle: particle number out of range");
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < gen.states(); ++s)
    if (std::popcount(s) == particles) out.push_back(s);
  return out;
}

SparseRowMatrix sector_block(const GeneratorMatrix& gen, int particles) {
  const auto states = sector_states(gen, particles);
  std::vector<int> local(gen.states(), -1);
  for (std::size_t i = 0; i < states.size(); ++i) local[states[i]] = static_cast<int>(i);
  Triplets t;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (SparseRowMatrix::InnerIterator it(gen.rates, states[i]); it; ++it) {
      const int j = local[it.col()];
      require(j >= 0, "oracle: generator leaks out of a particle-number sector");
      t.emplace_back(static_cast<Eigen::Index>(i), j, it.value());
    }
  return from_triplets(states.size(), t);
}

Eigen::VectorXd product_measure(const GeneratorMatrix& gen, double density) {
  require_density(density);
  Eigen::VectorXd nu(gen.states());
  const int n = gen.sites();
  for (std::uint32_t s = 0; s < gen.states(); ++s) {
    const int k = std::popcount(s);
    nu[s] = std::pow(density, k) * std::pow(1.0 - density, n - k);
  }
  return nu;
}

double stationarity_residual(const GeneratorMatrix& gen, const Eigen::VectorXd& measure) {
  require(static_cast<std::size_t>(measure.size()) == gen.states(), "oracle: measure has wrong length");
  Eigen::RowVectorXd r = measure.transpose() * gen.rates;
  return r.lpNorm<Eigen::Infinity>();
}

double check_stationarity(const GeneratorMatrix& gen, double density) {
  return stationarity_residual(gen, product_measure(gen, density));
}

Eigen::VectorXd evolve_measure(const GeneratorMatrix& gen, const Eigen::VectorXd& measure, double t, double tol) {
  require(t >= 0.0, "oracle: negative time");
  return uniformize(measure, uniformization_rate(gen), t, tol, [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y = (x.transpose() * gen.rates).transpose();
  });
}

std::vector<double> exact_structure_function(const GeneratorMatrix& gen, double density, double t) {
  const auto nu = product_measure(gen, density);
  Eigen::VectorXd mu0(nu.size());
  for (std::uint32_t s = 0; s < gen.states(); ++s) mu0[s] = (s & 1u) ? nu[s] : 0.0;
  const auto mut = evolve_measure(gen, mu0, t);
  std::vector<double> out(gen.sites(), 0.0);
  for (std::uint32_t s = 0; s < gen.states(); ++s)
    for (int x = 0; x < gen.sites(); ++x)
      if ((s >> x) & 1u) out[x] += mut[s] - mu0[s];
  return out;
}

ExactCurrentMoments exact_current_moments(const GeneratorMatrix& gen, double density, double t, double tol) {
  const int d = gen.geometry.dimension();
  const Eigen::Index n = static_cast<Eigen::Index>(gen.states());
  // blocks: m0 | m1_0 .. m1_{d-1} | m2_ij (i <= j)
  std::vector<std::array<int, 2>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) pairs.push_back({i, j});
  const Eigen::Index blocks = 1 + d + static_cast<Eigen::Index>(pairs.size());
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(blocks * n);
  x0.head(n) = product_measure(gen, density);

  auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    auto blk = [&](const Eigen::VectorXd& v, Eigen::Index b) { return v.segment(b * n, n); };
    auto times = [&](const auto& v, const SparseRowMatrix& m) -> Eigen::VectorXd { return (v.transpose() * m).transpose(); };
    const Eigen::VectorXd m0 = blk(x, 0);
    y.segment(0, n) = times(m0, gen.rates);
    for (int i = 0; i < d; ++i)
      y.segment((1 + i) * n, n) = times(blk(x, 1 + i), gen.rates) + times(m0, gen.displacement[i]);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs[p];
      const Eigen::Index b = 1 + d + static_cast<Eigen::Index>(p);
      y.segment(b * n, n) = times(blk(x, b), gen.rates) + times(blk(x, 1 + i), gen.displacement[j]) +
                            times(blk(x, 1 + j), gen.displacement[i]) + times(m0, gen.displacement2[i][j]);
    }
  };
  const Eigen::VectorXd xt = uniformize(x0, uniformization_rate(gen), t, tol, apply);

  ExactCurrentMoments out;
  const int sites = gen.sites();
  std::vector<double> pk(sites + 1, 0.0);
  std::vector<std::array<double, 2>> jk(sites + 1, {0.0, 0.0});
  std::vector<std::array<std::array<double, 2>, 2>> jjk(sites + 1);
  for (std::uint32_t s = 0; s < gen.states(); ++s) {
    const int k = std::popcount(s);
    pk[k] += xt[s];
    for (int i = 0; i < d; ++i) jk[k][i] += xt[(1 + i) * n + s];
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs[p];
      const double v = xt[(1 + d + static_cast<Eigen::Index>(p)) * n + s];
      jjk[k][i][j] += v;
      if (i != j) jjk[k][j][i] += v;
    }
  }
  for (int k = 0; k <= sites; ++k)
    for (int i = 0; i < d; ++i) {
      out.mean[i] += jk[k][i];
      for (int j = 0; j < d; ++j) {
        out.second[i][j] += jjk[k][i][j];
        if (pk[k] > 0.0) out.conditional[i][j] += jjk[k][i][j] - jk[k][i] * jk[k][j] / pk[k];
      }
    }
  return out;
}

ExactDiffusivity exact_diffusivity(const GeneratorMatrix& gen, double density, double t) {
  require(t > 0.0, "oracle: diffusivity needs t > 0");
  const double chi = compressibility(density);
  const int d = gen.geometry.dimension();
  const double n = gen.sites();
  const auto m = gen.law.mean();
  const std::array<double, 2> v{m[0] * (1.0 - 2.0 * density), m[1] * (1.0 - 2.0 * density)};
  ExactDiffusivity out;
  out.t = t;

  const auto s = exact_structure_function(gen, density, t);
  for (int site = 0; site < gen.sites(); ++site) {
    const auto x = gen.geometry.minimal_image(gen.geometry.coords(site));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.structure[i][j] += static_cast<double>(x[i]) * x[j] * s[site];
  }
  const auto mom = exact_current_moments(gen, density, t);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double drift = chi * v[i] * v[j] * t * t;
      out.structure[i][j] = (out.structure[i][j] - drift) / (2.0 * chi * t);
      const double cov = mom.second[i][j] - mom.mean[i] * mom.mean[j];
      out.current[i][j] = (cov / n - drift) / (2.0 * chi * t);
      out.canonical[i][j] = mom.conditional[i][j] / n / (2.0 * chi * t);
    }
  return out;
}

XiBasis make_xi_basis(int sites, double density, int max_sites) {
  require_density(density);
  require(sites >= 1 && sites <= max_sites, "oracle: xi basis limited to small tori");
  const std::uint32_t states = 1u << sites;
  XiBasis b;
  b.sites = sites;
  b.density = density;
  for (int k = 0; k <= sites; ++k)
    for (std::uint32_t a = 0; a < states; ++a)
      if (std::popcount(a) == k) b.subsets.push_back(a);
  b.position.assign(states, -1);
  for (std::size_t i = 0; i < b.subsets.size(); ++i) b.position[b.subsets[i]] = static_cast<int>(i);
  const double sd = std::sqrt(compressibility(density));
  const double up = (1.0 - density) / sd, down = -density / sd;
  b.values.resize(states, states);
  for (std::uint32_t s = 0; s < states; ++s)
    for (std::size_t i = 0; i < b.subsets.size(); ++i) {
      double v = 1.0;
      for (std::uint32_t a = b.subsets[i]; a; a &= a - 1) v *= ((s >> std::countr_zero(a)) & 1u) ? up : down;
      b.values(s, static_cast<Eigen::Index>(i)) = v;
    }
  return b;
}

Eigen::MatrixXd xi_generator(const GeneratorMatrix& gen, const XiBasis& basis) {
  require(basis.sites == gen.sites(), "oracle: basis and generator sizes differ");
  const auto nu = product_measure(gen, basis.density);
  const Eigen::MatrixXd lx = gen.rates * basis.values;
  return basis.values.transpose() * nu.asDiagonal() * lx;
}

Eigen::VectorXd summed_current(const GeneratorMatrix& gen, double density) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(gen.states());
  for (const auto& e : gen.law.entries()) {
    const double c = e.rate * e.displacement[0];
    if (c == 0.0) continue;
    for (std::uint32_t s = 0; s < gen.states(); ++s)
      for (int x = 0; x < gen.sites(); ++x) {
        const int y = gen.geometry.shift(x, e.displacement);
        w[s] += c * (((s >> x) & 1u) - density) * (((s >> y) & 1u) - density);
      }
  }
  return w;
}

double exact_resolvent_pairing(const GeneratorMatrix& gen, double density, double lambda, std::optional<int> degree) {
  require(lambda > 0.0, "oracle: lambda must be positive");
  const auto nu = product_measure(gen, density);
  const Eigen::VectorXd w = summed_current(gen, density);
  const double n = gen.sites();
  if (!degree) {
    SparseRowMatrix a = -gen.rates;
    for (Eigen::Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += lambda;
    Eigen::SparseMatrix<double> ac = a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(ac);
    require(lu.info() == Eigen::Success, "oracle: resolvent factorisation failed");
    const Eigen::VectorXd u = lu.solve(w);
    return nu.cwiseProduct(w).dot(u) / n;
  }
  require(*degree >= 1, "oracle: degree cutoff must be >= 1");
  const auto basis = make_xi_basis(gen.sites(), density);
  const Eigen::MatrixXd m = xi_generator(gen, basis);
  const Eigen::VectorXd coef = basis.values.transpose() * nu.cwiseProduct(w);
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < basis.subsets.size(); ++i) {
    const int k = std::popcount(basis.subsets[i]);
    if (k >= 1 && k <= *degree) keep.push_back(static_cast<Eigen::Index>(i));
  }
  const auto sz = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd a(sz, sz);
  Eigen::VectorXd rhs(sz);
  for (Eigen::Index i = 0; i < sz; ++i) {
    rhs[i] = coef[keep[i]];
    for (Eigen::Index j = 0; j < sz; ++j) a(i, j) = (i == j ? lambda : 0.0) - m(keep[i], keep[j]);
  }
  const Eigen::VectorXd u = a.partialPivLu().solve(rhs);
  return rhs.dot(u) / n;
}

LaplaceCheck laplace_identity_check(const GeneratorMatrix& gen, double density, double lambda) {
  require(density == 0.5, "laplace identity: implemented at rho = 1/2");
  require(lambda > 0.0, "laplace identity: lambda must be positive");
  const double chi = compressibility(density);
  const double n = gen.sites();
  LaplaceCheck out;
  out.lambda = lambda;
  // Var J(t) grows at most quadratically, so e^{-lambda t} (1 + t^2) below 1e-18 is negligible.
  double cutoff = 1.0;
  while (std::exp(-lambda * cutoff) * (1.0 + cutoff * cutoff) > 1e-18) cutoff *= 1.25;
  auto integrand = [&](double t) {
    if (t <= 0.0 || t > cutoff) return 0.0;
    const auto mom = exact_current_moments(gen, density, t);
    const double var = mom.second[0][0] - mom.mean[0] * mom.mean[0];
    return std::exp(-lambda * t) * var / (2.0 * chi * n);  // e^{-lambda t} t D_11(t)
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double l1 = 0.0;
  out.lhs = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-10, &out.quadrature_error, &l1);
  require(out.quadrature_error <= 1e-8 * std::abs(out.lhs), "laplace identity: quadrature did not converge");
  out.pairing = exact_resolvent_pairing(gen, density, lambda);
  out.rhs = gen.law.second_moment(0, 0) / (2.0 * lambda * lambda) + out.pairing / (chi * lambda * lambda);
  out.relative_gap = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
  return out;
}

}  // namespace asep
