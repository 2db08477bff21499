#include "asep/fourier.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "asep/error.hpp"

namespace asep {
namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double gauss20(const F& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

// Dyadic breakpoints hi, hi/2, ... down to the first one below `smallest`, then 0 (ascending).
std::vector<double> dyadic_ladder(double hi, double smallest) {
  std::vector<double> x{hi};
  while (x.back() > smallest) x.push_back(x.back() / 2);
  x.push_back(0.0);
  std::reverse(x.begin(), x.end());
  return x;
}

std::vector<double> halved(const std::vector<double>& x) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    out.push_back(x[i]);
    out.push_back(0.5 * (x[i] + x[i + 1]));
  }
  out.push_back(x.back());
  return out;
}

std::vector<double> merged(std::vector<double> x, const std::vector<double>& extra) {
  const double lo = x.front(), hi = x.back();
  for (double e : extra)
    if (e > lo && e < hi) x.push_back(e);
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }), x.end());
  return x;
}

// Cells summed in order, so results do not depend on scheduling.
template <class F>
double integrate_cells(const F& f, const std::vector<double>& x) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) total += gauss20(f, x[i], x[i + 1]);
  return total;
}

// Symmetric ladder on [-hi, hi] refined toward 0.
std::vector<double> two_sided_ladder(double hi, double smallest) {
  auto pos = dyadic_ladder(hi, smallest);
  std::vector<double> out;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    if (*it > 0) out.push_back(-*it);
  out.insert(out.end(), pos.begin(), pos.end());
  return out;
}

// xi >= 0 with omega(xi) = target, if any.
std::vector<double> level_crossing(double target) {
  if (target <= 0.0 || target >= 4.0) return {};
  return {std::acos(1.0 - target / 2.0)};
}

// 2 - 2 cos x without cancellation at small x
double omega1(double x) {
  const double s = std::sin(0.5 * x);
  return 4.0 * s * s;
}

void require_dimension(int d) { require(d == 1 || d == 2, "fourier: dimension must be 1 or 2"); }

}  // namespace

double dispersion_omega(const Momentum& p, int dimension) {
  require_dimension(dimension);
  double w = 0.0;
  for (int i = 0; i < dimension; ++i) w += omega1(p[static_cast<std::size_t>(i)]);
  return w;
}

double bubble_kernel(const Momentum& u, double lambda, int dimension) {
  require_dimension(dimension);
  require(lambda > 0.0, "bubble kernel: lambda must be positive");
  const double box = 0.125;
  double uu = u[0] * u[0];
  if (dimension == 2) uu += u[1] * u[1];
  const double a = lambda + 3.0 * uu;  // |u+v|^2 + |u-v|^2 = 2|u|^2 + 2|v|^2
  const auto ladder = dyadic_ladder(box, std::sqrt(a) / 64);
  if (dimension == 1) return 2.0 * integrate_cells([&](double v) { return 1.0 / (a + 2.0 * v * v); }, ladder);
  // the inner coordinate is integrated in closed form
  auto inner = [&](double v1) {
    const double c = a + 2.0 * v1 * v1;
    return std::atan(box * std::sqrt(2.0 / c)) / std::sqrt(2.0 * c);
  };
  return 4.0 * integrate_cells(inner, ladder);
}

namespace {

double lower_d1(double lambda, const std::vector<double>& x) {
  auto f = [&](double xi) {
    const double w = omega1(xi);
    return 1.0 / (lambda + w / std::sqrt(lambda + w));
  };
  return 2.0 * integrate_cells(f, x);
}

double lower_d2(double lambda, const std::vector<double>& x, bool refine) {
  auto outer = [&](double eta) {
    const double we = omega1(eta);
    auto f = [&](double xi) {
      const double wx = omega1(xi);
      const double s = lambda + we + wx;
      return 1.0 / (s + wx * std::abs(std::log(s)));
    };
    auto cells = merged(x, level_crossing(1.0 - lambda - we));
    return integrate_cells(f, refine ? halved(cells) : cells);
  };
  return 4.0 * integrate_cells(outer, x);
}

}  // namespace

QuadratureResult degree3_lower_integral(double lambda, int dimension, double tolerance) {
  require_dimension(dimension);
  require(lambda > 0.0, "degree-3 integral: lambda must be positive");
  require(tolerance > 0.0 && tolerance < 1.0, "degree-3 integral: tolerance must lie in (0, 1)");
  QuadratureResult r;
  if (dimension == 1) {
    const auto x = dyadic_ladder(kPi, std::min(std::pow(lambda, 0.75), std::sqrt(lambda)) / 64);
    r.value = lower_d1(lambda, x);
    r.refined = lower_d1(lambda, halved(x));
  } else {
    auto x = merged(dyadic_ladder(kPi, std::sqrt(lambda) / 64), level_crossing(1.0 - lambda));
    r.value = lower_d2(lambda, x, false);
    r.refined = lower_d2(lambda, halved(x), true);
  }
  r.relative_change = std::abs(r.refined - r.value) / std::abs(r.refined);
  if (!(r.relative_change < tolerance))
    fail(ErrorKind::Compute, "degree-3 integral: mesh refinement changed the value by " + std::to_string(r.relative_change));
  r.value = r.refined;
  return r;
}

namespace {

UpperForm upper_form(const FourierProfile& fhat, double lambda, int d, const std::vector<double>& grid_breaks) {
  require_dimension(d);
  require(lambda > 0.0, "degree-3 upper form: lambda must be positive");
  auto f2 = [&](const Momentum& u) { return std::norm(fhat(u)); };
  const auto full = merged(two_sided_ladder(kPi, std::sqrt(lambda) / 64), grid_breaks);
  const auto box = two_sided_ladder(0.125, std::sqrt(lambda) / 64);
  UpperForm out;
  if (d == 1) {
    out.rhs = integrate_cells(
        [&](double u) {
          const double w = omega1(u);
          return w / std::sqrt(lambda + w) * f2({u, 0.0});
        },
        full);
    out.lhs = integrate_cells(
        [&](double u) { return (omega1(u)) * f2({u, 0.0}) * bubble_kernel({u, 0.0}, lambda, 1); }, box);
    return out;
  }
  out.rhs = integrate_cells(
      [&](double u2) {
        const double w2 = omega1(u2);
        auto cells = merged(full, level_crossing(1.0 - lambda - w2));
        for (double c : level_crossing(1.0 - lambda - w2)) cells = merged(cells, {-c});
        return integrate_cells(
            [&](double u1) {
              const double w1 = omega1(u1);
              return w1 * std::abs(std::log(lambda + w1 + w2)) * f2({u1, u2});
            },
            cells);
      },
      full);
  out.lhs = integrate_cells(
      [&](double u2) {
        return integrate_cells(
            [&](double u1) {
              const Momentum u{u1, u2};
              const double w1 = omega1(u1);
              return w1 == 0.0 ? 0.0 : w1 * f2(u) * bubble_kernel(u, lambda, 2);
            },
            box);
      },
      box);
  return out;
}

}  // namespace

UpperForm degree3_upper_form(const FourierProfile& fhat, double lambda, int dimension) {
  return upper_form(fhat, lambda, dimension, {});
}

UpperForm degree3_upper_form(const std::vector<std::complex<double>>& samples, int n, double lambda, int dimension) {
  require_dimension(dimension);
  require(n >= 8 && n % 2 == 0, "degree-3 upper form: grid too coarse (need an even number >= 8 of points per axis)");
  const std::size_t expected = dimension == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  require(samples.size() == expected, "degree-3 upper form: sample count does not match the grid");
  auto interpolant = [&samples, dimension](int m, int stride) {
    return [&samples, dimension, m, stride](const Momentum& u) {
      auto locate = [m](double x, int& i0, double& t) {
        double s = (x + kPi) / (2 * kPi) * m;
        s -= std::floor(s / m) * m;
        i0 = std::min(static_cast<int>(s), m - 1);
        t = s - i0;
      };
      const int n_full = m * stride;
      auto at = [&](int i, int j) {
        i = ((i % m) + m) % m;
        j = ((j % m) + m) % m;
        return samples[static_cast<std::size_t>(i * stride) + static_cast<std::size_t>(j * stride) * static_cast<std::size_t>(dimension == 2 ? n_full : 0)];
      };
      int i = 0, j = 0;
      double s = 0.0, t = 0.0;
      locate(u[0], i, s);
      if (dimension == 1) return (1 - s) * at(i, 0) + s * at(i + 1, 0);
      locate(u[1], j, t);
      return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) + s * t * at(i + 1, j + 1);
    };
  };
  auto breaks = [](int m) {
    std::vector<double> b;
    for (int k = 0; k <= m; ++k) b.push_back(-kPi + 2 * kPi * k / m);
    return b;
  };
  const auto full = upper_form(interpolant(n, 1), lambda, dimension, breaks(n));
  const auto coarse = upper_form(interpolant(n / 2, 2), lambda, dimension, breaks(n / 2));
  const double scale = std::max(std::abs(full.rhs), 1e-300);
  if (std::abs(full.rhs - coarse.rhs) > 1e-2 * scale)
    fail(ErrorKind::InvalidArgument, "degree-3 upper form: grid too coarse (halving it moves the result by more than 1%)");
  return full;
}

ScalingFit fit_scaling(const ScalingSeries& s, ScalingModel model) {
  const std::size_t n = s.lambda.size();
  require(n == s.value.size(), "fit: lambda and value lengths differ");
  require(n >= 5, "fit: at least 5 points are required");
  for (std::size_t i = 0; i < n; ++i) {
    require(s.lambda[i] > 0.0 && s.value[i] > 0.0, "fit: lambda and values must be positive");
    if (i > 0) require(s.lambda[i] < s.lambda[i - 1], "fit: lambda must be strictly decreasing");
    if (model == ScalingModel::LogPower) require(s.lambda[i] < 1.0, "fit: log-power model needs lambda < 1");
  }
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = model == ScalingModel::Power ? std::log(s.lambda[i]) : std::log(std::abs(std::log(s.lambda[i])));
    y[i] = std::log(s.value[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "fit: zero variance in the abscissa");
  ScalingFit f;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.exponent * x[i]);
    f.residuals.push_back(r);
    rss += r * r;
  }
  f.residual_norm = std::sqrt(rss);
  f.stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  return f;
}

std::vector<double> log_grid(double hi, double lo, int n) {
  require(hi > lo && lo > 0.0 && n >= 2, "log grid: need hi > lo > 0 and n >= 2");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(hi * std::pow(lo / hi, static_cast<double>(i) / (n - 1)));
  return out;
}

}  // namespace asep
