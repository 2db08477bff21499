#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace asep {

using Momentum = std::array<double, 2>;  // second component ignored when d = 1

// omega(p) = sum_i (2 - 2 cos p_i).
double dispersion_omega(const Momentum& p, int dimension);

// B(u, lambda) = int_{|v_i| <= 1/8} dv / (lambda + |u+v|^2 + |u-v|^2 + |u|^2).
double bubble_kernel(const Momentum& u, double lambda, int dimension);

struct QuadratureResult {
  double value = 0.0;
  double refined = 0.0;         // same integral with every cell halved
  double relative_change = 0.0;
};

// d = 1: int dxi / (lambda + omega(xi) (lambda + omega(xi))^{-1/2}) over [-pi, pi).
// d = 2: int dxi deta / (lambda + omega(eta) + omega(xi) + omega(xi) |log(lambda + omega(eta) + omega(xi))|).
// Throws when the refined mesh moves the value by `tolerance` (relative) or more.
QuadratureResult degree3_lower_integral(double lambda, int dimension, double tolerance = 1e-4);

struct UpperForm {
  double rhs = 0.0;  // d=1: int omega (lambda+omega)^{-1/2} |F|^2; d=2: int omega(u_1) |log(lambda+omega)| |F|^2
  double lhs = 0.0;  // int_{|u_i| <= 1/8} omega(u_1) |F|^2 B(u, lambda), the bubble-factorised left side
};

using FourierProfile = std::function<std::complex<double>(const Momentum&)>;

// Both functionals of the degree-three upper bound for F-hat restricted to the zero-sum line.
UpperForm degree3_upper_form(const FourierProfile& fhat, double lambda, int dimension);
// F-hat sampled on the periodic grid u_j = -pi + 2 pi j / n (n^d values, first index fastest);
// values in between are interpolated linearly. Throws if the grid is too coarse to resolve |F|^2.
UpperForm degree3_upper_form(const std::vector<std::complex<double>>& samples, int n, double lambda, int dimension);

enum class ScalingModel {
  Power,     // value ~ lambda^a
  LogPower,  // value ~ |log lambda|^b
};

struct ScalingSeries {
  std::vector<double> lambda;  // strictly decreasing, positive
  std::vector<double> value;
};

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double stderr = 0.0;  // standard error of the exponent
  double residual_norm = 0.0;
  std::vector<double> residuals;
};

// Least squares of log value against log lambda (Power) or log |log lambda| (LogPower).
ScalingFit fit_scaling(const ScalingSeries& series, ScalingModel model);

// n points log-spaced from hi down to lo.
std::vector<double> log_grid(double hi, double lo, int n);

}  // namespace asep
