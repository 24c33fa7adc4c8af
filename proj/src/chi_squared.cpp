// Copyright 2026 The dtf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dtf/chi_squared.hpp"

#include <cmath>
#include <limits>

#include "dtf/common.hpp"

namespace dtf
{

namespace
{

constexpr int kMaxIterations = 500;
constexpr double kEps = 1e-15;

// Series representation: P(a,x) = x^a e^-x / Gamma(a) * sum_n x^n / (a(a+1)..(a+n)).
double gamma_p_series(double a, double x)
{
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      break;
    }
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x) = 1 - P(a,x).
double gamma_q_continued_fraction(double a, double x)
{
  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) {
      d = tiny;
    }
    c = b + an / c;
    if (std::abs(c) < tiny) {
      c = tiny;
    }
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      break;
    }
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_lower(double a, double x)
{
  if (a <= 0.0) {
    throw ConfigError("regularized_gamma_lower: a must be positive");
  }
  if (x < 0.0) {
    throw ConfigError("regularized_gamma_lower: x must be non-negative");
  }
  if (x == 0.0) {
    return 0.0;
  }
  if (x < a + 1.0) {
    return gamma_p_series(a, x);
  }
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_squared_cdf(double x, int dof)
{
  if (dof <= 0) {
    throw ConfigError("chi_squared_cdf: dof must be positive");
  }
  if (x <= 0.0) {
    return 0.0;
  }
  return regularized_gamma_lower(0.5 * dof, 0.5 * x);
}

double chi_squared_ppf(double p, int dof)
{
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("chi_squared_ppf: p must lie in (0, 1)");
  }
  double hi = 1.0;
  while (chi_squared_cdf(hi, dof) < p) {
    hi *= 2.0;
    if (hi > 1e9) {
      throw NumericError("chi_squared_ppf: bracketing failed");
    }
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi_squared_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double sphere_radius(double rho_percent, int dz)
{
  if (!(rho_percent > 0.0 && rho_percent < 100.0)) {
    throw ConfigError("sphere_radius: percentile must lie in (0, 100)");
  }
  return std::sqrt(chi_squared_ppf(rho_percent / 100.0, dz));
}

}  // namespace dtf
