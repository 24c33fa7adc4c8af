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

#ifndef DTF_CHI_SQUARED_HPP_
#define DTF_CHI_SQUARED_HPP_

namespace dtf
{

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
/// Series expansion for x < a + 1, Lentz continued fraction otherwise.
double regularized_gamma_lower(double a, double x);

/// Chi-squared CDF with `dof` degrees of freedom: P(dof/2, x/2).
double chi_squared_cdf(double x, int dof);

/// Chi-squared percent point function (inverse CDF), found by bisection
/// on the regularized incomplete gamma. `p` in (0, 1).
double chi_squared_ppf(double p, int dof);

/// Radius of the sphere containing `rho_percent`% of standard-normal
/// mass in `dz` dimensions: sqrt(chi_squared_ppf(rho/100, dz)).
double sphere_radius(double rho_percent, int dz);

}  // namespace dtf

#endif  // DTF_CHI_SQUARED_HPP_
