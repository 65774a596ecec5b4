/*
 * Copyright 2026 The dvs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Student-t distribution via the regularized incomplete beta function.

namespace dvs::stats {

/// I_x(a, b) for a, b > 0 and x in [0, 1]; continued-fraction evaluation
/// (modified Lentz), accurate to ~1e-14.
double regularized_incomplete_beta(double a, double b, double x);

/// P(T <= t) for T ~ Student-t with `df` > 0 degrees of freedom (real df
/// allowed, as produced by Welch-Satterthwaite).
double student_t_cdf(double t, double df);

/// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

}  // namespace dvs::stats
