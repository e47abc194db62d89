#pragma once

namespace jellium::special {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// d/dx P(a, x) = x^(a-1) e^(-x) / Gamma(a).
double gamma_p_density(double a, double x);
double log_gamma(double a);

/// Solves P(a, x) = p for x in [0, upper] by bracketed bisection with Newton
/// refinement. `q` must equal 1 - p (passed separately so upper-tail targets
/// keep their relative precision); requires p <= P(a, upper). Converges to
/// 1e-12 relative on the smaller of the two tail probabilities.
double inverse_gamma_p(double a, double p, double q, double upper);

/// log(1 - exp(x)) for x < 0, accurate near both ends.
double log1mexp(double x);

/// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

}  // namespace jellium::special
