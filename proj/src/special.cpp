#include <jellium/special.hpp>

#include <jellium/errors.hpp>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace jellium::special {

double gamma_p(double a, double x) {
    if (x <= 0.0)
        return 0.0;
    if (std::isinf(x))
        return 1.0;
    return boost::math::gamma_p(a, x);
}

double gamma_q(double a, double x) {
    if (x <= 0.0)
        return 1.0;
    if (std::isinf(x))
        return 0.0;
    return boost::math::gamma_q(a, x);
}

double gamma_p_density(double a, double x) {
    if (x <= 0.0)
        return a == 1.0 ? 1.0 : 0.0;
    return boost::math::gamma_p_derivative(a, x);
}

double log_gamma(double a) {
    return boost::math::lgamma(a);
}

double log1mexp(double x) {
    // Maechler's switch point
    return x > -std::numbers::ln2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity())
        return b;
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

namespace {

/// Wilson-Hilferty starting point.
double initial_guess(double a, double p, double q) {
    const double z = p < q ? -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p)
                           : std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
    const double c = 1.0 / (9.0 * a);
    const double base = 1.0 - c + z * std::sqrt(c);
    if (base <= 0.0)
        return 0.0;
    return a * base * base * base;
}

}  // namespace

double inverse_gamma_p(double a, double p, double q, double upper) {
    if (p <= 0.0)
        return 0.0;
    const bool lower_tail = p <= q;
    // f(x) increases in x on both scales: P(a,x) - p, or q - Q(a,x)
    auto residual = [&](double x) {
        return lower_tail ? gamma_p(a, x) - p : q - gamma_q(a, x);
    };
    const double target = lower_tail ? p : q;
    const double tol = 1e-12 * target;

    double lo = 0.0;
    double hi = upper;
    double x = std::clamp(initial_guess(a, p, q), 0.0, upper);
    if (!(x > lo && x < hi))
        x = 0.5 * (lo + hi);

    for (int iter = 0; iter < 400; ++iter) {
        const double f = residual(x);
        if (std::abs(f) <= tol)
            return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
            return 0.5 * (lo + hi);
        const double slope = gamma_p_density(a, x);
        double next = slope > 0.0 ? x - f / slope : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        x = next;
    }
    throw Error(ErrorCode::NoConvergence, "inverse incomplete gamma did not converge");
}

}  // namespace jellium::special
