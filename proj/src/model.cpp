#include <jellium/model.hpp>

#include <jellium/errors.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace jellium {

GasParams::GasParams(int n, double beta, double alpha, double R)
    : n_(n), beta_(beta), alpha_(alpha), R_(R) {
    // written as negations so that NaN is rejected too
    if (n < 1 || !(beta > 0.0) || !(alpha > 0.0) || !(R > 0.0) || !std::isfinite(beta) ||
        !std::isfinite(alpha) || !std::isfinite(R)) {
        std::ostringstream os;
        os << "need n >= 1 and finite beta, alpha, R > 0 (got n=" << n << ", beta=" << beta
           << ", alpha=" << alpha << ", R=" << R << ")";
        throw Error(ErrorCode::InvalidParams, os.str());
    }
}

bool GasParams::is_integrable() const noexcept {
    // margins within rounding error of zero count as the (excluded) boundary
    const double margin = beta_ * (alpha_ - n_ + 1.0) - 2.0;
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * beta_ * (alpha_ + n_ + 1.0);
    return margin > slack;
}

IntegrabilityCheck check_integrability(const GasParams& params) {
    const double margin = params.beta() * (params.alpha() - params.n() + 1.0) - 2.0;
    return {params.is_integrable(), margin};
}

void require_integrable(const GasParams& params) {
    const auto check = check_integrability(params);
    if (!check.integrable) {
        std::ostringstream os;
        os.precision(17);
        os << "partition function diverges: beta*(alpha-n+1) - 2 = " << check.margin
           << " must be > 0";
        throw Error(ErrorCode::NotIntegrable, os.str());
    }
}

double background_potential_U_radial(double R, double r) {
    if (r <= R)
        return 0.5 * (1.0 - (r * r) / (R * R)) - std::log(R);
    return -std::log(r);
}

double background_potential_U(const GasParams& params, Point x) {
    return background_potential_U_radial(params.R(), norm(x));
}

double external_potential_V_radial(const GasParams& params, double r) {
    const double R = params.R();
    const double scale = params.alpha() / params.n();
    if (r <= R)
        return 0.5 * scale * ((r * r) / (R * R) - 1.0 + 2.0 * std::log(R));
    return scale * std::log(r);
}

double external_potential_V(const GasParams& params, Point x) {
    return external_potential_V_radial(params, norm(x));
}

double external_potential_V_radial_derivative(const GasParams& params, double r) {
    const double R = params.R();
    const double scale = params.alpha() / params.n();
    if (r <= R)
        return scale * r / (R * R);
    return scale / r;
}

double external_potential_V_laplacian(const GasParams& params, double r) {
    const double R = params.R();
    return r < R ? 2.0 * params.alpha() / (params.n() * R * R) : 0.0;
}

Point external_potential_V_gradient(const GasParams& params, Point x) {
    const double R = params.R();
    const double scale = params.alpha() / params.n();
    const double r2 = x.x * x.x + x.y * x.y;
    const double factor = r2 <= R * R ? scale / (R * R) : scale / r2;
    return {factor * x.x, factor * x.y};
}

namespace {

void require_size(const GasParams& params, std::span<const Point> config) {
    if (config.size() != static_cast<std::size_t>(params.n()))
        throw Error(ErrorCode::InvalidParams, "configuration size " + std::to_string(config.size()) +
                                                  " differs from n = " + std::to_string(params.n()));
}

}  // namespace

double total_energy(const GasParams& params, std::span<const Point> config) {
    require_size(params, config);
    const std::size_t n = config.size();
    double pair = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = config[i].x - config[j].x;
            const double dy = config[i].y - config[j].y;
            const double d2 = dx * dx + dy * dy;
            if (d2 == 0.0)
                return std::numeric_limits<double>::infinity();
            pair -= 0.5 * std::log(d2);
        }
    }
    double external = 0.0;
    for (const Point& p : config)
        external += external_potential_V(params, p);
    return pair + params.n() * external;
}

double energy_and_gradient(const GasParams& params, std::span<const Point> config,
                           std::vector<Point>& gradient) {
    require_size(params, config);
    const std::size_t n = config.size();
    gradient.assign(n, Point{});
    double pair = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = config[i].x - config[j].x;
            const double dy = config[i].y - config[j].y;
            const double d2 = dx * dx + dy * dy;
            if (d2 == 0.0)
                return std::numeric_limits<double>::infinity();
            pair -= 0.5 * std::log(d2);
            // d/dx_i of -log|x_i - x_j| is -(x_i - x_j)/|x_i - x_j|^2
            const double gx = dx / d2;
            const double gy = dy / d2;
            gradient[i].x -= gx;
            gradient[i].y -= gy;
            gradient[j].x += gx;
            gradient[j].y += gy;
        }
    }
    const double weight = params.n();
    double external = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        external += external_potential_V(params, config[i]);
        const Point g = external_potential_V_gradient(params, config[i]);
        gradient[i].x += weight * g.x;
        gradient[i].y += weight * g.y;
    }
    return pair + weight * external;
}

std::vector<Point> energy_gradient(const GasParams& params, std::span<const Point> config) {
    std::vector<Point> gradient;
    if (std::isinf(energy_and_gradient(params, config, gradient)))
        throw Error(ErrorCode::CoincidentPoints, "gradient undefined at coincident particles");
    return gradient;
}

namespace {

using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Integrates a radial function f(r) over [0, rmax], splitting at the kink r = R
/// and mapping an infinite tail onto (0, 1] through r = R / u.
template <class F>
QuadratureResult integrate_radial(F&& f, double R, double rmax, double tol) {
    QuadratureResult out{0.0, 0.0};
    double err = 0.0;
    const double inner_end = std::min(R, rmax);
    out.value += gauss_kronrod<double, 31>::integrate(f, 0.0, inner_end, 15, tol, &err);
    out.error_estimate += err;
    if (rmax <= R)
        return out;
    if (std::isfinite(rmax)) {
        out.value += gauss_kronrod<double, 31>::integrate(f, R, rmax, 15, tol, &err);
        out.error_estimate += err;
        return out;
    }
    tanh_sinh<double> integrator;
    auto mapped = [&](double u) {
        const double r = R / u;
        if (!std::isfinite(r))
            return 0.0;
        const double v = f(r);
        if (v == 0.0)
            return 0.0;
        // dr = (R / u^2) du = (r^2 / R) du
        const double out = v * r * (r / R);
        return std::isfinite(out) ? out : 0.0;
    };
    double l1 = 0.0;
    out.value += integrator.integrate(mapped, 0.0, 1.0, tol, &err, &l1);
    out.error_estimate += err;
    return out;
}

}  // namespace

QuadratureResult partition_function_smalln(const GasParams& params, const QuadratureSpec& spec) {
    if (params.n() > 2)
        throw Error(ErrorCode::NOverLimit, "partition function quadrature supports n <= 2 only");
    require_integrable(params);
    const double beta = params.beta();
    const double R = params.R();
    const double rmax = spec.max_radius;
    const double tol = spec.relative_tolerance;

    if (params.n() == 1) {
        auto radial = [&](double r) {
            return kTwoPi * r * std::exp(-beta * external_potential_V_radial(params, r));
        };
        return integrate_radial(radial, R, rmax, tol);
    }

    // n = 2: fix the angle of the first particle (factor 2 pi) and integrate
    // the relative angle numerically.
    auto angular = [&](double r1, double r2) {
        if (beta == 2.0)
            return kTwoPi * (r1 * r1 + r2 * r2);
        auto f = [&](double theta) {
            return std::pow(r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * std::cos(theta), 0.5 * beta);
        };
        return 2.0 * gauss_kronrod<double, 31>::integrate(f, 0.0, std::numbers::pi, 10, tol);
    };
    auto weight = [&](double r) {
        return std::exp(-2.0 * beta * external_potential_V_radial(params, r));
    };
    auto outer = [&](double r1) {
        auto inner = [&](double r2) { return r2 * weight(r2) * angular(r1, r2); };
        return kTwoPi * r1 * weight(r1) * integrate_radial(inner, R, rmax, tol).value;
    };
    return integrate_radial(outer, R, rmax, tol);
}

double edge_log_correction(int n) {
    if (n < 2)
        return std::numeric_limits<double>::quiet_NaN();
    const double ln = std::log(static_cast<double>(n));
    return ln - 2.0 * std::log(ln) - std::log(kTwoPi);
}

int min_n_positive_cn() {
    // c_n is increasing for n > e^2, so the last non-positive value below the
    // crossing is the threshold.
    static const int threshold = [] {
        int last_nonpositive = 1;
        for (int n = 2; n < 100000; ++n) {
            const double c = edge_log_correction(n);
            if (!(c > 0.0))
                last_nonpositive = n;
            else if (n > 8)
                break;
        }
        return last_nonpositive + 1;
    }();
    return threshold;
}

EdgeScalings edge_scalings(const GasParams& params) {
    const int n = params.n();
    const double c = edge_log_correction(n);
    if (!(c > 0.0)) {
        std::ostringstream os;
        os << "c_n = " << c << " for n = " << n << "; edge scalings need n >= "
           << min_n_positive_cn();
        throw Error(ErrorCode::CnNotPositive, os.str());
    }
    EdgeScalings s{};
    s.c_n = c;
    s.C_n = std::sqrt(n / params.alpha()) * params.R();
    s.a_n = std::sqrt(n * c) / s.C_n;
    s.b_n = s.C_n * (1.0 + 0.5 * std::sqrt(c / n));
    return s;
}

}  // namespace jellium
