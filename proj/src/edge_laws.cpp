#include <jellium/edge_laws.hpp>

#include <jellium/errors.hpp>
#include <jellium/exact_radii.hpp>
#include <jellium/special.hpp>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace jellium {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// below this log-probability the CDF is zero in double precision
constexpr double kLogUnderflow = -800.0;

void require_probability(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream os;
        os << "probability must lie in (0, 1), got " << p;
        throw Error(ErrorCode::POutOfRange, os.str());
    }
}

/// Bisection for an increasing cdf on [lo, hi]; hi is doubled until it brackets p.
template <class Cdf>
double invert_increasing(Cdf&& cdf, double p, double lo, double hi, double abs_tol) {
    while (cdf(hi) < p)
        hi = lo + 2.0 * (hi - lo);
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= abs_tol * std::max(1.0, std::abs(mid)))
            break;
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void HeavyTailLawL::validate() const {
    if (!(kappa > 0.0) || !(R > 0.0) || !(truncation_tol > 0.0))
        throw Error(ErrorCode::InvalidParams, "law L needs kappa > 0, R > 0 and a positive truncation tolerance");
}

long truncation_terms_L(const HeavyTailLawL& law, double t) {
    if (t <= law.R)
        return 0;
    const double log_s = 2.0 * std::log(law.R / t);
    const double one_minus_s = -std::expm1(log_s);
    long k = 0;
    for (;; ++k) {
        const double x = std::exp((k + law.kappa) * log_s);
        if (x / (one_minus_s * (1.0 - x)) < law.truncation_tol)
            return k;
    }
}

double cdf_L_terms(const HeavyTailLawL& law, double t, long terms) {
    if (t <= law.R)
        return 0.0;
    const double log_s = 2.0 * std::log(law.R / t);
    double sum = 0.0;
    for (long k = 0; k < terms; ++k) {
        sum += special::log1mexp((k + law.kappa) * log_s);
        if (sum < kLogUnderflow)
            return 0.0;
    }
    return std::exp(sum);
}

double log_cdf_L(const HeavyTailLawL& law, double t) {
    law.validate();
    if (t <= law.R)
        return kNegInf;
    if (std::isinf(t))
        return 0.0;
    const double log_s = 2.0 * std::log(law.R / t);
    const double one_minus_s = -std::expm1(log_s);
    double sum = 0.0;
    for (long k = 0;; ++k) {
        const double log_x = (k + law.kappa) * log_s;
        const double x = std::exp(log_x);
        // the remaining factors change log F by at most x / ((1-s)(1-x))
        if (x / (one_minus_s * (1.0 - x)) < law.truncation_tol)
            return sum;
        sum += special::log1mexp(log_x);
        if (sum < kLogUnderflow)
            return kNegInf;
    }
}

double cdf_L(const HeavyTailLawL& law, double t) {
    return std::exp(log_cdf_L(law, t));
}

double quantile_L(const HeavyTailLawL& law, double p) {
    law.validate();
    require_probability(p);
    auto cdf = [&](double t) { return cdf_L(law, t); };
    return invert_increasing(cdf, p, law.R, 2.0 * law.R, 1e-12);
}

double cdf_gumbel(double t) {
    return std::exp(-std::exp(-t));
}

double quantile_gumbel(double p) {
    require_probability(p);
    return -std::log(-std::log(p));
}

double spherical_factor(int k, double t) {
    if (t <= 0.0)
        return 0.0;
    return special::gamma_q(k, 1.0 / (t * t));
}

double cdf_spherical_F(double t, double truncation_tol) {
    if (t <= 0.0)
        return 0.0;
    if (std::isinf(t))
        return 1.0;
    const double x = 1.0 / (t * t);
    double sum = 0.0;
    for (int k = 1;; ++k) {
        const double p = special::gamma_p(k, x);
        // for k + 1 > x the remaining P(j, x), j >= k, shrink geometrically with ratio <= x/(k+1)
        if (k + 1 > x && p / (1.0 - x / (k + 1.0)) < truncation_tol)
            return std::exp(sum);
        sum += p < 0.5 ? std::log1p(-p) : std::log(special::gamma_q(k, x));
        if (sum < kLogUnderflow)
            return 0.0;
    }
}

double quantile_spherical_F(double p, double truncation_tol) {
    require_probability(p);
    auto cdf = [&](double t) { return cdf_spherical_F(t, truncation_tol); };
    return invert_increasing(cdf, p, 0.0, 1.0, 1e-12);
}

GinibreScalings ginibre_scalings(int n) {
    const double c = edge_log_correction(n);
    if (!(c > 0.0)) {
        std::ostringstream os;
        os << "c_n = " << c << " for n = " << n << "; Ginibre scalings need n >= " << min_n_positive_cn();
        throw Error(ErrorCode::CnNotPositive, os.str());
    }
    return {2.0 * std::sqrt(n * c), 1.0 + 0.5 * std::sqrt(c / n), c};
}

EpsilonKappa solve_epsilon_kappa(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw Error(ErrorCode::InvalidParams, "epsilon_kappa needs a finite kappa > 0");
    // w = kappa e solves g(w) = w + log w - log kappa = 0. g is concave and increasing, so
    // after the first Newton step the iterates increase monotonically to the root.
    const double log_kappa = std::log(kappa);
    double w = std::log1p(kappa);
    for (int i = 0; i < 100; ++i) {
        const double step = (w + std::log(w) - log_kappa) / (1.0 + 1.0 / w);
        const double next = w - step;
        w = next > 0.0 ? next : 0.25 * w;
        if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * w)
            break;
    }
    const double e = w / kappa;
    return {kappa, e};
}

double crossover_cdf(double kappa, double y) {
    const double eps = solve_epsilon_kappa(kappa).epsilon;
    const double t = 1.0 + 0.5 * eps + y / (2.0 * kappa);
    return cdf_L(HeavyTailLawL{kappa, 1.0}, t);
}

double crossover_to_gumbel_distance(double kappa, const BridgeGrid& grid) {
    const double eps = solve_epsilon_kappa(kappa).epsilon;
    const HeavyTailLawL law{kappa, 1.0};
    const long points = static_cast<long>(std::floor((grid.y_max - grid.y_min) / grid.step + 1e-9)) + 1;
    double dist = 0.0;
    for (long i = 0; i < points; ++i) {
        const double y = grid.y_min + i * grid.step;
        const double t = 1.0 + 0.5 * eps + y / (2.0 * kappa);
        dist = std::max(dist, std::abs(cdf_L(law, t) - cdf_gumbel(y)));
    }
    return dist;
}

std::string LimitLawSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
    case LawKind::HeavyTailL:
        os << "L(kappa=" << kappa << ", R=" << R << ")";
        break;
    case LawKind::Gumbel:
        os << "Gumbel";
        break;
    case LawKind::SphericalF:
        os << "SphericalF";
        break;
    case LawKind::ExactMax:
        if (!params) {
            os << "ExactMax(unset)";
            break;
        }
        os << "ExactMax(n=" << params->n() << ", beta=" << params->beta() << ", alpha=" << params->alpha()
           << ", R=" << params->R() << ")";
        break;
    }
    return os.str();
}

ContinuousLaw make_law(const LimitLawSpec& spec) {
    ContinuousLaw law;
    law.name = spec.describe();
    switch (spec.kind) {
    case LawKind::HeavyTailL: {
        const HeavyTailLawL L{spec.kappa, spec.R, spec.truncation_tol};
        L.validate();
        law.cdf = [L](double t) { return cdf_L(L, t); };
        law.quantile = [L](double p) { return quantile_L(L, p); };
        law.support_lo = spec.R;
        break;
    }
    case LawKind::Gumbel:
        law.cdf = cdf_gumbel;
        law.quantile = quantile_gumbel;
        break;
    case LawKind::SphericalF: {
        const double tol = spec.truncation_tol;
        law.cdf = [tol](double t) { return cdf_spherical_F(t, tol); };
        law.quantile = [tol](double p) { return quantile_spherical_F(p, tol); };
        law.support_lo = 0.0;
        break;
    }
    case LawKind::ExactMax: {
        if (!spec.params)
            throw Error(ErrorCode::InvalidParams, "exact max law needs gas parameters");
        auto exact = std::make_shared<const ExactMaxLaw>(*spec.params);
        law.cdf = [exact](double x) { return exact->cdf(x); };
        law.quantile = [exact](double p) { return exact->quantile(p); };
        law.support_lo = 0.0;
        break;
    }
    }
    return law;
}

}  // namespace jellium
