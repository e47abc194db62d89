#include <jellium/stats.hpp>

#include <jellium/errors.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jellium {

namespace {

std::vector<double> sorted_copy(std::span<const double> sample) {
    if (sample.empty())
        throw Error(ErrorCode::EmptySample, "empirical distribution of an empty sample");
    for (double v : sample)
        if (!std::isfinite(v))
            throw Error(ErrorCode::NonFiniteValue, "sample contains a non-finite value");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    return s;
}

/// Integral over [0, h] of |c - (f0 + (f1 - f0) x / h)|.
double abs_linear_gap(double c, double f0, double f1, double h) {
    const double g0 = c - f0;
    const double g1 = c - f1;
    if (g0 * g1 >= 0.0)
        return 0.5 * h * std::abs(g0 + g1);
    // sign change: two triangles
    const double s = g0 / (g0 - g1);
    return 0.5 * h * (s * std::abs(g0) + (1.0 - s) * std::abs(g1));
}

}  // namespace

void EcdfReport::set_threshold(double threshold) {
    pass_threshold = threshold;
    passed = ks_distance <= threshold;
}

EcdfReport make_report(std::size_t sample_size, double ks, double w1, std::string reference, double threshold) {
    EcdfReport r;
    r.sample_size = sample_size;
    r.ks_distance = ks;
    r.w1_distance = w1;
    r.reference = std::move(reference);
    r.set_threshold(threshold);
    return r;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    const std::vector<double> s = sorted_copy(sample);
    const double m = static_cast<double>(s.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = i;
        while (j + 1 < s.size() && s[j + 1] == s[i])
            ++j;
        const double F = cdf(s[i]);
        d = std::max({d, std::abs(F - i / m), std::abs((j + 1) / m - F)});
        i = j + 1;
    }
    return d;
}

double w1_against_law(std::span<const double> sample, const ContinuousLaw& law) {
    using boost::math::quadrature::exp_sinh;
    using boost::math::quadrature::gauss_kronrod;
    const std::vector<double> s = sorted_copy(sample);
    const std::size_t m = s.size();
    std::vector<double> F(m);
    for (std::size_t i = 0; i < m; ++i)
        F[i] = law.cdf(s[i]);

    double total = 0.0;
    // left tail: integral of F below the smallest point
    const double lo = s.front();
    if (lo > law.support_lo) {
        if (std::isfinite(law.support_lo)) {
            total += gauss_kronrod<double, 15>::integrate(law.cdf, law.support_lo, lo, 10, 1e-8);
        } else {
            exp_sinh<double> integrator;
            auto f = [&](double x) { return law.cdf(x); };
            total += integrator.integrate(f, -std::numeric_limits<double>::infinity(), lo, 1e-8);
        }
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double h = s[i + 1] - s[i];
        if (h > 0.0)
            total += abs_linear_gap(static_cast<double>(i + 1) / m, F[i], F[i + 1], h);
    }
    // right tail: integral of 1 - F above the largest point
    const double hi = s.back();
    if (hi < law.support_hi) {
        if (std::isfinite(law.support_hi)) {
            auto f = [&](double x) { return 1.0 - law.cdf(x); };
            total += gauss_kronrod<double, 15>::integrate(f, hi, law.support_hi, 10, 1e-8);
        } else {
            exp_sinh<double> integrator;
            auto f = [&](double x) { return 1.0 - law.cdf(x); };
            total += integrator.integrate(f, hi, std::numeric_limits<double>::infinity(), 1e-8);
        }
    }
    return total;
}

EcdfReport ks_against_law(std::span<const double> sample, const ContinuousLaw& law, double pass_threshold) {
    const double ks = ks_statistic(sample, law.cdf);
    double w1 = std::numeric_limits<double>::quiet_NaN();
    try {
        w1 = w1_against_law(sample, law);
    } catch (const std::exception&) {
        // W1 is a secondary diagnostic; a diverging tail integral leaves it NaN
    }
    return make_report(sample.size(), ks, w1, law.name, pass_threshold);
}

double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b) {
    const std::vector<double> x = sorted_copy(a);
    const std::vector<double> y = sorted_copy(b);
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() || j < y.size()) {
        const double v = (j >= y.size() || (i < x.size() && x[i] <= y[j])) ? x[i] : y[j];
        while (i < x.size() && x[i] == v)
            ++i;
        while (j < y.size() && y[j] == v)
            ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

double w1_two_sample(std::span<const double> a, std::span<const double> b) {
    const std::vector<double> x = sorted_copy(a);
    const std::vector<double> y = sorted_copy(b);
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double total = 0.0;
    double prev = std::min(x.front(), y.front());
    double gap = 0.0;
    while (i < x.size() || j < y.size()) {
        const double v = (j >= y.size() || (i < x.size() && x[i] <= y[j])) ? x[i] : y[j];
        total += gap * (v - prev);
        while (i < x.size() && x[i] == v)
            ++i;
        while (j < y.size() && y[j] == v)
            ++j;
        gap = std::abs(i / na - j / nb);
        prev = v;
    }
    return total;
}

EcdfReport ks_two_sample(std::span<const double> a, std::span<const double> b, double pass_threshold,
                         std::string reference) {
    const double ks = ks_two_sample_statistic(a, b);
    const double w1 = w1_two_sample(a, b);
    EcdfReport r = make_report(a.size(), ks, w1, std::move(reference), pass_threshold);
    r.params.emplace_back("reference_sample_size", static_cast<double>(b.size()));
    return r;
}

ContinuousLaw bulk_radial_law(const GasParams& params) {
    const double lambda = params.lambda();
    if (lambda < 1.0) {
        std::ostringstream os;
        os << "low-temperature equilibrium needs lambda = alpha/n >= 1 (got " << lambda << ")";
        throw Error(ErrorCode::LambdaBelowOne, os.str());
    }
    const double R = params.R();
    ContinuousLaw law;
    law.name = "bulk radial CDF min(1, lambda r^2 / R^2)";
    law.cdf = [lambda, R](double r) {
        if (r <= 0.0)
            return 0.0;
        return std::min(1.0, lambda * r * r / (R * R));
    };
    law.quantile = [lambda, R](double p) { return R * std::sqrt(p / lambda); };
    law.support_lo = 0.0;
    law.support_hi = R / std::sqrt(lambda);
    return law;
}

EcdfReport radial_bulk_report(std::span<const double> moduli, const GasParams& params, double pass_threshold) {
    const ContinuousLaw law = bulk_radial_law(params);
    EcdfReport r = ks_against_law(moduli, law, pass_threshold);
    r.params = {{"n", static_cast<double>(params.n())},
                {"beta", params.beta()},
                {"alpha", params.alpha()},
                {"R", params.R()}};
    return r;
}

}  // namespace jellium
