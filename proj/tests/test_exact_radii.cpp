#include <doctest.h>

#include <jellium/errors.hpp>
#include <jellium/exact_radii.hpp>
#include <jellium/special.hpp>
#include <jellium/stats.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace jellium;

namespace {

constexpr double pi = std::numbers::pi;

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a jellium::Error");
    return ErrorCode::Io;
}

}  // namespace

TEST_CASE("gates: beta = 2 and integrability") {
    CHECK(code_of([] { KostlanSampler(GasParams(5, 3.0, 6.0, 1.0)); }) == ErrorCode::BetaNotTwo);
    CHECK(code_of([] { KostlanSampler(GasParams(5, 2.0, 5.0, 1.0)); }) == ErrorCode::NotIntegrable);
    CHECK(code_of([] { max_modulus_cdf_exact(GasParams(5, 4.0, 6.0, 1.0), 1.0); }) == ErrorCode::BetaNotTwo);
    CHECK(code_of([] { radial_weights(GasParams(5, 2.0, 6.0, 1.0), 6); }) == ErrorCode::InvalidParams);
    CHECK(code_of([] { radial_weights(GasParams(5, 2.0, 6.0, 1.0), 0); }) == ErrorCode::InvalidParams);
}

TEST_CASE("mixture weights match direct quadrature of the radial density") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (int i = 0; i < 50; ++i) {
        const int n = 1 + static_cast<int>(u(rng) * 12);
        const double alpha = n + 0.2 + 20 * u(rng);
        const double R = 0.3 + 3 * u(rng);
        const int k = 1 + static_cast<int>(u(rng) * n);
        const GasParams p(n, 2.0, alpha, R);
        const RadialWeights w = radial_weights(p, k);
        auto density = [&](double t) {
            const double v = t <= R ? alpha * (t * t / (R * R) - 1 + 2 * std::log(R)) : 2 * alpha * std::log(t);
            return 2 * pi * std::pow(t, 2 * k - 1) * std::exp(-v);
        };
        const double inside = GK::integrate(density, 0, R, 15, 1e-14);
        const double outside = GK::integrate(density, R, std::numeric_limits<double>::infinity(), 15, 1e-14);
        CHECK(w.inside_mass() == doctest::Approx(inside).epsilon(1e-10));
        CHECK(w.outside_mass() == doctest::Approx(outside).epsilon(1e-10));
        CHECK(w.normalizer() == doctest::Approx(inside + outside).epsilon(1e-10));
        CHECK(w.inside_fraction() + w.outside_fraction() == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("outside fraction for n = 1, alpha = 2, R = 1") {
    // inside pi (e^2 - 1) / 2, outside pi
    const double expected = 2.0 / (std::exp(2.0) + 1.0);
    const GasParams p(1, 2.0, 2.0, 1.0);
    CHECK(radial_weights(p, 1).outside_fraction() == doctest::Approx(expected).epsilon(1e-13));

    const KostlanSampler sampler(p);
    RngStream rng = make_stream(99, 0);
    const int draws = 1000000;
    int outside = 0;
    for (int i = 0; i < draws; ++i)
        outside += sampler.draw(1, rng) > 1.0;
    CHECK(std::abs(static_cast<double>(outside) / draws - expected) < 1.5e-3);
}

TEST_CASE("outside weight vanishes as kappa_n grows at fixed n") {
    double last = std::numeric_limits<double>::infinity();
    for (double kappa : {1.0, 5.0, 20.0, 100.0, 1000.0}) {
        const GasParams p(10, 2.0, 10 + kappa, 1.0);
        double total = 0.0;
        for (const RadialWeights& w : KostlanSampler(p).weights())
            total += w.outside_fraction();
        CHECK(total < last);
        last = total;
    }
    CHECK(last < 1e-100);
}

TEST_CASE("moduli are finite and nonnegative") {
    for (const GasParams& p : {GasParams(1, 2, 1.01, 1), GasParams(50, 2, 50.5, 3), GasParams(400, 2, 4000, 0.5),
                               GasParams(3000, 2, 3001, 2)}) {
        RngStream rng = make_stream(1, 2);
        const RadialSample s = sample_radii(p, rng, 1, 2);
        CHECK(s.moduli().size() == static_cast<std::size_t>(p.n()));
        for (double r : s.moduli()) {
            CHECK(std::isfinite(r));
            CHECK(r >= 0);
        }
        CHECK(s.max_modulus() == *std::max_element(s.moduli().begin(), s.moduli().end()));
        CHECK(s.trial_id() == 2);
    }
}

TEST_CASE("exact max CDF: limits, monotonicity and density") {
    const GasParams p(30, 2.0, 45.0, 1.5);
    const ExactMaxLaw law(p);
    CHECK(law.cdf(0.0) == 0.0);
    CHECK(1.0 - law.cdf(1e6 * p.R()) < 1e-9);
    double prev = 0.0;
    for (double x = 0.0; x <= 5.0; x += 0.001) {
        const double c = law.cdf(x);
        CHECK(c >= prev);
        CHECK(c <= 1.0);
        prev = c;
    }
    // the centred difference quotient is a density on [0, 200]
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto dens = [&](double x) {
        const double h = 1e-5 * std::max(x, 1e-3);
        return (law.cdf(x + h) - law.cdf(std::max(0.0, x - h))) / (x + h - std::max(0.0, x - h));
    };
    const double mass = GK::integrate(dens, 0.0, p.R(), 10, 1e-12) + GK::integrate(dens, p.R(), 200.0, 10, 1e-12);
    CHECK(mass == doctest::Approx(law.cdf(200.0)).epsilon(1e-6));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    for (double x = 0.0; x < 3.0; x += 0.01)
        CHECK(dens(x) >= -1e-9);
}

TEST_CASE("exact max CDF agrees with the radial product for n = 2") {
    // independent oracle: Z(x) / Z with Z(x) = 8 pi^2 A(x) B(x), A, B the radial moments on [0, x]
    const GasParams p(2, 2.0, 3.0, 1.0);
    auto w = [](double r) { return r <= 1 ? std::exp(-3 * (r * r - 1)) : std::pow(r, -6.0); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto moments = [&](double x) {
        double a = 0, b = 0;
        const double split = std::min(x, 1.0);
        a += GK::integrate([&](double r) { return r * w(r); }, 0, split, 15, 1e-15);
        b += GK::integrate([&](double r) { return r * r * r * w(r); }, 0, split, 15, 1e-15);
        if (x > 1) {
            a += GK::integrate([&](double r) { return r * w(r); }, 1, x, 15, 1e-15);
            b += GK::integrate([&](double r) { return r * r * r * w(r); }, 1, x, 15, 1e-15);
        }
        return a * b;
    };
    const double total = moments(std::numeric_limits<double>::infinity());
    const double frozen[] = {0.071459312252103672, 0.59450340200103804, 0.82844724352932333, 0.94083809767316634};
    const double xs[] = {0.5, 1.0, 1.5, 2.5};
    for (int i = 0; i < 4; ++i) {
        CHECK(max_modulus_cdf_exact(p, xs[i]) == doctest::Approx(moments(xs[i]) / total).epsilon(1e-12));
        CHECK(std::abs(max_modulus_cdf_exact(p, xs[i]) - frozen[i]) < 1e-12);
    }
}

TEST_CASE("exact max quantile round-trips") {
    const ExactMaxLaw law(GasParams(200, 2.0, 201.0, 1.0));
    for (double q : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1 - 1e-9}) {
        const double x = law.quantile(q);
        CHECK(law.cdf(x) == doctest::Approx(q).epsilon(1e-9));
    }
    CHECK(code_of([&] { law.quantile(0.0); }) == ErrorCode::POutOfRange);
    CHECK(code_of([&] { law.quantile(1.0); }) == ErrorCode::POutOfRange);
}

TEST_CASE("batches: empty, deterministic and thread independent") {
    const GasParams p(200, 2.0, 201.0, 1.0);
    CHECK(sample_max_batch(p, 0, 7).values.empty());
    const TrialBatch a = sample_max_batch(p, 300, 7, 1);
    const TrialBatch b = sample_max_batch(p, 300, 7, 1);
    const TrialBatch c = sample_max_batch(p, 300, 7, 4);
    CHECK(a.values == b.values);
    CHECK(a.values == c.values);
    CHECK(sample_max_batch(p, 300, 8, 1).values != a.values);
    // trial i only depends on (seed, i)
    const TrialBatch prefix = sample_max_batch(p, 100, 7, 1);
    CHECK(std::equal(prefix.values.begin(), prefix.values.end(), a.values.begin()));

    const auto radii = sample_radii_batch(p, 10, 7, 2);
    REQUIRE(radii.size() == 10);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        CHECK(radii[i].max_modulus() == a.values[i]);
        CHECK(radii[i].trial_id() == static_cast<std::int64_t>(i));
    }
}

TEST_CASE("maxima of n = 200, alpha = 201 follow the exact finite-n law") {
    const GasParams p(200, 2.0, 201.0, 1.0);
    const TrialBatch batch = sample_max_batch(p, 5000, 123, 0);
    const ExactMaxLaw law(p);
    const double ks = ks_statistic(batch.values, [&](double x) { return law.cdf(x); });
    CHECK(ks < 0.03);
}

TEST_CASE("per-index radii follow their truncated mixture laws") {
    // CDF of index k: inside P(k, alpha t^2/R^2) mass, outside Pareto tail
    const GasParams p(6, 2.0, 8.5, 1.3);
    const KostlanSampler sampler(p);
    RngStream rng = make_stream(5, 5);
    for (int k = 1; k <= p.n(); ++k) {
        const RadialWeights& w = sampler.weights()[k - 1];
        auto cdf = [&](double t) {
            if (t <= p.R())
                return w.inside_fraction() * special::gamma_p(k, p.alpha() * t * t / (p.R() * p.R())) /
                       w.gamma_p_at_alpha;
            return 1.0 - w.outside_fraction() * std::pow(t / p.R(), 2.0 * k - 2.0 * p.alpha());
        };
        std::vector<double> xs(20000);
        for (double& x : xs)
            x = sampler.draw(k, rng);
        CHECK(ks_statistic(xs, cdf) < 0.015);
    }
}
