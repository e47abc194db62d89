#include <jellium/exact_radii.hpp>

#include <jellium/errors.hpp>
#include <jellium/parallel.hpp>
#include <jellium/special.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace jellium {

namespace {

void require_determinantal(const GasParams& params) {
    if (params.beta() != 2.0) {
        std::ostringstream os;
        os << "exact radii need beta = 2 (got " << params.beta() << ")";
        throw Error(ErrorCode::BetaNotTwo, os.str());
    }
    require_integrable(params);
}

std::vector<RadialWeights> all_weights(const GasParams& params) {
    std::vector<RadialWeights> w;
    w.reserve(params.n());
    for (int k = 1; k <= params.n(); ++k)
        w.push_back(radial_weights(params, k));
    return w;
}

}  // namespace

double RadialWeights::inside_mass() const { return std::exp(log_inside_mass); }
double RadialWeights::outside_mass() const { return std::exp(log_outside_mass); }
double RadialWeights::normalizer() const { return std::exp(log_normalizer); }
double RadialWeights::inside_fraction() const { return std::exp(log_inside_mass - log_normalizer); }
double RadialWeights::outside_fraction() const { return std::exp(log_outside_mass - log_normalizer); }

RadialWeights radial_weights(const GasParams& params, int k) {
    require_determinantal(params);
    if (k < 1 || k > params.n())
        throw Error(ErrorCode::InvalidParams, "radial index k must lie in [1, n]");
    const double alpha = params.alpha();
    const double logR = std::log(params.R());
    // shared factor pi R^(2k - 2 alpha)
    const double common = std::log(std::numbers::pi) + (2.0 * k - 2.0 * alpha) * logR;

    RadialWeights w;
    w.k_index = k;
    w.gamma_p_at_alpha = special::gamma_p(k, alpha);
    // pi (R^2/alpha)^k e^alpha R^(-2 alpha) gamma(k, alpha), with u = alpha t^2 / R^2
    w.log_inside_mass =
        common + alpha - k * std::log(alpha) + special::log_gamma(k) + std::log(w.gamma_p_at_alpha);
    // pi R^(2k - 2 alpha) / (alpha - k), finite because alpha > n >= k
    w.log_outside_mass = common - std::log(alpha - k);
    w.log_normalizer = special::log_add_exp(w.log_inside_mass, w.log_outside_mass);
    return w;
}

RadialSample::RadialSample(std::vector<double> moduli, GasParams params, std::uint64_t seed,
                           std::int64_t trial_id)
    : moduli_(std::move(moduli)), params_(params), seed_(seed), trial_id_(trial_id) {
    if (moduli_.size() != static_cast<std::size_t>(params_.n()))
        throw Error(ErrorCode::InvalidParams, "radial sample must hold exactly n moduli");
    max_ = 0.0;
    for (double r : moduli_) {
        if (!std::isfinite(r) || r < 0.0)
            throw Error(ErrorCode::NonFiniteValue, "moduli must be finite and nonnegative");
        max_ = std::max(max_, r);
    }
}

KostlanSampler::KostlanSampler(const GasParams& params) : params_(params), weights_(all_weights(params)) {}

double KostlanSampler::draw(int k, RngStream& rng) const {
    const RadialWeights& w = weights_.at(static_cast<std::size_t>(k - 1));
    const double alpha = params_.alpha();
    const double R = params_.R();
    if (uniform01(rng) < w.inside_fraction()) {
        // truncated Gamma(k): solve P(k, u) = v P(k, alpha)
        const double v = uniform01_open_left(rng);
        const double p = v * w.gamma_p_at_alpha;
        const double q = w.gamma_p_at_alpha == 1.0 ? 1.0 - v : 1.0 - p;
        const double u = special::inverse_gamma_p(k, p, q, alpha);
        return R * std::sqrt(u / alpha);
    }
    // Pareto: P(T > t) = (R / t)^(2 alpha - 2k)
    const double v = uniform01_open_left(rng);
    return R * std::pow(v, -1.0 / (2.0 * alpha - 2.0 * k));
}

std::vector<double> KostlanSampler::draw_all(RngStream& rng) const {
    std::vector<double> radii(weights_.size());
    for (int k = 1; k <= params_.n(); ++k)
        radii[k - 1] = draw(k, rng);
    return radii;
}

double KostlanSampler::draw_max(RngStream& rng) const {
    double m = 0.0;
    for (int k = 1; k <= params_.n(); ++k)
        m = std::max(m, draw(k, rng));
    return m;
}

RadialSample sample_radii(const GasParams& params, RngStream& rng, std::uint64_t seed, std::int64_t trial_id) {
    const KostlanSampler sampler(params);
    return RadialSample(sampler.draw_all(rng), params, seed, trial_id);
}

ExactMaxLaw::ExactMaxLaw(const GasParams& params) : params_(params), weights_(all_weights(params)) {}

double ExactMaxLaw::log_cdf(double x) const {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (!(x > 0.0))
        return neg_inf;
    if (std::isinf(x))
        return 0.0;
    const double alpha = params_.alpha();
    const double R = params_.R();
    double sum = 0.0;
    if (x >= R) {
        const double log_ratio = std::log(R / x);
        for (const auto& w : weights_) {
            const double log_tail =
                w.log_outside_mass - w.log_normalizer + 2.0 * (alpha - w.k_index) * log_ratio;
            sum += special::log1mexp(log_tail);
        }
        return sum;
    }
    const double u = alpha * (x / R) * (x / R);
    for (const auto& w : weights_) {
        const double p = special::gamma_p(w.k_index, u);
        if (p <= 0.0)
            return neg_inf;
        sum += (w.log_inside_mass - w.log_normalizer) + std::log(p) - std::log(w.gamma_p_at_alpha);
    }
    return sum;
}

double ExactMaxLaw::cdf(double x) const {
    return std::exp(log_cdf(x));
}

double ExactMaxLaw::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::POutOfRange, "quantile needs p in (0, 1)");
    double lo = 0.0;
    double hi = params_.R();
    while (cdf(hi) < p)
        hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double max_modulus_cdf_exact(const GasParams& params, double x) {
    return ExactMaxLaw(params).cdf(x);
}

TrialBatch sample_max_batch(const GasParams& params, int trials, std::uint64_t base_seed, int threads) {
    TrialBatch batch{params, base_seed, {}};
    if (trials <= 0)
        return batch;
    const KostlanSampler sampler(params);
    batch.values.resize(static_cast<std::size_t>(trials));
    parallel_for(batch.values.size(), threads, [&](std::size_t i) {
        RngStream rng = make_stream(base_seed, i);
        batch.values[i] = sampler.draw_max(rng);
    });
    return batch;
}

std::vector<RadialSample> sample_radii_batch(const GasParams& params, int trials, std::uint64_t base_seed,
                                             int threads) {
    if (trials <= 0)
        return {};
    const KostlanSampler sampler(params);
    std::vector<std::vector<double>> radii(static_cast<std::size_t>(trials));
    parallel_for(radii.size(), threads, [&](std::size_t i) {
        RngStream rng = make_stream(base_seed, i);
        radii[i] = sampler.draw_all(rng);
    });
    std::vector<RadialSample> out;
    out.reserve(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i)
        out.emplace_back(std::move(radii[i]), params, base_seed, static_cast<std::int64_t>(i));
    return out;
}

}  // namespace jellium
