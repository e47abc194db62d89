#pragma once

#include <jellium/model.hpp>
#include <jellium/rng.hpp>

#include <cstdint>
#include <vector>

namespace jellium {

// Exact sampling of the moduli of the beta = 2 gas. The moduli multiset has the
// law of n independent radii, the k-th (k = 1..n) with density proportional to
//
//     t^(2k-1) exp(-2 n V(t)),   t >= 0.
//
// Inside the disc this is a Gamma(k, 1) law in u = alpha t^2 / R^2 truncated to
// u <= alpha; outside it is the Pareto tail t^(2k-1-2 alpha). Indices run over
// k = 1..n throughout; the zero-based index k0 = k - 1 is the one under which
// the outside tail reads x^(2 k0 + 2 - 2 alpha) / (2 alpha - 2 k0 - 2).
//
// Angles are never produced: only the multiset of moduli has this law.

/// Masses of the planar density |z|^(2k-2) exp(-2 n V(z)) on D_R and on its
/// complement, stored as logarithms because they overflow for large alpha.
struct RadialWeights {
    int k_index = 1;
    double log_inside_mass = 0.0;
    double log_outside_mass = 0.0;
    double log_normalizer = 0.0;
    double gamma_p_at_alpha = 1.0;  ///< P(k, alpha), the inside truncation mass

    double inside_mass() const;
    double outside_mass() const;
    double normalizer() const;
    double inside_fraction() const;
    double outside_fraction() const;
};

/// Throws BetaNotTwo or NotIntegrable, InvalidParams for k outside [1, n].
RadialWeights radial_weights(const GasParams& params, int k);

class RadialSample {
public:
    RadialSample(std::vector<double> moduli, GasParams params, std::uint64_t seed, std::int64_t trial_id);

    const std::vector<double>& moduli() const noexcept { return moduli_; }
    const GasParams& params() const noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::int64_t trial_id() const noexcept { return trial_id_; }
    double max_modulus() const noexcept { return max_; }

private:
    std::vector<double> moduli_;
    GasParams params_;
    std::uint64_t seed_;
    std::int64_t trial_id_;
    double max_;
};

/// Sampler with the n mixture weights precomputed.
class KostlanSampler {
public:
    /// Throws BetaNotTwo or NotIntegrable.
    explicit KostlanSampler(const GasParams& params);

    const GasParams& params() const noexcept { return params_; }
    const std::vector<RadialWeights>& weights() const noexcept { return weights_; }

    /// Draws one radius for index k in [1, n].
    double draw(int k, RngStream& rng) const;

    /// Draws all n radii (in index order, not sorted).
    std::vector<double> draw_all(RngStream& rng) const;

    double draw_max(RngStream& rng) const;

private:
    GasParams params_;
    std::vector<RadialWeights> weights_;
};

RadialSample sample_radii(const GasParams& params, RngStream& rng, std::uint64_t seed = 0,
                          std::int64_t trial_id = 0);

/// Exact law of max_k |X_k| at finite n, as a product over the independent radii.
class ExactMaxLaw {
public:
    explicit ExactMaxLaw(const GasParams& params);

    double cdf(double x) const;
    double log_cdf(double x) const;
    double quantile(double p) const;

private:
    GasParams params_;
    std::vector<RadialWeights> weights_;
};

double max_modulus_cdf_exact(const GasParams& params, double x);

struct TrialBatch {
    GasParams params;
    std::uint64_t base_seed = 0;
    std::vector<double> values;  ///< values[i] belongs to trial_id i
};

/// Trial i draws from make_stream(base_seed, i), so results do not depend on
/// `threads` or on scheduling. threads <= 0 means all hardware threads.
TrialBatch sample_max_batch(const GasParams& params, int trials, std::uint64_t base_seed, int threads = 1);

/// Full moduli of each trial, same stream construction as sample_max_batch.
std::vector<RadialSample> sample_radii_batch(const GasParams& params, int trials, std::uint64_t base_seed,
                                             int threads = 1);

}  // namespace jellium
