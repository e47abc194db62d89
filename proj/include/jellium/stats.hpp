#pragma once

#include <jellium/law.hpp>
#include <jellium/model.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace jellium {

/// Outcome of comparing an empirical distribution with a reference (a law or a
/// second sample). Reports carry the parameters and seed that produced them.
struct EcdfReport {
    std::size_t sample_size = 0;
    double ks_distance = 0.0;
    double w1_distance = 0.0;
    std::string reference;
    double pass_threshold = 0.0;
    bool passed = false;
    std::vector<std::pair<std::string, double>> params;
    std::optional<std::uint64_t> seed;

    /// Re-evaluates `passed` against a new threshold.
    void set_threshold(double threshold);
};

EcdfReport make_report(std::size_t sample_size, double ks, double w1, std::string reference, double threshold);

/// Exact one-sample KS sup_x |F_m(x) - F(x)|, checked just before and at each
/// jump of the ECDF. Throws EmptySample or NonFiniteValue.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Integral of |F_m - F| over the line. F is evaluated at the sample points and
/// interpolated linearly in between; the two tails are integrated numerically.
double w1_against_law(std::span<const double> sample, const ContinuousLaw& law);

EcdfReport ks_against_law(std::span<const double> sample, const ContinuousLaw& law, double pass_threshold = 0.05);

double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b);

/// Integral of |F_a - F_b|, exact for step functions.
double w1_two_sample(std::span<const double> a, std::span<const double> b);

EcdfReport ks_two_sample(std::span<const double> a, std::span<const double> b, double pass_threshold = 0.05,
                         std::string reference = "second sample");

/// min(1, lambda r^2 / R^2): radial CDF of the uniform law on the disc of radius R / sqrt(lambda).
ContinuousLaw bulk_radial_law(const GasParams& params);

/// Pooled moduli against the low-temperature radial CDF. This radial KS + W1
/// pair stands in for the bounded-Lipschitz distance, which is not computed.
/// Throws LambdaBelowOne when lambda < 1.
EcdfReport radial_bulk_report(std::span<const double> moduli, const GasParams& params, double pass_threshold = 0.05);

}  // namespace jellium
