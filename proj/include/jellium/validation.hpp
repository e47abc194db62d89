#pragma once

#include <jellium/mcmc.hpp>
#include <jellium/stats.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jellium {

// Sampling experiments shared by `jellium validate` and the acceptance binary.

struct CriterionOutcome {
    std::string id;           ///< suite name, e.g. "edge_L"
    std::string description;  ///< one line, with the threshold
    bool passed = false;
    std::vector<EcdfReport> reports;
};

struct ValidationOptions {
    std::uint64_t seed = 7;
    int threads = 1;

    /// Replaces the gas parameters of every suite when set. edge_L then compares with
    /// L(kappa = alpha - n, R).
    std::optional<GasParams> params_override;

    int edge_L_trials = 2000;
    int edge_gumbel_trials = 2000;

    Schedule bulk_schedule = {.steps = 20000, .burn_in_fraction = 0.9, .thinning = 100};
    int bulk_chains = 1;

    Schedule cross_schedule = {.steps = 100000, .burn_in_fraction = 0.5, .thinning = 1000};
    int cross_chains = 25;
    int cross_exact_trials = 1250;
};

/// n=200, beta=2, alpha=201, R=1: maxima of the exact sampler against L(1, 1), KS < 0.05.
CriterionOutcome validate_edge_L(const ValidationOptions& opts);

/// n=5000, beta=2, lambda=4, R=2: maxima against the finite-n exact CDF (KS < 0.03) and
/// a_n (max - b_n) against Gumbel (KS < 0.15).
CriterionOutcome validate_edge_gumbel(const ValidationOptions& opts);

/// n=500, beta=2, lambda=4, R=2 MCMC: pooled radial ECDF against min(1, lambda r^2/R^2), KS < 0.05.
CriterionOutcome validate_bulk(const ValidationOptions& opts);

/// beta=2, n=8, lambda=4, R=2: exact moduli against MCMC moduli, two-sample KS < 0.05.
CriterionOutcome validate_cross_sampler(const ValidationOptions& opts);

/// Suite names: edge_L, edge_gumbel, bulk, cross_sampler, all. Throws InvalidParams otherwise,
/// and NotIntegrable for an override before any sampling starts.
std::vector<CriterionOutcome> run_validation_suite(const std::string& suite, const ValidationOptions& opts);

std::vector<std::string> validation_suite_names();

}  // namespace jellium
