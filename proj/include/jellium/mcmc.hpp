#pragma once

#include <jellium/exact_radii.hpp>
#include <jellium/model.hpp>
#include <jellium/rng.hpp>

#include <cstdint>
#include <vector>

namespace jellium {

/// State of one Markov chain targeting exp(-beta E_n). The cached energy and
/// gradient always belong to `positions`.
struct ChainState {
    Configuration positions;
    double energy = 0.0;
    std::vector<Point> gradient;
    double step_size = 0.5;
    std::uint64_t accepted = 0;
    std::uint64_t proposed = 0;
    std::uint64_t overflow_count = 0;  ///< proposals rejected for a non-finite energy difference
    RngStream rng;

    double acceptance_ratio() const noexcept {
        return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    }
};

/// Builds a state at `positions`. Throws NotIntegrable, CoincidentPoints.
ChainState make_chain_state(const GasParams& params, Configuration positions, double step_size, RngStream rng);

enum class InitMode { UniformDisc, EquilibriumRadial };

/// UniformDisc: n points uniform on D_R. EquilibriumRadial: uniform on D_{R/sqrt(lambda)}.
Configuration initialize_config(const GasParams& params, InitMode mode, RngStream& rng);
Configuration initialize_config(const GasParams& params, InitMode mode, std::uint64_t seed);

struct StepOutcome {
    bool accepted = false;
    double acceptance_probability = 0.0;
    bool overflow = false;
};

/// log q(to | from) of the Langevin proposal, up to the constant shared by both directions:
/// -|to - from + dt beta grad E(from)|^2 / (4 dt).
double langevin_log_proposal(const GasParams& params, std::span<const Point> from,
                             std::span<const Point> from_gradient, std::span<const Point> to, double dt);

/// log of the Metropolis-Hastings ratio pi(y) q(x | y) / (pi(x) q(y | x)) for the Langevin
/// proposal, pi = exp(-beta E_n). -inf when y has coincident points.
double mala_log_ratio(const GasParams& params, std::span<const Point> x, std::span<const Point> y, double dt);

/// One full-vector Metropolis-adjusted Langevin step with dt = state.step_size:
/// x' = x - dt beta grad E(x) + sqrt(2 dt) xi. Throws NotIntegrable.
StepOutcome mala_step(ChainState& state, const GasParams& params);

/// Hamiltonian step with `leapfrog_steps` leapfrog substeps of size sqrt(2 dt).
/// One substep gives the same proposal as mala_step.
StepOutcome hmc_step(ChainState& state, const GasParams& params, int leapfrog_steps);

struct Schedule {
    std::uint64_t steps = 1000000;
    double burn_in_fraction = 0.9;
    std::uint64_t thinning = 1;
    double dt_init = 0.5;
    double target_acceptance = 0.574;
    int leapfrog_steps = 1;
    InitMode init = InitMode::EquilibriumRadial;
    double adaptation_rate = 0.05;  ///< gain of the log step-size update during burn-in
    std::uint64_t validate_every = 1000;
    std::uint64_t trace_points = 1000;  ///< size of the energy trace subsample

    /// Throws InvalidParams for a malformed schedule.
    void validate() const;
    std::uint64_t burn_in_steps() const;
};

struct ChainDiagnostics {
    double acceptance_rate = 0.0;  ///< after burn-in
    double burn_in_acceptance_rate = 0.0;
    double final_dt = 0.0;
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
    std::uint64_t overflow_count = 0;
    double max_cache_drift = 0.0;  ///< largest |cached - recomputed| energy seen at a check
    std::vector<std::uint64_t> trace_steps;
    std::vector<double> energy_trace;
};

struct ChainResult {
    GasParams params;
    std::uint64_t seed = 0;
    std::int64_t chain_id = 0;
    std::vector<Configuration> configs;  ///< thinned post-burn-in configurations
    std::vector<RadialSample> samples;   ///< moduli of the same configurations
    ChainDiagnostics diagnostics;
};

/// Runs one chain on the stream make_stream(seed, chain_id). The step size adapts
/// multiplicatively toward the target acceptance during burn-in and is frozen afterwards.
ChainResult run_chain(const GasParams& params, const Schedule& schedule, std::uint64_t seed,
                      std::int64_t chain_id = 0);

/// Independent chains 0..chains-1; output order is by chain id whatever `threads` is.
std::vector<ChainResult> run_chains(const GasParams& params, const Schedule& schedule, std::uint64_t seed,
                                    int chains, int threads = 1);

/// All moduli of all emitted configurations, chain by chain.
std::vector<double> pooled_moduli(const std::vector<ChainResult>& results);

}  // namespace jellium
