#include <jellium/mcmc.hpp>

#include <jellium/errors.hpp>
#include <jellium/parallel.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace jellium {

namespace {

double squared_norm(std::span<const Point> v) {
    double s = 0.0;
    for (const Point& p : v)
        s += p.x * p.x + p.y * p.y;
    return s;
}

void fill_gaussian(std::vector<Point>& xi, std::size_t n, RngStream& rng) {
    std::normal_distribution<double> normal;
    xi.resize(n);
    for (Point& p : xi) {
        p.x = normal(rng);
        p.y = normal(rng);
    }
}

StepOutcome accept_or_reject(ChainState& state, double log_ratio, Configuration& proposal, double proposal_energy,
                             std::vector<Point>& proposal_gradient) {
    StepOutcome out;
    ++state.proposed;
    if (std::isnan(log_ratio) || (std::isinf(log_ratio) && log_ratio > 0.0)) {
        out.overflow = true;
        ++state.overflow_count;
        return out;
    }
    out.acceptance_probability = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    if (log_ratio >= 0.0 || uniform01(state.rng) < out.acceptance_probability) {
        out.accepted = true;
        ++state.accepted;
        state.positions.swap(proposal);
        state.gradient.swap(proposal_gradient);
        state.energy = proposal_energy;
    }
    return out;
}

}  // namespace

ChainState make_chain_state(const GasParams& params, Configuration positions, double step_size, RngStream rng) {
    require_integrable(params);
    if (!(step_size > 0.0) || !std::isfinite(step_size))
        throw Error(ErrorCode::InvalidParams, "step size must be positive and finite");
    ChainState s;
    s.positions = std::move(positions);
    s.energy = energy_and_gradient(params, s.positions, s.gradient);
    if (std::isinf(s.energy))
        throw Error(ErrorCode::CoincidentPoints, "initial configuration has coincident particles");
    s.step_size = step_size;
    s.rng = std::move(rng);
    return s;
}

Configuration initialize_config(const GasParams& params, InitMode mode, RngStream& rng) {
    const double radius =
        mode == InitMode::UniformDisc ? params.R() : params.R() / std::sqrt(std::max(params.lambda(), 1.0));
    Configuration c(static_cast<std::size_t>(params.n()));
    for (Point& p : c) {
        const double r = radius * std::sqrt(uniform01(rng));
        const double theta = 2.0 * std::numbers::pi * uniform01(rng);
        p = {r * std::cos(theta), r * std::sin(theta)};
    }
    return c;
}

Configuration initialize_config(const GasParams& params, InitMode mode, std::uint64_t seed) {
    RngStream rng = make_stream(seed, 0);
    return initialize_config(params, mode, rng);
}

double langevin_log_proposal(const GasParams& params, std::span<const Point> from,
                             std::span<const Point> from_gradient, std::span<const Point> to, double dt) {
    const double b = params.beta();
    double s = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        const double dx = to[i].x - from[i].x + dt * b * from_gradient[i].x;
        const double dy = to[i].y - from[i].y + dt * b * from_gradient[i].y;
        s += dx * dx + dy * dy;
    }
    return -s / (4.0 * dt);
}

double mala_log_ratio(const GasParams& params, std::span<const Point> x, std::span<const Point> y, double dt) {
    std::vector<Point> gx;
    std::vector<Point> gy;
    const double ex = energy_and_gradient(params, x, gx);
    const double ey = energy_and_gradient(params, y, gy);
    if (std::isinf(ey))
        return -std::numeric_limits<double>::infinity();
    return -params.beta() * (ey - ex) + langevin_log_proposal(params, y, gy, x, dt) -
           langevin_log_proposal(params, x, gx, y, dt);
}

StepOutcome mala_step(ChainState& state, const GasParams& params) {
    require_integrable(params);
    const std::size_t n = state.positions.size();
    const double dt = state.step_size;
    const double b = params.beta();
    std::vector<Point> xi;
    fill_gaussian(xi, n, state.rng);
    const double noise = std::sqrt(2.0 * dt);
    Configuration proposal(n);
    for (std::size_t i = 0; i < n; ++i) {
        proposal[i].x = state.positions[i].x - dt * b * state.gradient[i].x + noise * xi[i].x;
        proposal[i].y = state.positions[i].y - dt * b * state.gradient[i].y + noise * xi[i].y;
    }
    std::vector<Point> grad;
    const double energy = energy_and_gradient(params, proposal, grad);
    if (std::isinf(energy) && energy > 0.0) {
        ++state.proposed;
        return {};
    }
    // log q(x | x') - log q(x' | x); the forward term is -|xi|^2 / 2
    const double log_ratio = -b * (energy - state.energy) +
                             langevin_log_proposal(params, proposal, grad, state.positions, dt) +
                             0.5 * squared_norm(xi);
    return accept_or_reject(state, log_ratio, proposal, energy, grad);
}

StepOutcome hmc_step(ChainState& state, const GasParams& params, int leapfrog_steps) {
    require_integrable(params);
    if (leapfrog_steps < 1)
        throw Error(ErrorCode::InvalidParams, "leapfrog_steps must be at least 1");
    const std::size_t n = state.positions.size();
    const double eps = std::sqrt(2.0 * state.step_size);
    const double b = params.beta();
    std::vector<Point> p;
    fill_gaussian(p, n, state.rng);
    const double h0 = b * state.energy + 0.5 * squared_norm(p);

    Configuration x = state.positions;
    std::vector<Point> grad = state.gradient;
    double energy = state.energy;
    for (std::size_t i = 0; i < n; ++i) {
        p[i].x -= 0.5 * eps * b * grad[i].x;
        p[i].y -= 0.5 * eps * b * grad[i].y;
    }
    for (int l = 1; l <= leapfrog_steps; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            x[i].x += eps * p[i].x;
            x[i].y += eps * p[i].y;
        }
        energy = energy_and_gradient(params, x, grad);
        if (std::isinf(energy) && energy > 0.0) {
            ++state.proposed;
            return {};
        }
        const double kick = l < leapfrog_steps ? eps : 0.5 * eps;
        for (std::size_t i = 0; i < n; ++i) {
            p[i].x -= kick * b * grad[i].x;
            p[i].y -= kick * b * grad[i].y;
        }
    }
    const double h1 = b * energy + 0.5 * squared_norm(p);
    return accept_or_reject(state, h0 - h1, x, energy, grad);
}

void Schedule::validate() const {
    std::ostringstream os;
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
        os << "burn_in_fraction must lie in [0, 1); ";
    if (thinning < 1)
        os << "thinning must be at least 1; ";
    if (!(dt_init > 0.0) || !std::isfinite(dt_init))
        os << "dt_init must be positive; ";
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
        os << "target_acceptance must lie in (0, 1); ";
    if (leapfrog_steps < 1)
        os << "leapfrog_steps must be at least 1; ";
    if (!(adaptation_rate >= 0.0))
        os << "adaptation_rate must be nonnegative; ";
    if (validate_every < 1)
        os << "validate_every must be at least 1; ";
    const std::string msg = os.str();
    if (!msg.empty())
        throw Error(ErrorCode::InvalidParams, "invalid schedule: " + msg.substr(0, msg.size() - 2));
}

std::uint64_t Schedule::burn_in_steps() const {
    return static_cast<std::uint64_t>(std::floor(burn_in_fraction * static_cast<double>(steps)));
}

ChainResult run_chain(const GasParams& params, const Schedule& schedule, std::uint64_t seed, std::int64_t chain_id) {
    schedule.validate();
    require_integrable(params);
    RngStream rng = make_stream(seed, static_cast<std::uint64_t>(chain_id));
    Configuration init = initialize_config(params, schedule.init, rng);
    ChainState state = make_chain_state(params, std::move(init), schedule.dt_init, std::move(rng));

    ChainResult result{params, seed, chain_id, {}, {}, {}};
    ChainDiagnostics& diag = result.diagnostics;
    const std::uint64_t burn_in = schedule.burn_in_steps();
    const std::uint64_t stride = std::max<std::uint64_t>(1, schedule.steps / std::max<std::uint64_t>(1, schedule.trace_points));
    std::uint64_t burn_accepted = 0;
    std::uint64_t emitted = 0;

    for (std::uint64_t step = 0; step < schedule.steps; ++step) {
        const StepOutcome out = schedule.leapfrog_steps == 1 ? mala_step(state, params)
                                                            : hmc_step(state, params, schedule.leapfrog_steps);
        if (step < burn_in) {
            burn_accepted += out.accepted ? 1 : 0;
            state.step_size *=
                std::exp(schedule.adaptation_rate * (out.acceptance_probability - schedule.target_acceptance));
        }
        if (step + 1 == burn_in) {
            state.accepted = 0;
            state.proposed = 0;
        }
        if ((step + 1) % schedule.validate_every == 0) {
            const double fresh = total_energy(params, state.positions);
            diag.max_cache_drift = std::max(diag.max_cache_drift, std::abs(fresh - state.energy));
            state.energy = fresh;
        }
        if (step % stride == 0) {
            diag.trace_steps.push_back(step);
            diag.energy_trace.push_back(state.energy);
        }
        if (step >= burn_in && (step - burn_in + 1) % schedule.thinning == 0) {
            std::vector<double> moduli;
            moduli.reserve(state.positions.size());
            for (const Point& p : state.positions)
                moduli.push_back(norm(p));
            result.configs.push_back(state.positions);
            result.samples.emplace_back(std::move(moduli), params, seed,
                                        chain_id * 1000000000LL + static_cast<std::int64_t>(emitted));
            ++emitted;
        }
    }
    diag.burn_in_acceptance_rate = burn_in == 0 ? 0.0 : static_cast<double>(burn_accepted) / burn_in;
    diag.acceptance_rate = state.acceptance_ratio();
    diag.final_dt = state.step_size;
    diag.proposed = state.proposed;
    diag.accepted = state.accepted;
    diag.overflow_count = state.overflow_count;
    return result;
}

std::vector<ChainResult> run_chains(const GasParams& params, const Schedule& schedule, std::uint64_t seed,
                                    int chains, int threads) {
    if (chains < 0)
        throw Error(ErrorCode::InvalidParams, "number of chains must be nonnegative");
    std::vector<std::optional<ChainResult>> slots(static_cast<std::size_t>(chains));
    parallel_for(slots.size(), threads,
                 [&](std::size_t c) { slots[c] = run_chain(params, schedule, seed, static_cast<std::int64_t>(c)); });
    std::vector<ChainResult> out;
    out.reserve(slots.size());
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

std::vector<double> pooled_moduli(const std::vector<ChainResult>& results) {
    std::vector<double> out;
    for (const ChainResult& r : results)
        for (const RadialSample& s : r.samples)
            out.insert(out.end(), s.moduli().begin(), s.moduli().end());
    return out;
}

}  // namespace jellium
