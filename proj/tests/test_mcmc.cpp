#include <doctest.h>

#include <jellium/errors.hpp>
#include <jellium/exact_radii.hpp>
#include <jellium/mcmc.hpp>
#include <jellium/stats.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace jellium;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a jellium::Error");
    return ErrorCode::Io;
}

Configuration random_config(int n, double scale, RngStream& rng) {
    Configuration c(n);
    for (Point& p : c)
        p = {scale * (2 * uniform01(rng) - 1), scale * (2 * uniform01(rng) - 1)};
    return c;
}

/// k-th order statistic (0-based) of every emitted configuration.
std::vector<double> order_statistic(const std::vector<RadialSample>& samples, int k) {
    std::vector<double> out;
    for (const RadialSample& s : samples) {
        std::vector<double> m = s.moduli();
        std::nth_element(m.begin(), m.begin() + k, m.end());
        out.push_back(m[k]);
    }
    return out;
}

}  // namespace

TEST_CASE("initial configurations") {
    const GasParams p(200, 2.0, 800.0, 2.0);
    const Configuration eq = initialize_config(p, InitMode::EquilibriumRadial, 5);
    const Configuration disc = initialize_config(p, InitMode::UniformDisc, 5);
    CHECK(eq.size() == 200);
    double max_eq = 0, max_disc = 0;
    for (const Point& x : eq)
        max_eq = std::max(max_eq, norm(x));
    for (const Point& x : disc)
        max_disc = std::max(max_disc, norm(x));
    CHECK(max_eq <= 1.0);
    CHECK(max_disc <= 2.0);
    CHECK(max_disc > 1.0);
    const Configuration again = initialize_config(p, InitMode::EquilibriumRadial, 5);
    for (std::size_t i = 0; i < eq.size(); ++i) {
        CHECK(eq[i].x == again[i].x);
        CHECK(eq[i].y == again[i].y);
    }
}

TEST_CASE("chain state construction") {
    const GasParams p(2, 2.0, 3.0, 1.0);
    CHECK(code_of([&] { make_chain_state(p, {{0.1, 0.1}, {0.1, 0.1}}, 0.1, make_stream(1, 0)); }) ==
          ErrorCode::CoincidentPoints);
    CHECK(code_of([&] { make_chain_state(GasParams(2, 2.0, 2.0, 1.0), {{0, 0}, {1, 0}}, 0.1, make_stream(1, 0)); }) ==
          ErrorCode::NotIntegrable);
    CHECK(code_of([&] { make_chain_state(p, {{0, 0}, {1, 0}}, 0.0, make_stream(1, 0)); }) == ErrorCode::InvalidParams);
    const ChainState s = make_chain_state(p, {{0, 0}, {0.5, 0}}, 0.1, make_stream(1, 0));
    CHECK(s.energy == doctest::Approx(total_energy(p, s.positions)));
    CHECK(s.acceptance_ratio() == 0.0);
}

TEST_CASE("Metropolis-Hastings ratio satisfies detailed balance") {
    RngStream rng = make_stream(77, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(uniform01(rng) * 10);
        const double beta = 0.5 + 4 * uniform01(rng);
        const GasParams p(n, beta, n + 1.0 + 3 * uniform01(rng), 0.5 + 2 * uniform01(rng));
        const Configuration x = random_config(n, 1.5 * p.R(), rng);
        const Configuration y = random_config(n, 1.5 * p.R(), rng);
        const double dt = 1e-3 + 0.5 * uniform01(rng);
        const double fwd = mala_log_ratio(p, x, y, dt);
        const double bwd = mala_log_ratio(p, y, x, dt);
        // pi(x) q(y|x) a(x->y) = pi(y) q(x|y) a(y->x) holds iff the two log ratios are opposite
        CHECK(std::abs(fwd + bwd) <= 1e-10 * std::max(1.0, std::abs(fwd)));
        const double ax = std::min(0.0, fwd), ay = std::min(0.0, bwd);
        // log pi(x) + log q(y|x) + log a(x->y) - (same with x, y swapped)
        std::vector<Point> gx, gy;
        const double ex = energy_and_gradient(p, x, gx), ey = energy_and_gradient(p, y, gy);
        const double lhs = -beta * ex + langevin_log_proposal(p, x, gx, y, dt) + ax;
        const double rhs = -beta * ey + langevin_log_proposal(p, y, gy, x, dt) + ay;
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
    }
}

TEST_CASE("a proposal equal to the current state is always accepted") {
    const GasParams p(1, 2.0, 2.0, 1.0);
    const Configuration origin{{0.0, 0.0}};
    CHECK(mala_log_ratio(p, origin, origin, 0.5) == 0.0);
    RngStream rng = make_stream(1, 1);
    const Configuration x = random_config(5, 1.0, rng);
    CHECK(mala_log_ratio(GasParams(5, 2.0, 7.0, 1.0), x, x, 0.3) == 0.0);
    Configuration y = x;
    y[1] = y[0];
    CHECK(mala_log_ratio(GasParams(5, 2.0, 7.0, 1.0), x, y, 0.3) == -INFINITY);
}

TEST_CASE("mala_step uses the Langevin proposal and the stated acceptance probability") {
    const GasParams p(6, 3.0, 8.0, 1.5);
    RngStream init = make_stream(9, 0);
    ChainState s = make_chain_state(p, random_config(6, 1.0, init), 0.05, make_stream(9, 1));
    for (int step = 0; step < 50; ++step) {
        // replay the proposal from a copy of the stream
        RngStream replay = s.rng;
        std::normal_distribution<double> normal;
        const double dt = s.step_size;
        Configuration y(6);
        for (int i = 0; i < 6; ++i) {
            const double xi_x = normal(replay), xi_y = normal(replay);
            y[i] = {s.positions[i].x - dt * p.beta() * s.gradient[i].x + std::sqrt(2 * dt) * xi_x,
                    s.positions[i].y - dt * p.beta() * s.gradient[i].y + std::sqrt(2 * dt) * xi_y};
        }
        const double expected = std::min(1.0, std::exp(mala_log_ratio(p, s.positions, y, dt)));
        const StepOutcome out = mala_step(s, p);
        CHECK(out.acceptance_probability == doctest::Approx(expected).epsilon(1e-9));
        if (out.accepted)
            for (int i = 0; i < 6; ++i)
                CHECK(s.positions[i].x == doctest::Approx(y[i].x).epsilon(1e-14));
        CHECK(s.energy == doctest::Approx(total_energy(p, s.positions)).epsilon(1e-12));
    }
    CHECK(s.proposed == 50);
    CHECK(s.accepted <= s.proposed);
    CHECK(code_of([&] { mala_step(s, GasParams(6, 2.0, 6.0, 1.5)); }) == ErrorCode::NotIntegrable);
}

TEST_CASE("one leapfrog step reproduces MALA") {
    const GasParams p(5, 2.0, 9.0, 2.0);
    RngStream init = make_stream(21, 0);
    const Configuration x0 = random_config(5, 1.0, init);
    ChainState a = make_chain_state(p, x0, 0.02, make_stream(21, 1));
    ChainState b = make_chain_state(p, x0, 0.02, make_stream(21, 1));
    for (int step = 0; step < 200; ++step) {
        const StepOutcome oa = mala_step(a, p);
        const StepOutcome ob = hmc_step(b, p, 1);
        CHECK(oa.accepted == ob.accepted);
        CHECK(oa.acceptance_probability == doctest::Approx(ob.acceptance_probability).epsilon(1e-9));
    }
    for (int i = 0; i < 5; ++i) {
        CHECK(a.positions[i].x == doctest::Approx(b.positions[i].x).epsilon(1e-10));
        CHECK(a.positions[i].y == doctest::Approx(b.positions[i].y).epsilon(1e-10));
    }
    CHECK(code_of([&] { hmc_step(b, p, 0); }) == ErrorCode::InvalidParams);
}

TEST_CASE("schedule validation") {
    Schedule s;
    CHECK_NOTHROW(s.validate());
    CHECK(s.burn_in_steps() == 900000);
    s.burn_in_fraction = 1.0;
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidParams);
    s = Schedule{};
    s.thinning = 0;
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidParams);
    s = Schedule{};
    s.target_acceptance = 1.0;
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidParams);
    s = Schedule{};
    s.dt_init = -1;
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidParams);
}

TEST_CASE("run_chain: empty output, thinning and determinism") {
    const GasParams p(8, 2.0, 32.0, 2.0);
    Schedule s;
    s.steps = 0;
    CHECK(run_chain(p, s, 3).samples.empty());

    s.steps = 2000;
    s.burn_in_fraction = 0.5;
    s.thinning = 10;
    const ChainResult a = run_chain(p, s, 3, 4);
    const ChainResult b = run_chain(p, s, 3, 4);
    CHECK(a.samples.size() == 100);
    CHECK(a.configs.size() == 100);
    CHECK(a.samples.front().trial_id() == 4000000000LL);
    for (std::size_t k = 0; k < a.configs.size(); ++k)
        for (int i = 0; i < 8; ++i) {
            CHECK(a.configs[k][i].x == b.configs[k][i].x);
            CHECK(a.configs[k][i].y == b.configs[k][i].y);
        }
    CHECK(a.diagnostics.final_dt == b.diagnostics.final_dt);
    CHECK(a.diagnostics.proposed == 1000);
    CHECK(a.diagnostics.acceptance_rate >= 0.0);
    CHECK(a.diagnostics.acceptance_rate <= 1.0);
    CHECK(a.diagnostics.max_cache_drift < 1e-9);
    CHECK(a.diagnostics.energy_trace.size() == a.diagnostics.trace_steps.size());
    CHECK_FALSE(a.diagnostics.energy_trace.empty());

    const auto one = run_chains(p, s, 3, 3, 1);
    const auto many = run_chains(p, s, 3, 3, 3);
    REQUIRE(one.size() == 3);
    for (int c = 0; c < 3; ++c) {
        CHECK(one[c].chain_id == c);
        CHECK(pooled_moduli({one[c]}) == pooled_moduli({many[c]}));
    }
    CHECK(pooled_moduli(one).size() == 3 * 100 * 8);
}

TEST_CASE("step size adapts during burn-in and is frozen afterwards") {
    const GasParams p(8, 2.0, 32.0, 2.0);
    Schedule s;
    s.steps = 20000;
    s.burn_in_fraction = 0.5;
    s.thinning = 10000;
    s.dt_init = 0.5;
    const ChainResult r = run_chain(p, s, 1);
    CHECK(r.diagnostics.final_dt != 0.5);
    CHECK(std::abs(r.diagnostics.acceptance_rate - s.target_acceptance) < 0.1);

    Schedule frozen = s;
    frozen.burn_in_fraction = 0.0;
    CHECK(run_chain(p, frozen, 1).diagnostics.final_dt == 0.5);
}

TEST_CASE("beta = 4 chains stay finite and collision free") {
    const GasParams p(50, 4.0, 60.0, 1.0);
    Schedule s;
    s.steps = 20000;
    s.burn_in_fraction = 0.5;
    s.thinning = 100;
    const ChainResult r = run_chain(p, s, 8);
    CHECK(r.configs.size() == 100);
    for (const Configuration& c : r.configs) {
        CHECK(std::isfinite(total_energy(p, c)));
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j)
                REQUIRE((c[i].x != c[j].x || c[i].y != c[j].y));
    }
    CHECK(r.diagnostics.max_cache_drift < 1e-9);
}

TEST_CASE("beta = 2 order statistics of MCMC moduli match the exact sampler") {
    struct Case {
        int n;
        std::vector<int> ranks;
        std::uint64_t steps;
        std::uint64_t thinning;
        int chains;
    };
    const std::vector<Case> cases = {
        {2, {0, 1}, 100000, 10, 2}, {3, {0, 1, 2}, 100000, 10, 2}, {8, {0, 4, 7}, 60000, 20, 4},
        {64, {0, 32, 63}, 25000, 20, 4}};
    for (const Case& c : cases) {
        const GasParams p(c.n, 2.0, 4.0 * c.n, 2.0);
        Schedule s;
        s.steps = c.steps;
        s.burn_in_fraction = 0.1;
        s.thinning = c.thinning;
        std::vector<RadialSample> mcmc;
        for (const ChainResult& r : run_chains(p, s, 100 + c.n, c.chains))
            mcmc.insert(mcmc.end(), r.samples.begin(), r.samples.end());
        const auto exact = sample_radii_batch(p, 10000, 200 + c.n);
        for (int k : c.ranks) {
            CAPTURE(c.n);
            CAPTURE(k);
            CHECK(ks_two_sample_statistic(order_statistic(exact, k), order_statistic(mcmc, k)) < 0.05);
        }
    }
}
