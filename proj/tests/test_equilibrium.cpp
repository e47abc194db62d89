#include <doctest.h>

#include <jellium/equilibrium.hpp>
#include <jellium/errors.hpp>
#include <jellium/rng.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <numbers>

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

EquilibriumProfile tabulate(const std::function<double(double)>& f, double extent, int intervals,
                            double support = std::numeric_limits<double>::infinity()) {
    EquilibriumProfile p;
    for (int i = 0; i <= intervals; ++i) {
        const double r = extent * i / intervals;
        p.grid.push_back(r);
        p.density.push_back(f(r));
    }
    p.support_radius = support;
    p.mass = profile_mass(p);
    return p;
}

/// (1/2) int int -log max(r, s) dm(r) dm(s), dm = 2 pi r f(r) dr, by nested adaptive
/// Gauss-Kronrod on both variables with the kink at s = r split out.
double self_energy_oracle(const std::function<double(double)>& f, double extent) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto dm = [&](double r) { return 2 * pi * r * f(r); };
    auto row = [&](double r) {
        if (r <= 0)
            return 0.0;
        const double below = GK::integrate(dm, 0.0, r, 12, 1e-13);
        const double above = GK::integrate([&](double s) { return dm(s) * std::log(s); }, r, extent, 12, 1e-13);
        return dm(r) * (-std::log(r) * below - above);
    };
    return 0.5 * GK::integrate(row, 0.0, extent, 12, 1e-12);
}

double closed_form_EV(double lambda, double R) {
    const double rho = R / std::sqrt(lambda);
    return 0.125 - 0.5 * std::log(rho) + 0.25 - lambda / 2 + lambda * std::log(R);
}

}  // namespace

TEST_CASE("low-temperature equilibrium examples") {
    const EquilibriumProfile one = low_temperature_equilibrium(1.0, 3.0);
    CHECK(one.support_radius == doctest::Approx(3.0));
    CHECK(one.density_at(1.0) == doctest::Approx(1.0 / (pi * 9.0)).epsilon(1e-15));

    const EquilibriumProfile p = low_temperature_equilibrium(GasParams(10, 2.0, 40.0, 2.0));
    CHECK(p.support_radius == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.density_at(0.5) == doctest::Approx(1.0 / pi).epsilon(1e-15));
    CHECK(p.density_at(1.5) == 0.0);
    CHECK(std::abs(p.mass - 1.0) < 1e-14);
    CHECK(std::abs(profile_mass(p) - 1.0) < 1e-14);
    CHECK(profile_cumulative_mass(p, 0.5) == doctest::Approx(0.25).epsilon(1e-14));
    for (double d : p.density)
        CHECK(d >= 0.0);

    CHECK(code_of([] { low_temperature_equilibrium(0.5, 1.0); }) == ErrorCode::LambdaBelowOne);
    CHECK(code_of([] { low_temperature_equilibrium(GasParams(10, 2.0, 9.0, 1.0)); }) == ErrorCode::LambdaBelowOne);
}

TEST_CASE("equilibrium density equals Delta V / (2 pi) inside the disc") {
    for (double lambda : {1.0, 2.5, 4.0, 17.0}) {
        const GasParams p(10, 2.0, 10 * lambda, 1.7);
        const EquilibriumProfile e = low_temperature_equilibrium(p);
        CHECK(external_potential_V_laplacian(p, 0.1) / (2 * pi) == doctest::Approx(e.density_at(0.0)).epsilon(1e-14));
    }
}

TEST_CASE("profile potential of a uniform disc matches its closed form") {
    const EquilibriumProfile p = uniform_disc_profile(1.3, 4.0, 256);
    for (double r : {0.0, 0.2, 1.0, 1.3, 2.0, 3.9, 10.0})
        CHECK(profile_potential(p, r) == doctest::Approx(uniform_disc_potential(1.3, r)).epsilon(1e-12));
}

TEST_CASE("Euler-Lagrange check for lambda = 4, R = 2") {
    const GasParams params(100, 2.0, 400.0, 2.0);
    const EquilibriumProfile good = low_temperature_equilibrium(params);
    const auto probes = default_probe_radii(good, params);
    const EulerLagrangeResidual el = euler_lagrange_residual(good, params, probes, 1e-10);
    CHECK(el.on_support_deviation < 1e-10);
    CHECK(el.off_support_min_margin >= -1e-10);
    CHECK_FALSE(el.flagged);
    // U + V = c with c = 1/2 + lambda (log R - 1/2) for a support of radius 1
    CHECK(el.constant == doctest::Approx(0.5 + 4 * (std::log(2.0) - 0.5)).epsilon(1e-10));

    const EquilibriumProfile wrong = uniform_disc_profile(2.0, 4.0);
    const EulerLagrangeResidual bad = euler_lagrange_residual(wrong, params, default_probe_radii(wrong, params));
    CHECK(bad.flagged);
    CHECK(bad.on_support_deviation > 0.5);
}

TEST_CASE("Euler-Lagrange check flags a 2% error in the support radius") {
    const GasParams params(100, 2.0, 400.0, 2.0);
    for (double rho : {0.98, 1.02}) {
        const EquilibriumProfile p = uniform_disc_profile(rho, 4.0);
        CHECK(euler_lagrange_residual(p, params, default_probe_radii(p, params)).flagged);
    }
}

TEST_CASE("self-energy of uniform discs") {
    CHECK(coulomb_self_energy(uniform_disc_profile(1.0, 2.0)) == doctest::Approx(0.125).epsilon(1e-12));
    for (double rho : {0.3, 1.0, 2.5, 7.0}) {
        CHECK(coulomb_self_energy(uniform_disc_profile(rho, 2 * rho)) ==
              doctest::Approx(uniform_disc_self_energy(rho)).epsilon(1e-12));
        CHECK(uniform_disc_self_energy(rho) == doctest::Approx(uniform_disc_self_energy(1.0) - 0.5 * std::log(rho)));
    }
}

TEST_CASE("self-energy against a nested double-integral oracle on three densities") {
    struct Density {
        const char* name;
        std::function<double(double)> f;
        double extent;
    };
    // cone and Gaussian normalized in closed form
    const double gauss_norm = pi * (1 - std::exp(-16.0));
    const std::vector<Density> cases = {
        {"uniform", [](double r) { return r <= 1.0 ? 1.0 / pi : 0.0; }, 1.0},
        {"cone", [](double r) { return r <= 1.0 ? 3.0 * (1 - r) / pi : 0.0; }, 1.0},
        {"gaussian", [gauss_norm](double r) { return std::exp(-r * r) / gauss_norm; }, 4.0},
    };
    for (const Density& d : cases) {
        CAPTURE(d.name);
        const EquilibriumProfile p = tabulate(d.f, d.extent, 4096);
        CHECK(std::abs(p.mass - 1.0) < 1e-6);
        const double oracle = self_energy_oracle(d.f, d.extent);
        CHECK(coulomb_self_energy(p) == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("rate functional at the equilibrium and under perturbations") {
    const double lambda = 4.0, R = 2.0;
    const GasParams params(100, 2.0, 400.0, R);
    const EquilibriumProfile eq = low_temperature_equilibrium(params);
    const double best = eval_rate_functional(eq, params, FunctionalMode::LowTemp);
    CHECK(best == doctest::Approx(closed_form_EV(lambda, R)).epsilon(1e-10));
    for (double l : {1.0, 2.0, 9.0})
        CHECK(eval_rate_functional(low_temperature_equilibrium(l, 1.5), FunctionalSpec{FunctionalMode::LowTemp, l, 1.5}) ==
              doctest::Approx(closed_form_EV(l, 1.5)).epsilon(1e-10));

    // mass-preserving radial bumps: take mass eps from the disc and put it in a bump elsewhere
    RngStream rng = make_stream(31, 0);
    const double level = lambda / (pi * R * R);
    for (int trial = 0; trial < 20; ++trial) {
        const double eps = 0.02 + 0.3 * uniform01(rng);
        const double centre = 0.2 + 2.5 * uniform01(rng);
        const double width = 0.05 + 0.3 * uniform01(rng);
        auto bump = [&](double r) { return std::max(0.0, 1 - std::abs(r - centre) / width); };
        const EquilibriumProfile shape = tabulate(bump, 4.0, 4000);
        auto f = [&](double r) {
            const double base = r <= 1.0 ? level * (1 - eps) : 0.0;
            return base + eps * bump(r) / shape.mass;
        };
        EquilibriumProfile p = tabulate(f, 4.0, 4000);
        normalize_profile(p);
        CHECK(eval_rate_functional(p, params, FunctionalMode::LowTemp) > best);
    }
}

TEST_CASE("profile checks and normalization errors") {
    EquilibriumProfile p = uniform_disc_profile(1.0, 2.0, 16);
    p.density[3] = -1.0;
    CHECK(code_of([&] { validate_profile(p); }) == ErrorCode::InvalidParams);
    EquilibriumProfile z = tabulate([](double) { return 0.0; }, 1.0, 8);
    CHECK(code_of([&] { normalize_profile(z); }) == ErrorCode::NonNormalized);
    EquilibriumProfile half = tabulate([](double) { return 0.5 / pi; }, 1.0, 8);
    CHECK(code_of([&] { eval_rate_functional(half, GasParams(1, 2, 2, 1), FunctionalMode::LowTemp); }) ==
          ErrorCode::NonNormalized);
    normalize_profile(half);
    CHECK(half.mass == doctest::Approx(1.0).epsilon(1e-14));
    EquilibriumProfile unsorted = uniform_disc_profile(1.0, 2.0, 16);
    std::swap(unsorted.grid[2], unsorted.grid[3]);
    CHECK(code_of([&] { validate_profile(unsorted); }) == ErrorCode::InvalidParams);
}

TEST_CASE("crossover solver: kappa = 10, lambda = 2, R = 1") {
    CrossoverSpec spec;
    spec.r_max = 20.0;
    const EquilibriumProfile p = solve_crossover(10.0, 2.0, 1.0, spec);
    CHECK(std::abs(p.mass - 1.0) < 1e-8);
    CHECK(std::abs(profile_mass(p) - 1.0) < 1e-8);
    CHECK(p.residual < 1e-6);
    CHECK(p.residual == doctest::Approx(crossover_pde_residual(p, 10.0, 2.0, 1.0)));
    CHECK(std::abs(p.farfield_exponent / -10.0 - 1.0) < 0.05);
    CHECK(p.r_max() == doctest::Approx(20.0));
    CHECK_FALSE(p.residual_history.empty());
    for (double d : p.density)
        CHECK(d > 0.0);
    CHECK(fitted_farfield_exponent(p) == doctest::Approx(p.farfield_exponent));
}

TEST_CASE("crossover solver: grid refinement") {
    CrossoverSpec coarse;
    coarse.r_max = 20.0;
    coarse.intervals = 8192;
    CrossoverSpec fine = coarse;
    fine.intervals = 16384;
    const double rc = solve_crossover(10.0, 2.0, 1.0, coarse).residual;
    const double rf = solve_crossover(10.0, 2.0, 1.0, fine).residual;
    MESSAGE("residual ratio on halving the spacing: " << rc / rf);
    CHECK(rc / rf >= 2.0);
}

TEST_CASE("crossover solver: gates and non-convergence") {
    CHECK(code_of([] { solve_crossover(2.0, 2.0, 1.0); }) == ErrorCode::SubcriticalParameters);
    CHECK(code_of([] { solve_crossover(1.0, 3.0, 1.0); }) == ErrorCode::SubcriticalParameters);
    CHECK(code_of([] { solve_crossover(10.0, 0.5, 1.0); }) == ErrorCode::SubcriticalParameters);
    CrossoverSpec tight;
    tight.intervals = 4096;
    tight.max_iterations = 1;
    tight.tolerance = 1e-14;
    CHECK(code_of([&] { solve_crossover(10.0, 2.0, 1.0, tight); }) == ErrorCode::NoConvergence);
}

TEST_CASE("crossover profile minimizes the crossover functional") {
    const double kappa = 10.0, lambda = 2.0, R = 1.0;
    CrossoverSpec spec;
    spec.intervals = 16384;
    spec.r_max = 20.0;
    const EquilibriumProfile p = solve_crossover(kappa, lambda, R, spec);
    const FunctionalSpec fs{FunctionalMode::Crossover, lambda, R, kappa};
    const double best = eval_rate_functional(p, fs);
    CHECK(std::isfinite(best));
    RngStream rng = make_stream(8, 8);
    for (int trial = 0; trial < 10; ++trial) {
        const double centre = 3 * uniform01(rng), width = 0.1 + uniform01(rng), amp = 0.05 + 0.3 * uniform01(rng);
        EquilibriumProfile q = p;
        for (std::size_t i = 0; i < q.grid.size(); ++i)
            q.density[i] *= std::exp(amp * std::max(0.0, 1 - std::abs(q.grid[i] - centre) / width));
        normalize_profile(q);
        CHECK(eval_rate_functional(q, fs) > best);
    }
}

TEST_CASE("crossover profiles approach the step profile as kappa grows (diagnostic)") {
    CrossoverSpec spec;
    spec.intervals = 16384;
    for (double kappa : {20.0, 200.0}) {
        const EquilibriumProfile p = solve_crossover(kappa, 4.0, 1.0, spec);
        const double l1 = step_profile_l1_distance(p, 4.0, 1.0);
        MESSAGE("kappa = " << kappa << ": L1 distance to the step profile on [0, R] = " << l1);
        CHECK(std::isfinite(l1));
        CHECK(l1 >= 0.0);
    }
}
