#pragma once

#include <jellium/model.hpp>

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace jellium {

/// Radially symmetric probability density phi(r) (per unit area) on a grid
/// 0 = r_0 < ... < r_m. Between nodes phi is linear; beyond support_radius it is
/// zero, so a grid node sits at the support edge.
struct EquilibriumProfile {
    std::vector<double> grid;
    std::vector<double> density;
    double mass = 0.0;
    double residual = 0.0;  ///< sup-norm of the PDE defect on interior nodes (0 for analytic profiles)
    double farfield_exponent = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    double support_radius = std::numeric_limits<double>::infinity();
    std::vector<double> residual_history;  ///< Newton residual per iteration

    double density_at(double r) const;
    double r_max() const { return grid.back(); }
};

/// Structural checks: strictly increasing grid from 0, matching sizes, finite
/// nonnegative density. Throws InvalidParams.
void validate_profile(const EquilibriumProfile& profile);

/// 2 pi int_0^r s phi(s) ds, exact for the piecewise-linear density.
double profile_cumulative_mass(const EquilibriumProfile& profile, double r);
double profile_mass(const EquilibriumProfile& profile);

/// Rescales the density to mass 1 and updates `mass`. Throws NonNormalized for zero mass.
void normalize_profile(EquilibriumProfile& profile);

/// U(r) = -int log max(r, s) dmu(s), the logarithmic potential of the radial measure.
double profile_potential(const EquilibriumProfile& profile, double r);

/// Potential of the uniform probability measure on the disc of radius rho:
/// (1 - r^2/rho^2)/2 - log rho inside, -log r outside.
double uniform_disc_potential(double rho, double r);

/// Coulomb energy (1/2) int int -log|x - y| dmu dmu.
double coulomb_self_energy(const EquilibriumProfile& profile);

/// Self-energy of the uniform law on a disc of radius rho: 1/8 - (log rho)/2.
double uniform_disc_self_energy(double rho);

/// Uniform density lambda / (pi R^2) on [0, R / sqrt(lambda)]. Throws LambdaBelowOne.
EquilibriumProfile low_temperature_equilibrium(const GasParams& params, int intervals = 1024);
EquilibriumProfile low_temperature_equilibrium(double lambda, double R, int intervals = 1024);

/// Uniform density on an arbitrary disc, for comparisons and negative controls.
EquilibriumProfile uniform_disc_profile(double radius, double grid_extent, int intervals = 1024);

struct EulerLagrangeResidual {
    double constant = 0.0;  ///< mean of U + V over the probes inside the support
    double on_support_deviation = 0.0;
    double off_support_min_margin = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
    bool flagged = false;  ///< deviation > tolerance or margin < -tolerance
};

/// Probes U + V on the given radii. The support is [0, support_radius].
EulerLagrangeResidual euler_lagrange_residual(const EquilibriumProfile& profile, const GasParams& params,
                                              std::span<const double> probes, double tolerance = 1e-8);

/// Evenly spaced probes on [0, 2 max(R, support radius)].
std::vector<double> default_probe_radii(const EquilibriumProfile& profile, const GasParams& params, int count = 401);

struct CrossoverSpec {
    int intervals = 65536;
    double r_max = 0.0;  ///< 0 picks 20 R
    double inside_fraction = 0.25;  ///< share of intervals spent on [0, R]
    double tolerance = 1e-10;  ///< Newton stop on the discrete flux balance, relative to kappa
    int max_iterations = 200;
};

/// Nodes uniform on [0, R] (with R a node), then geometric up to r_max.
std::vector<double> crossover_grid(double R, const CrossoverSpec& spec);

/// Solves (1/r)(r (log phi)')' = 2 pi kappa (phi - lambda 1_{r <= R} / (pi R^2)) for a
/// probability density phi > 0, with (log phi)'(0) = 0 and r (log phi)' = kappa (1 - lambda)
/// at r_max. Finite volumes in u = log phi; the discrete problem is the minimizer of a
/// strictly convex functional and is solved by damped Newton.
/// Throws SubcriticalParameters when kappa (lambda - 1) <= 2, NoConvergence.
EquilibriumProfile solve_crossover(double kappa, double lambda, double R, const CrossoverSpec& spec = {});

/// max_i |r_i u'(r_i) - kappa (M(r_i) - lambda min(1, r_i^2 / R^2))| over interior nodes,
/// with u' from second-order finite differences and M the cumulative mass.
double crossover_pde_residual(const EquilibriumProfile& profile, double kappa, double lambda, double R);

/// Least-squares slope of log phi against log r on [r_max / 2, r_max].
double fitted_farfield_exponent(const EquilibriumProfile& profile);

enum class FunctionalMode { LowTemp, Crossover };

struct FunctionalSpec {
    FunctionalMode mode = FunctionalMode::LowTemp;
    double lambda = 1.0;
    double R = 1.0;
    double kappa = std::numeric_limits<double>::infinity();  ///< Crossover only
};

/// E(mu) + int V dmu with V = lambda ((r^2/R^2 - 1)/2 + log R) inside D_R and lambda log r
/// outside; Crossover adds (1/kappa) int phi log phi. Throws NonNormalized when the mass
/// is off by more than 1e-6, EntropyDiverges for a density without finite entropy.
double eval_rate_functional(const EquilibriumProfile& profile, const FunctionalSpec& spec);
double eval_rate_functional(const EquilibriumProfile& profile, const GasParams& params, FunctionalMode mode,
                            double kappa = std::numeric_limits<double>::infinity());

/// int phi log phi d(area).
double profile_entropy(const EquilibriumProfile& profile);

/// L1 distance (area measure) on [0, R] between the profile and lambda/(pi R^2) 1_{r <= R/sqrt(lambda)}.
double step_profile_l1_distance(const EquilibriumProfile& profile, double lambda, double R);

}  // namespace jellium
