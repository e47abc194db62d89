#pragma once

#include <jellium/law.hpp>
#include <jellium/model.hpp>

#include <optional>
#include <string>

namespace jellium {

/// Heavy-tailed edge law with CDF prod_{k>=0} (1 - (R/t)^(2(k + kappa))) for t >= R.
struct HeavyTailLawL {
    double kappa = 1.0;
    double R = 1.0;
    double truncation_tol = 1e-12;

    /// Throws InvalidParams unless kappa, R and truncation_tol are positive.
    void validate() const;
};

/// Number of factors the truncated product keeps at t: the first K with
/// s^(K+kappa) / ((1-s)(1-s^(K+kappa))) < tol, s = (R/t)^2.
long truncation_terms_L(const HeavyTailLawL& law, double t);

double log_cdf_L(const HeavyTailLawL& law, double t);
double cdf_L(const HeavyTailLawL& law, double t);

/// Same product with an explicit number of factors, for truncation checks.
double cdf_L_terms(const HeavyTailLawL& law, double t, long terms);

/// Throws POutOfRange unless 0 < p < 1.
double quantile_L(const HeavyTailLawL& law, double p);

double cdf_gumbel(double t);
double quantile_gumbel(double p);

/// k-th factor e^(-x) sum_{j<k} x^j / j! with x = t^-2, i.e. Q(k, t^-2).
double spherical_factor(int k, double t);
double cdf_spherical_F(double t, double truncation_tol = 1e-12);
double quantile_spherical_F(double p, double truncation_tol = 1e-12);

struct GinibreScalings {
    double a_n;  ///< 2 sqrt(n c_n)
    double b_n;  ///< 1 + sqrt(c_n / n) / 2
    double c_n;
};

/// Throws CnNotPositive when c_n <= 0.
GinibreScalings ginibre_scalings(int n);

/// epsilon with epsilon * exp(kappa * epsilon) = 1.
struct EpsilonKappa {
    double kappa;
    double epsilon;
};

EpsilonKappa solve_epsilon_kappa(double kappa);

/// CDF of 2 kappa (xi_kappa - 1 - epsilon_kappa / 2) where xi_kappa ~ L(kappa, R = 1).
double crossover_cdf(double kappa, double y);

struct BridgeGrid {
    double y_min = -10.0;
    double y_max = 25.0;
    double step = 1e-3;
};

/// Sup over the grid of |crossover_cdf(kappa, y) - cdf_gumbel(y)|.
double crossover_to_gumbel_distance(double kappa, const BridgeGrid& grid = {});

enum class LawKind { HeavyTailL, Gumbel, SphericalF, ExactMax };

/// Identifies one reference law together with its parameters.
struct LimitLawSpec {
    LawKind kind = LawKind::Gumbel;
    double kappa = 1.0;
    double R = 1.0;
    double truncation_tol = 1e-12;
    std::optional<GasParams> params;  ///< ExactMax only

    std::string describe() const;
};

ContinuousLaw make_law(const LimitLawSpec& spec);

}  // namespace jellium
