#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace jellium {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }

using Configuration = std::vector<Point>;

/// Parameters (n, beta, alpha, R) of one jellium ensemble: n unit charges at
/// inverse temperature beta, background of total charge alpha spread
/// uniformly on the disc of radius R.
class GasParams {
public:
    /// Throws Error(InvalidParams) unless n >= 1 and beta, alpha, R > 0.
    GasParams(int n, double beta, double alpha, double R);

    int n() const noexcept { return n_; }
    double beta() const noexcept { return beta_; }
    double alpha() const noexcept { return alpha_; }
    double R() const noexcept { return R_; }

    double lambda() const noexcept { return alpha_ / n_; }
    double kappa_n() const noexcept { return alpha_ - n_; }

    /// beta * (alpha - n + 1) > 2, strict.
    bool is_integrable() const noexcept;

    friend bool operator==(const GasParams&, const GasParams&) = default;

private:
    int n_;
    double beta_;
    double alpha_;
    double R_;
};

struct IntegrabilityCheck {
    bool integrable;
    double margin;  ///< beta * (alpha - n + 1) - 2
};

IntegrabilityCheck check_integrability(const GasParams& params);

/// Throws Error(NotIntegrable) carrying the margin when the partition function diverges.
void require_integrable(const GasParams& params);

// --- background potential -------------------------------------------------

/// Logarithmic potential of the uniform probability measure on the disc D_R.
double background_potential_U(const GasParams& params, Point x);
double background_potential_U_radial(double R, double r);

/// V = -(alpha/n) U. Quadratic inside D_R, (alpha/n) log|x| outside.
double external_potential_V(const GasParams& params, Point x);
double external_potential_V_radial(const GasParams& params, double r);

/// dV/dr, continuous across r = R.
double external_potential_V_radial_derivative(const GasParams& params, double r);

/// Laplacian of V, i.e. 2 alpha / (n R^2) inside the disc and 0 outside.
double external_potential_V_laplacian(const GasParams& params, double r);

Point external_potential_V_gradient(const GasParams& params, Point x);

// --- energies -------------------------------------------------------------

/// E_n = sum_{i<j} -log|x_i - x_j| + n sum_i V(x_i). Coincident particles give +inf
/// (callers test with std::isinf); the function never throws for them.
double total_energy(const GasParams& params, std::span<const Point> config);

/// Gradient of E_n per particle. Throws Error(CoincidentPoints) when two particles coincide.
std::vector<Point> energy_gradient(const GasParams& params, std::span<const Point> config);

/// Energy and gradient in a single O(n^2) pass. Returns +inf energy and leaves
/// `gradient` unspecified when two particles coincide.
double energy_and_gradient(const GasParams& params, std::span<const Point> config,
                           std::vector<Point>& gradient);

// --- partition function ---------------------------------------------------

struct QuadratureSpec {
    /// Integrate only over configurations with every |x_i| <= max_radius.
    double max_radius = std::numeric_limits<double>::infinity();
    double relative_tolerance = 1e-10;
};

struct QuadratureResult {
    double value;
    double error_estimate;
};

/// Z_n = int exp(-beta E_n) over (R^2)^n for n in {1, 2}, by radial/angular quadrature.
/// Throws NotIntegrable or NOverLimit.
QuadratureResult partition_function_smalln(const GasParams& params, const QuadratureSpec& spec = {});

// --- edge scalings --------------------------------------------------------

/// c_n = log n - 2 log log n - log(2 pi); NaN for n < 2.
double edge_log_correction(int n);

/// Smallest n with c_m > 0 for every m >= n (computed once by scanning).
int min_n_positive_cn();

struct EdgeScalings {
    double a_n;  ///< sqrt(n c_n) / C_n
    double b_n;  ///< C_n (1 + sqrt(c_n / n) / 2)
    double c_n;
    double C_n;  ///< sqrt(n / alpha) R
};

/// Throws Error(CnNotPositive) when c_n <= 0.
EdgeScalings edge_scalings(const GasParams& params);

}  // namespace jellium
