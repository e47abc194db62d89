#include <jellium/equilibrium.hpp>

#include <jellium/errors.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace jellium {

namespace {

using boost::math::quadrature::gauss;
constexpr double kPi = std::numbers::pi;

/// Linear piece of the density on [a, b] with phi(a) = fa and slope q.
struct Piece {
    double a;
    double b;
    double fa;
    double q;

    double at(double s) const { return fa + q * (s - a); }
};

/// Calls f(piece) for each interval, cutting the density at the support radius.
template <class F>
void for_each_piece(const EquilibriumProfile& p, F&& f) {
    const double sr = p.support_radius;
    for (std::size_t i = 0; i + 1 < p.grid.size(); ++i) {
        const double a = p.grid[i];
        if (a >= sr)
            break;
        const double b = p.grid[i + 1];
        const double q = (p.density[i + 1] - p.density[i]) / (b - a);
        f(Piece{a, std::min(b, sr), p.density[i], q});
    }
}

/// int_a^s t phi(t) dt on one piece, exact.
double piece_moment(const Piece& pc, double s) {
    const double d = s - pc.a;
    return pc.fa * d * (pc.a + 0.5 * d) + pc.q * d * d * (0.5 * pc.a + d / 3.0);
}

template <class F>
double gl(F&& f, double a, double b) {
    if (b <= a)
        return 0.0;
    return gauss<double, 10>::integrate(f, a, b);
}

/// Antiderivative of s phi(s) log s on a piece, zero at s = 0.
double piece_log_moment(const Piece& pc, double s) {
    if (s <= 0.0)
        return 0.0;
    const double c0 = pc.fa - pc.q * pc.a;
    const double ls = std::log(s);
    return c0 * s * s * (ls / 2.0 - 0.25) + pc.q * s * s * s * (ls / 3.0 - 1.0 / 9.0);
}

double lambda_potential(double lambda, double R, double r) {
    if (r <= R)
        return lambda * (0.5 * (r * r / (R * R) - 1.0) + std::log(R));
    return lambda * std::log(r);
}

/// Derivative at x[e] of the quadratic through (x[k], u[k]), k = 0..2.
double quadratic_slope(const double (&x)[3], const double (&u)[3], int e) {
    double d = 0.0;
    for (int j = 0; j < 3; ++j) {
        double denom = 1.0;
        for (int k = 0; k < 3; ++k)
            if (k != j)
                denom *= x[j] - x[k];
        double num = 0.0;
        for (int l = 0; l < 3; ++l) {
            if (l == j)
                continue;
            double prod = 1.0;
            for (int k = 0; k < 3; ++k)
                if (k != j && k != l)
                    prod *= x[e] - x[k];
            num += prod;
        }
        d += u[j] * num / denom;
    }
    return d;
}

void require_crossover_params(double kappa, double lambda, double R) {
    if (!(kappa > 0.0) || !(lambda > 0.0) || !(R > 0.0) || !std::isfinite(kappa) || !std::isfinite(lambda) ||
        !std::isfinite(R))
        throw Error(ErrorCode::InvalidParams, "crossover needs finite kappa, lambda, R > 0");
    const double c = kappa * (lambda - 1.0);
    if (!(c > 2.0)) {
        std::ostringstream os;
        os << "crossover equation needs kappa (lambda - 1) > 2, got " << c;
        throw Error(ErrorCode::SubcriticalParameters, os.str());
    }
}

}  // namespace

double EquilibriumProfile::density_at(double r) const {
    if (r < 0.0 || r > support_radius || r > grid.back())
        return 0.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), r);
    if (it == grid.end())
        return density.back();
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double t = (r - grid[i]) / (grid[i + 1] - grid[i]);
    return density[i] + t * (density[i + 1] - density[i]);
}

void validate_profile(const EquilibriumProfile& p) {
    if (p.grid.size() < 2 || p.grid.size() != p.density.size())
        throw Error(ErrorCode::InvalidParams, "profile needs at least two nodes and one density value per node");
    if (p.grid.front() != 0.0)
        throw Error(ErrorCode::InvalidParams, "profile grid must start at r = 0");
    for (std::size_t i = 0; i + 1 < p.grid.size(); ++i)
        if (!(p.grid[i + 1] > p.grid[i]))
            throw Error(ErrorCode::InvalidParams, "profile grid must be strictly increasing");
    for (double v : p.density)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidParams, "profile density must be finite and nonnegative");
}

double profile_cumulative_mass(const EquilibriumProfile& p, double r) {
    double m = 0.0;
    for_each_piece(p, [&](const Piece& pc) {
        if (pc.a >= r)
            return;
        m += piece_moment(pc, std::min(pc.b, r));
    });
    return 2.0 * kPi * m;
}

double profile_mass(const EquilibriumProfile& p) {
    return profile_cumulative_mass(p, std::numeric_limits<double>::infinity());
}

void normalize_profile(EquilibriumProfile& p) {
    const double m = profile_mass(p);
    if (!(m > 0.0) || !std::isfinite(m))
        throw Error(ErrorCode::NonNormalized, "profile has no finite positive mass to normalize");
    for (double& v : p.density)
        v /= m;
    p.mass = profile_mass(p);
}

double profile_potential(const EquilibriumProfile& p, double r) {
    // U(r) = -(log r) M(r) - 2 pi int_{s > r} s phi(s) log s ds
    double inner = 0.0;
    double outer = 0.0;
    for_each_piece(p, [&](const Piece& pc) {
        if (pc.b <= r) {
            inner += piece_moment(pc, pc.b);
            return;
        }
        const double lo = std::max(pc.a, r);
        if (lo > pc.a)
            inner += piece_moment(pc, lo);
        outer += piece_log_moment(pc, pc.b) - piece_log_moment(pc, lo);
    });
    const double log_term = inner > 0.0 ? std::log(r) * inner : 0.0;
    return -2.0 * kPi * (log_term + outer);
}

double uniform_disc_potential(double rho, double r) {
    if (r <= rho)
        return 0.5 * (1.0 - r * r / (rho * rho)) - std::log(rho);
    return -std::log(r);
}

double coulomb_self_energy(const EquilibriumProfile& p) {
    // (1/2) int U dmu = -int log(s) M(s) dmu(s), dmu = 2 pi s phi ds
    double total = 0.0;
    double cum = 0.0;
    for_each_piece(p, [&](const Piece& pc) {
        total += gl(
            [&](double s) {
                const double m = 2.0 * kPi * (cum + piece_moment(pc, s));
                return s * pc.at(s) * m * std::log(s);
            },
            pc.a, pc.b);
        cum += piece_moment(pc, pc.b);
    });
    return -2.0 * kPi * total;
}

double uniform_disc_self_energy(double rho) {
    return 0.125 - 0.5 * std::log(rho);
}

EquilibriumProfile uniform_disc_profile(double radius, double grid_extent, int intervals) {
    if (!(radius > 0.0) || !(grid_extent >= radius) || intervals < 1)
        throw Error(ErrorCode::InvalidParams, "uniform disc profile needs 0 < radius <= grid extent");
    EquilibriumProfile p;
    const double value = 1.0 / (kPi * radius * radius);
    for (int i = 0; i <= intervals; ++i) {
        p.grid.push_back(radius * i / intervals);
        p.density.push_back(value);
    }
    p.grid.back() = radius;
    if (grid_extent > radius) {
        const int outside = std::max(1, intervals / 2);
        for (int i = 1; i <= outside; ++i) {
            p.grid.push_back(radius + (grid_extent - radius) * i / outside);
            p.density.push_back(0.0);
        }
        p.grid.back() = grid_extent;
    }
    p.support_radius = radius;
    p.mass = profile_mass(p);
    p.residual = 0.0;
    return p;
}

EquilibriumProfile low_temperature_equilibrium(double lambda, double R, int intervals) {
    if (!(R > 0.0) || !std::isfinite(R) || !std::isfinite(lambda))
        throw Error(ErrorCode::InvalidParams, "low-temperature equilibrium needs finite lambda and R > 0");
    if (!(lambda >= 1.0)) {
        std::ostringstream os;
        os << "low-temperature equilibrium needs lambda = alpha/n >= 1 (got " << lambda
           << "); for lambda < 1 the partition function diverges as n grows";
        throw Error(ErrorCode::LambdaBelowOne, os.str());
    }
    const double rho = R / std::sqrt(lambda);
    return uniform_disc_profile(rho, 2.0 * std::max(R, rho), intervals);
}

EquilibriumProfile low_temperature_equilibrium(const GasParams& params, int intervals) {
    return low_temperature_equilibrium(params.lambda(), params.R(), intervals);
}

EulerLagrangeResidual euler_lagrange_residual(const EquilibriumProfile& profile, const GasParams& params,
                                              std::span<const double> probes, double tolerance) {
    validate_profile(profile);
    const double support = std::min(profile.support_radius, profile.grid.back());
    std::vector<double> inside;
    std::vector<double> outside;
    for (double r : probes) {
        const double w = profile_potential(profile, r) + external_potential_V_radial(params, r);
        (r <= support ? inside : outside).push_back(w);
    }
    EulerLagrangeResidual out;
    out.tolerance = tolerance;
    if (!inside.empty()) {
        double s = 0.0;
        for (double w : inside)
            s += w;
        out.constant = s / static_cast<double>(inside.size());
        for (double w : inside)
            out.on_support_deviation = std::max(out.on_support_deviation, std::abs(w - out.constant));
    }
    for (double w : outside)
        out.off_support_min_margin = std::min(out.off_support_min_margin, w - out.constant);
    out.flagged = out.on_support_deviation > tolerance || out.off_support_min_margin < -tolerance;
    return out;
}

std::vector<double> default_probe_radii(const EquilibriumProfile& profile, const GasParams& params, int count) {
    const double support = std::isfinite(profile.support_radius) ? profile.support_radius : profile.grid.back();
    const double hi = 2.0 * std::max(params.R(), support);
    std::vector<double> r;
    for (int i = 0; i < count; ++i)
        r.push_back(hi * i / (count - 1));
    return r;
}

std::vector<double> crossover_grid(double R, const CrossoverSpec& spec) {
    const double r_max = spec.r_max > 0.0 ? spec.r_max : 20.0 * R;
    if (!(r_max > R))
        throw Error(ErrorCode::InvalidParams, "crossover grid needs r_max > R");
    if (spec.intervals < 4 || !(spec.inside_fraction > 0.0 && spec.inside_fraction < 1.0))
        throw Error(ErrorCode::InvalidParams, "crossover grid needs at least 4 intervals and 0 < inside_fraction < 1");
    const int n_in = std::max(2, static_cast<int>(std::lround(spec.intervals * spec.inside_fraction)));
    const int n_out = std::max(2, spec.intervals - n_in);
    const double h0 = R / n_in;
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n_in + n_out + 1));
    for (int i = 0; i < n_in; ++i)
        g.push_back(h0 * i);
    g.push_back(R);
    const double L = r_max - R;
    if (n_out * h0 >= L) {
        for (int j = 1; j <= n_out; ++j)
            g.push_back(R + L * j / n_out);
    } else {
        // spacing grows by q per node, starting at h0 so the grid is smooth across R
        auto span = [&](double q) { return h0 * std::expm1(n_out * std::log(q)) / (q - 1.0); };
        double lo = 1.0 + 1e-15;
        double hi = 2.0;
        while (span(hi) < L)
            hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (span(mid) < L ? lo : hi) = mid;
        }
        const double q = 0.5 * (lo + hi);
        double r = R;
        double h = h0;
        for (int j = 1; j <= n_out; ++j) {
            r += h;
            h *= q;
            g.push_back(r);
        }
    }
    g.back() = r_max;
    return g;
}

EquilibriumProfile solve_crossover(double kappa, double lambda, double R, const CrossoverSpec& spec) {
    require_crossover_params(kappa, lambda, R);
    if (spec.max_iterations < 1 || !(spec.tolerance > 0.0))
        throw Error(ErrorCode::InvalidParams, "crossover solver needs max_iterations >= 1 and a positive tolerance");
    const std::vector<double> r = crossover_grid(R, spec);
    const std::size_t N = r.size();
    const std::size_t m = N - 1;

    // face coefficients r_f / dr and control volumes
    std::vector<double> c(m);
    for (std::size_t i = 0; i < m; ++i)
        c[i] = 0.5 * (r[i] + r[i + 1]) / (r[i + 1] - r[i]);
    std::vector<double> vol(N);
    std::vector<double> bg(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double lo = i == 0 ? 0.0 : 0.5 * (r[i - 1] + r[i]);
        const double hi = i == m ? r[m] : 0.5 * (r[i] + r[i + 1]);
        vol[i] = kPi * (hi - lo) * (hi + lo);
        const double a = std::min(lo, R);
        const double b = std::min(hi, R);
        bg[i] = lambda * (b - a) * (b + a) / (R * R);
    }
    const double outflux = kappa * (1.0 - lambda);

    // start from the profile whose flux is that of the low-temperature step density
    std::vector<double> u(N, 0.0);
    for (std::size_t i = 1; i < N; ++i) {
        auto flux = [&](double s) {
            return kappa * (std::min(1.0, lambda * s * s / (R * R)) - lambda * std::min(1.0, s * s / (R * R)));
        };
        const double s0 = r[i - 1];
        const double s1 = r[i];
        // r u' = flux(r); integrate flux(s) / s on the interval
        u[i] = u[i - 1] + gl([&](double s) { return flux(s) / s; }, s0, s1);
    }
    {
        double mass = 0.0;
        double umax = *std::max_element(u.begin(), u.end());
        for (std::size_t i = 0; i < N; ++i)
            mass += vol[i] * std::exp(u[i] - umax);
        const double shift = umax + std::log(mass);
        for (double& v : u)
            v -= shift;
    }

    auto residual = [&](const std::vector<double>& uu, std::vector<double>& G) {
        G.assign(N, 0.0);
        double left = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double right = i == m ? outflux : c[i] * (uu[i + 1] - uu[i]);
            G[i] = right - left - kappa * (vol[i] * std::exp(uu[i]) - bg[i]);
            left = right;
        }
    };
    auto functional = [&](const std::vector<double>& uu) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = uu[i + 1] - uu[i];
            s += 0.5 * c[i] * d * d;
        }
        for (std::size_t i = 0; i < N; ++i)
            s += kappa * (vol[i] * std::exp(uu[i]) - bg[i] * uu[i]);
        return s - outflux * uu[m];
    };

    EquilibriumProfile prof;
    std::vector<double> G;
    std::vector<double> d(N);
    std::vector<double> diag(N);
    std::vector<double> cp(N);
    std::vector<double> trial(N);
    const double stop = spec.tolerance * std::max(1.0, kappa);
    bool converged = false;
    int iter = 0;
    for (; iter < spec.max_iterations; ++iter) {
        residual(u, G);
        double gmax = 0.0;
        for (double v : G)
            gmax = std::max(gmax, std::abs(v));
        prof.residual_history.push_back(gmax);
        if (gmax <= stop) {
            converged = true;
            break;
        }
        // Hessian of the functional: tridiagonal, symmetric positive definite
        for (std::size_t i = 0; i < N; ++i) {
            diag[i] = kappa * vol[i] * std::exp(u[i]);
            if (i > 0)
                diag[i] += c[i - 1];
            if (i < m)
                diag[i] += c[i];
        }
        // Thomas algorithm for H d = G, off-diagonals -c
        double denom = diag[0];
        cp[0] = m > 0 ? -c[0] / denom : 0.0;
        d[0] = G[0] / denom;
        for (std::size_t i = 1; i < N; ++i) {
            denom = diag[i] + c[i - 1] * cp[i - 1];
            cp[i] = i < m ? -c[i] / denom : 0.0;
            d[i] = (G[i] + c[i - 1] * d[i - 1]) / denom;
        }
        for (std::size_t i = m; i-- > 0;)
            d[i] -= cp[i] * d[i + 1];

        double dmax = 0.0;
        double slope = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            dmax = std::max(dmax, std::abs(d[i]));
            slope -= G[i] * d[i];
        }
        const double phi0 = functional(u);
        double t = 1.0;
        for (;;) {
            for (std::size_t i = 0; i < N; ++i)
                trial[i] = u[i] + t * d[i];
            const double phi1 = functional(trial);
            if (std::isfinite(phi1) && phi1 <= phi0 + 1e-4 * t * slope + 1e-13 * std::abs(phi0))
                break;
            t *= 0.5;
            if (t < 1e-12)
                break;
        }
        u.swap(trial);
        if (t == 1.0 && dmax < 1e-13) {
            residual(u, G);
            double g = 0.0;
            for (double v : G)
                g = std::max(g, std::abs(v));
            prof.residual_history.push_back(g);
            converged = g <= 1e3 * stop;
            ++iter;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "crossover Newton did not converge in " << iter << " iterations; residual history:";
        const std::size_t from = prof.residual_history.size() > 10 ? prof.residual_history.size() - 10 : 0;
        for (std::size_t k = from; k < prof.residual_history.size(); ++k)
            os << ' ' << prof.residual_history[k];
        throw Error(ErrorCode::NoConvergence, os.str());
    }

    prof.grid = r;
    prof.density.resize(N);
    for (std::size_t i = 0; i < N; ++i)
        prof.density[i] = std::exp(u[i]);
    prof.support_radius = std::numeric_limits<double>::infinity();
    normalize_profile(prof);
    prof.iterations = iter;
    prof.residual = crossover_pde_residual(prof, kappa, lambda, R);
    prof.farfield_exponent = fitted_farfield_exponent(prof);
    return prof;
}

double crossover_pde_residual(const EquilibriumProfile& p, double kappa, double lambda, double R) {
    validate_profile(p);
    const std::vector<double>& r = p.grid;
    const std::size_t N = r.size();
    if (N < 3)
        return 0.0;
    std::vector<double> u(N);
    for (std::size_t i = 0; i < N; ++i) {
        if (!(p.density[i] > 0.0))
            return std::numeric_limits<double>::infinity();
        u[i] = std::log(p.density[i]);
    }
    std::vector<double> M(N, 0.0);
    {
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < N; ++i) {
            const Piece pc{r[i], r[i + 1], p.density[i], (p.density[i + 1] - p.density[i]) / (r[i + 1] - r[i])};
            cum += piece_moment(pc, pc.b);
            M[i + 1] = 2.0 * kPi * cum;
        }
    }
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < N; ++i) {
        double slope;
        if (r[i] == R && i >= 2) {
            // u'' jumps at R: differentiate from the inside only
            const double x[3] = {r[i - 2], r[i - 1], r[i]};
            const double v[3] = {u[i - 2], u[i - 1], u[i]};
            slope = quadratic_slope(x, v, 2);
        } else {
            const double x[3] = {r[i - 1], r[i], r[i + 1]};
            const double v[3] = {u[i - 1], u[i], u[i + 1]};
            slope = quadratic_slope(x, v, 1);
        }
        const double bg = lambda * std::min(1.0, r[i] * r[i] / (R * R));
        worst = std::max(worst, std::abs(r[i] * slope - kappa * (M[i] - bg)));
    }
    return worst;
}

double fitted_farfield_exponent(const EquilibriumProfile& p) {
    const double lo = 0.5 * p.grid.back();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int k = 0;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        if (p.grid[i] < lo || !(p.density[i] > 0.0))
            continue;
        const double x = std::log(p.grid[i]);
        const double y = std::log(p.density[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    if (k < 2)
        return std::numeric_limits<double>::quiet_NaN();
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

double profile_entropy(const EquilibriumProfile& p) {
    double total = 0.0;
    for_each_piece(p, [&](const Piece& pc) {
        total += gl(
            [&](double s) {
                const double f = pc.at(s);
                return f > 0.0 ? s * f * std::log(f) : 0.0;
            },
            pc.a, pc.b);
    });
    return 2.0 * kPi * total;
}

double eval_rate_functional(const EquilibriumProfile& p, const FunctionalSpec& spec) {
    validate_profile(p);
    const double mass = profile_mass(p);
    if (std::abs(mass - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "rate functional needs a probability density, mass is " << mass;
        throw Error(ErrorCode::NonNormalized, os.str());
    }
    double potential = 0.0;
    for_each_piece(p, [&](const Piece& pc) {
        auto f = [&](double s) { return s * pc.at(s) * lambda_potential(spec.lambda, spec.R, s); };
        if (pc.a < spec.R && spec.R < pc.b)
            potential += gl(f, pc.a, spec.R) + gl(f, spec.R, pc.b);
        else
            potential += gl(f, pc.a, pc.b);
    });
    double value = coulomb_self_energy(p) + 2.0 * kPi * potential;
    if (spec.mode == FunctionalMode::Crossover) {
        if (!(spec.kappa > 0.0) || !std::isfinite(spec.kappa))
            throw Error(ErrorCode::InvalidParams, "crossover functional needs a finite kappa > 0");
        const double h = profile_entropy(p);
        if (!std::isfinite(h))
            throw Error(ErrorCode::EntropyDiverges, "density has no finite entropy");
        value += h / spec.kappa;
    }
    return value;
}

double eval_rate_functional(const EquilibriumProfile& p, const GasParams& params, FunctionalMode mode, double kappa) {
    return eval_rate_functional(p, FunctionalSpec{mode, params.lambda(), params.R(), kappa});
}

double step_profile_l1_distance(const EquilibriumProfile& p, double lambda, double R) {
    const double rho = R / std::sqrt(lambda);
    const double level = lambda / (kPi * R * R);
    double total = 0.0;
    for_each_piece(p, [&](const Piece& pc) {
        if (pc.a >= R)
            return;
        const double b = std::min(pc.b, R);
        auto f = [&](double s) { return s * std::abs(pc.at(s) - (s <= rho ? level : 0.0)); };
        if (pc.a < rho && rho < b)
            total += gl(f, pc.a, rho) + gl(f, rho, b);
        else
            total += gl(f, pc.a, b);
    });
    // density beyond the grid counts as zero
    if (p.grid.back() < rho)
        total += level * 0.5 * (rho * rho - p.grid.back() * p.grid.back());
    return 2.0 * kPi * total;
}

}  // namespace jellium
