#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "diffrec/grid.hpp"
#include "diffrec/problem.hpp"
#include "diffrec/spectral.hpp"

namespace diffrec {

enum class InverseMethod { picard_global, volterra_marching };
enum class ClampPolicy { clamp_to_zero, monotone_projection };

struct SolverOptions {
    int modes = 16;
    double tol = 1e-10;           // stopping tolerance on sup |A_next - A|
    std::size_t max_iter = 200;
    InverseMethod method = InverseMethod::picard_global;
    double inversion_tol = 1e-13; // relative residual tolerance for invert_q0
    ClampPolicy clamp_policy = ClampPolicy::clamp_to_zero;
    std::size_t smoothing_window = 0; // moving-average width for g; 0 = off

    void check() const {
        if (modes < 1) throw ConfigError("solver requires modes >= 1");
        if (!(tol > 0.0)) throw ConfigError("solver requires tol > 0");
        if (max_iter < 1) throw ConfigError("solver requires max_iter >= 1");
        if (!(inversion_tol > 0.0)) throw ConfigError("solver requires inversion_tol > 0");
    }
};

struct InverseResult {
    TimeSeries A;                        // recovered antiderivative, A(0) = 0
    TimeSeries a;                        // recovered coefficient dA/dt
    std::vector<double> residual_history; // sup |A_{n+1} - A_n| per iteration
    double equation_residual = 0.0;      // sup defect of the flux equation at the result
    bool converged = false;
    std::size_t iterations_used = 0;
    double clamped_mass = 0.0;           // sum of negative jumps seen by the kernel clamp
};

/// Constants of the local contraction argument for the fixed-point map.
struct ContractionReport {
    double C0 = 0.0;           // bound on |d Q0^{-1}| over the working flux range
    double C = 0.0;            // bound on Q values
    double C1 = 0.0;           // bound on |dQ/dz|
    double t0_predicted = 0.0; // largest horizon with C0 * C1 * t0 < 1
    double ball_radius = 0.0;  // working sup-norm ball for the iterates
};

/// Second-order finite differences: central at interior nodes, one-sided at
/// the ends.
inline TimeSeries differentiate(const TimeSeries& A) {
    const std::size_t n = A.grid.n();
    const double dt = A.grid.dt();
    std::vector<double> d(A.size());
    d[0] = (-3.0 * A.values[0] + 4.0 * A.values[1] - A.values[2]) / (2.0 * dt);
    for (std::size_t i = 1; i < n; ++i)
        d[i] = (A.values[i + 1] - A.values[i - 1]) / (2.0 * dt);
    d[n] = (3.0 * A.values[n] - 4.0 * A.values[n - 1] + A.values[n - 2]) / (2.0 * dt);
    return TimeSeries(A.grid, std::move(d));
}

namespace detail {

inline std::vector<double> moving_average(const std::vector<double>& v, std::size_t window) {
    if (window < 2) return v;
    const std::size_t r = window / 2;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i >= r ? i - r : 0;
        const std::size_t hi = std::min(v.size() - 1, i + r);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) acc += v[j];
        out[i] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

struct VolterraContext {
    std::vector<double> H;
    std::vector<std::vector<double>> F_cols; // F_m(t_i) over m, per node i
    std::vector<double> q_at_zero;           // Q(0, t_i)
    std::vector<double> g_shifted;           // g - (u2-u1)/pi
    std::vector<double> nodes;
    double dt = 0.0;

    /// Trapezoid of Q(A_i - A_j, t_j) over j = 0..i, with negative arguments
    /// clamped to zero so the kernel stays inside its domain.
    double integral_at(const std::vector<double>& A, std::size_t i) const {
        if (i == 0) return 0.0;
        return integral_with_trial(A, i, A[i]);
    }

    /// Same trapezoid with A_i replaced by a trial value x; the j = i term is
    /// Q(0, t_i) regardless of x.
    double integral_with_trial(const std::vector<double>& A, std::size_t i, double x) const {
        if (i == 0) return 0.0;
        double acc = 0.5 * eval_q(F_cols[0], std::max(0.0, x - A[0]));
        for (std::size_t j = 1; j < i; ++j)
            acc += eval_q(F_cols[j], std::max(0.0, x - A[j]));
        acc += 0.5 * q_at_zero[i];
        return dt * acc;
    }

    /// d/dx of integral_with_trial; clamped terms contribute nothing.
    double integral_trial_derivative(const std::vector<double>& A, std::size_t i,
                                     double x) const {
        if (i == 0) return 0.0;
        double acc = x > A[0] ? 0.5 * eval_q_derivative(F_cols[0], x - A[0]) : 0.0;
        for (std::size_t j = 1; j < i; ++j)
            if (x > A[j]) acc += eval_q_derivative(F_cols[j], x - A[j]);
        return dt * acc;
    }

    double defect_sup(const std::vector<double>& A) const {
        double sup = 0.0;
        for (std::size_t i = 0; i < A.size(); ++i) {
            const double lhs = eval_q0(H, A[i]) + integral_at(A, i);
            sup = std::max(sup, std::abs(lhs - g_shifted[i]));
        }
        return sup;
    }

    /*
     * Node equation at index i with earlier-time slots frozen at A:
     *
     *   phi(x) = Q0(x) + dt [ w_0 Q(x-A_0, t_0) + ... + 1/2 Q(0, t_i) ] - g~_i.
     *
     * phi is strictly decreasing (Q0' < 0, each unclamped kernel term is
     * nonincreasing), so the root is unique and safe for bracketed Newton.
     * Solving the current-time argument implicitly is what keeps the
     * iteration causal: if x is merely lagged to the previous sweep, its
     * coupling coefficient grows like t and the iteration stalls once it
     * reaches one.
     */
    double solve_node(const std::vector<double>& A, std::size_t i, double x_init,
                      double tol) const {
        const double target = g_shifted[i];
        auto phi = [&](double x) {
            return eval_q0(H, x) + integral_with_trial(A, i, x) - target;
        };

        double lo = 0.0; // phi(0) >= Q0(0) - g~ >= 0 for admissible data
        double hi = std::max(1.0, x_init + 1.0);
        int grow = 0;
        while (phi(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (++grow > 60)
                throw DataInconsistent("node equation has no root at node " + std::to_string(i) +
                                       " (t = " + std::to_string(nodes[i]) +
                                       "); flux incompatible with the model");
        }

        double x = std::min(std::max(x_init, lo), hi);
        for (int iter = 0; iter < 100; ++iter) {
            const double fx = phi(x);
            if (fx > 0.0)
                lo = x;
            else
                hi = x;
            if (std::abs(fx) <= tol * std::max(std::abs(target), 1e-300)) break;
            const double dfx = eval_q0_derivative(H, x) + integral_trial_derivative(A, i, x);
            double x_next = dfx < 0.0 ? x - fx / dfx : 0.5 * (lo + hi);
            if (!(x_next > lo) || !(x_next < hi)) x_next = 0.5 * (lo + hi);
            if (std::abs(x_next - x) <= 1e-16 * std::max(1.0, x)) {
                x = x_next;
                break;
            }
            x = x_next;
        }
        return x;
    }
};

inline void project_monotone(std::vector<double>& A) {
    for (std::size_t i = 1; i < A.size(); ++i) A[i] = std::max(A[i], A[i - 1]);
}

inline double clamped_mass_of(const std::vector<double>& A) {
    double mass = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) mass += std::max(0.0, A[j] - A[i]);
    return mass;
}

} // namespace detail

/*
 * Recover A(t) from flux data by solving the Volterra-type equation
 *
 *     Q0(A(t)) + int_0^t Q(A(t) - A(s), s) ds = g~(t),
 *     g~(t) = g(t) - (u2(t) - u1(t)) / pi,
 *
 * by fixed-point sweeps starting from A_1 = Q0^{-1}(g~). Each sweep solves
 * the monotone scalar node equation (see VolterraContext::solve_node) at
 * every node, with the earlier-time slots A(s) taken from the previous sweep
 * (picard-global) or from already-final nodes (volterra-marching, one pass).
 * A(0) is pinned to zero; any initial mismatch shows up in the reported
 * equation residual.
 */
inline InverseResult fixed_point_solve(const FluxData& data, const LiftedProblem& lifted,
                                       const SolverOptions& opts) {
    opts.check();
    const TimeGrid& grid = data.grid;
    if (!(grid == lifted.mode_data.grid))
        throw InvalidGrid("flux data and lifted problem use different grids");
    const int modes = std::min(opts.modes, lifted.mode_data.modes);
    const std::size_t count = grid.size();

    detail::VolterraContext ctx;
    ctx.H.assign(lifted.mode_data.H.begin(), lifted.mode_data.H.begin() + modes);
    ctx.F_cols.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> col(static_cast<std::size_t>(modes));
        for (int m = 0; m < modes; ++m)
            col[static_cast<std::size_t>(m)] = lifted.mode_data.F[static_cast<std::size_t>(m)][i];
        ctx.F_cols[i] = std::move(col);
    }
    ctx.q_at_zero.resize(count);
    for (std::size_t i = 0; i < count; ++i) ctx.q_at_zero[i] = eval_q(ctx.F_cols[i], 0.0);
    ctx.nodes = grid.nodes();
    ctx.dt = grid.dt();

    const std::vector<double> g_smooth = detail::moving_average(data.g, opts.smoothing_window);
    ctx.g_shifted.resize(count);
    for (std::size_t i = 0; i < count; ++i) ctx.g_shifted[i] = g_smooth[i] - lifted.r_slope[i];

    const double q0_top = eval_q0(ctx.H, 0.0);
    if (!(q0_top > 0.0))
        throw DegenerateKernel("initial-value coefficients are all zero; Q0 is not invertible");
    // node 0 is never inverted (A(0) is pinned to zero); its mismatch shows
    // up in the equation residual instead of blocking the solve
    for (std::size_t i = 1; i < count; ++i) {
        const double y = ctx.g_shifted[i];
        if (!(y > 0.0) || y > q0_top * (1.0 + 1e-12))
            throw DataInconsistent(
                "lift-corrected flux outside (0, Q0(0)] at node " + std::to_string(i) +
                " (t = " + std::to_string(grid.node(i)) + "): g~ = " + std::to_string(y) +
                ", Q0(0) = " + std::to_string(q0_top));
    }

    InverseResult result;
    std::vector<double> A(count, 0.0);
    for (std::size_t i = 1; i < count; ++i) {
        try {
            A[i] = invert_q0(ctx.H, ctx.g_shifted[i], opts.inversion_tol);
        } catch (const OutOfRange& e) {
            throw DataInconsistent("flux incompatible with the model at node " +
                                   std::to_string(i) + " (t = " + std::to_string(grid.node(i)) +
                                   "): " + e.what());
        }
    }
    if (opts.clamp_policy == ClampPolicy::monotone_projection) detail::project_monotone(A);

    if (opts.method == InverseMethod::picard_global) {
        std::vector<double> A_next(count, 0.0);
        for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
            for (std::size_t i = 1; i < count; ++i)
                A_next[i] = ctx.solve_node(A, i, A[i], opts.inversion_tol);
            A_next[0] = 0.0;
            if (opts.clamp_policy == ClampPolicy::monotone_projection)
                detail::project_monotone(A_next);
            const double res = sup_diff(A_next, A);
            result.residual_history.push_back(res);
            A.swap(A_next);
            if (res <= opts.tol) {
                result.converged = true;
                break;
            }
        }
        result.iterations_used = result.residual_history.size();
    } else {
        // single causal pass: nodes j < i are final when node i is solved
        for (std::size_t i = 1; i < count; ++i) {
            double x = ctx.solve_node(A, i, A[i - 1], opts.inversion_tol);
            if (opts.clamp_policy == ClampPolicy::monotone_projection)
                x = std::max(x, A[i - 1]);
            A[i] = x;
        }
        // one verification sweep: re-solving every node equation must not
        // move the marched solution
        double verify = 0.0;
        for (std::size_t i = 1; i < count; ++i)
            verify = std::max(verify, std::abs(ctx.solve_node(A, i, A[i], opts.inversion_tol) - A[i]));
        result.residual_history.push_back(verify);
        result.iterations_used = 1;
        result.converged = verify <= opts.tol;
    }

    result.clamped_mass = detail::clamped_mass_of(A);
    result.equation_residual = ctx.defect_sup(A);
    result.A = TimeSeries(grid, std::move(A));
    result.a = differentiate(result.A);
    return result;
}

/// Result of the closed-form recovery; nodes before the cutoff hold NaN.
struct ClosedFormResult {
    TimeSeries a;
    std::size_t first_valid = 0;
};

/*
 * Closed-form special case: with u1 = u2 = h = 0 and the source equal to the
 * first basis function p_1, the solution is u = c(t) p_1(x) with
 * c' + a(t) c = 1, c(0) = 0, and g = sqrt(2/pi) c. Eliminating c gives
 *
 *     a(t) = (sqrt(2/pi) - g'(t)) / g(t),
 *
 * valid wherever g > 0. Since g(0) = 0, recovery starts at the cutoff t_min;
 * g' uses second-order finite differences.
 */
inline ClosedFormResult closed_form_recover(const FluxData& data, double t_min) {
    if (!(t_min > 0.0)) throw DomainError("closed-form cutoff t_min must be positive");
    const TimeGrid& grid = data.grid;
    if (t_min > grid.t_max())
        throw DomainError("closed-form cutoff lies beyond the data horizon");

    std::size_t first = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.node(i) >= t_min - 1e-12 * grid.t_max()) {
            first = i;
            break;
        }
    }
    if (first >= grid.size() || first + 2 > grid.n())
        throw DomainError("closed-form cutoff leaves too few nodes");

    const TimeSeries g_series(grid, data.g);
    const TimeSeries dg = differentiate(g_series);

    const double scale = std::sqrt(2.0 / pi);
    std::vector<double> a(grid.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = first; i < grid.size(); ++i) {
        const double g = data.g[i];
        if (!(g > 0.0))
            throw DomainError("flux must be positive beyond the cutoff; g(t = " +
                              std::to_string(grid.node(i)) + ") = " + std::to_string(g));
        a[i] = (scale - dg.values[i]) / g;
    }
    return ClosedFormResult{TimeSeries(grid, std::move(a)), first};
}

/// Bounds used by the local contraction argument, evaluated on the truncated
/// data: C1 >= |dQ/dz|, C >= Q, C0 >= |d Q0^{-1}| over the observed flux
/// range. The Picard map contracts in sup norm when C0 * C1 * t < 1, so
/// t0 = 1 / (C0 C1) is a conservative horizon (infinite for zero forcing).
inline ContractionReport contraction_estimate(const LiftedProblem& lifted, const FluxData& data,
                                              const SolverOptions& opts) {
    const int modes = std::min(opts.modes, lifted.mode_data.modes);
    const TimeGrid& grid = data.grid;
    const double scale = std::sqrt(2.0 / pi);

    ContractionReport report;
    double cubic = 0.0;
    double linear = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double c3 = 0.0;
        double c1 = 0.0;
        for (int m = 1; m <= modes; ++m) {
            const double v = std::abs(lifted.mode_data.F[static_cast<std::size_t>(m - 1)][i]);
            c3 += static_cast<double>(m) * static_cast<double>(m) * static_cast<double>(m) * v;
            c1 += static_cast<double>(m) * v;
        }
        cubic = std::max(cubic, c3);
        linear = std::max(linear, c1);
    }
    report.C1 = scale * cubic;
    report.C = scale * linear;

    std::vector<double> H(lifted.mode_data.H.begin(), lifted.mode_data.H.begin() + modes);
    const double q0_top = eval_q0(H, 0.0);
    if (!(q0_top > 0.0))
        throw DegenerateKernel("initial-value coefficients are all zero; Q0 is not invertible");

    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -std::numeric_limits<double>::infinity();
    double a1_max = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double y = data.g[i] - lifted.r_slope[i];
        y = std::min(std::max(y, 1e-300), q0_top);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
        a1_max = std::max(a1_max, invert_q0(H, y, opts.inversion_tol));
    }
    // |Q0'| decreases along the inverse branch as y decreases, so the minimum
    // over the working range sits at one of the two ends
    const double slope_at_min = std::abs(eval_q0_derivative(H, invert_q0(H, y_min, opts.inversion_tol)));
    const double slope_at_max = std::abs(eval_q0_derivative(H, invert_q0(H, y_max, opts.inversion_tol)));
    const double min_slope = std::min(slope_at_min, slope_at_max);
    report.C0 = min_slope > 0.0 ? 1.0 / min_slope : std::numeric_limits<double>::infinity();

    report.t0_predicted = report.C1 > 0.0 ? 1.0 / (report.C0 * report.C1)
                                          : std::numeric_limits<double>::infinity();
    report.ball_radius = 2.0 * a1_max;
    return report;
}

} // namespace diffrec
