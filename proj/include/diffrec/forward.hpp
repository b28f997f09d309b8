#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "diffrec/function_spec.hpp"
#include "diffrec/grid.hpp"
#include "diffrec/problem.hpp"
#include "diffrec/spectral.hpp"

namespace diffrec {

/// A(t) = int_0^t a(s) ds on the grid, by composite trapezoid. Each step also
/// evaluates the midpoint for a Richardson comparison against Simpson; a
/// large discrepancy means the grid cannot resolve a(t).
inline TimeSeries accumulate_a(const FunctionSpec& a, const TimeGrid& grid, double a_floor) {
    if (!(a_floor > 0.0)) throw CoefficientError("a_floor must be positive");
    const double dt = grid.dt();
    std::vector<double> A(grid.size(), 0.0);
    double a_left = a(0.0);
    if (!(a_left >= a_floor))
        throw CoefficientError("coefficient below floor at t = 0: a = " + std::to_string(a_left));
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double t_left = grid.node(i);
        const double a_mid = a(t_left + 0.5 * dt);
        const double a_right = a(grid.node(i + 1));
        if (!(a_mid >= a_floor) || !(a_right >= a_floor))
            throw CoefficientError("coefficient below floor near t = " + std::to_string(t_left));
        const double trap = 0.5 * dt * (a_left + a_right);
        const double simpson = dt / 6.0 * (a_left + 4.0 * a_mid + a_right);
        if (std::abs(trap - simpson) > 0.1 * std::abs(simpson))
            throw CoefficientError("time grid too coarse to resolve the coefficient near t = " +
                                   std::to_string(t_left));
        A[i + 1] = A[i] + trap;
        a_left = a_right;
    }
    return TimeSeries(grid, std::move(A));
}

/// Mode amplitudes c_m(t_i) of the homogenized solution.
struct ModeTrajectory {
    std::vector<std::vector<double>> c; // c[m-1][i]
    TimeGrid grid;
};

/// Sampled solution field at one time.
struct FieldSnapshot {
    std::vector<double> x_nodes;
    std::vector<double> values;
    double t = 0.0;
};

/// Solve the mode equations c_m' + a(t) m^2 c_m = F_m(t), c_m(0) = H_m, via
///
///   c_m(t) = H_m e^{-m^2 A(t)} + int_0^t e^{-m^2 (A(t)-A(s))} F_m(s) ds,
///
/// with the exponent combined inside the integrand (the split form
/// e^{-m^2 A(t)} e^{+m^2 A(s)} overflows once m^2 A grows past ~700).
/// The integral uses composite trapezoid on the grid.
inline ModeTrajectory solve_modes(const TimeSeries& A, const ModeData& mode_data) {
    if (!(A.grid == mode_data.grid))
        throw InvalidGrid("accumulated coefficient and mode data use different grids");
    if (A.values.front() != 0.0)
        throw DomainError("accumulated coefficient must start at zero");
    for (std::size_t i = 1; i < A.size(); ++i)
        if (A.values[i] < A.values[i - 1])
            throw DomainError("accumulated coefficient must be nondecreasing");

    const TimeGrid& grid = mode_data.grid;
    const double dt = grid.dt();
    const std::size_t count = grid.size();
    ModeTrajectory traj;
    traj.grid = grid;
    traj.c.assign(static_cast<std::size_t>(mode_data.modes), std::vector<double>(count, 0.0));

    for (int m = 1; m <= mode_data.modes; ++m) {
        const double m2 = static_cast<double>(m) * static_cast<double>(m);
        const std::vector<double>& Fm = mode_data.F[static_cast<std::size_t>(m - 1)];
        std::vector<double>& cm = traj.c[static_cast<std::size_t>(m - 1)];
        const double Hm = mode_data.H[static_cast<std::size_t>(m - 1)];
        cm[0] = Hm;
        for (std::size_t i = 1; i < count; ++i) {
            const double Ai = A.values[i];
            double integral = 0.0;
            for (std::size_t j = 0; j <= i; ++j) {
                const double w = (j == 0 || j == i) ? 0.5 : 1.0;
                integral += w * std::exp(-m2 * (Ai - A.values[j])) * Fm[j];
            }
            cm[i] = Hm * std::exp(-m2 * Ai) + dt * integral;
        }
    }
    return traj;
}

/// u(x_i, t_index) = sum_m c_m(t) p_m(x_i) + r(x_i, t).
inline FieldSnapshot reconstruct_u(const ModeTrajectory& traj, const LiftedProblem& lifted,
                                   const std::vector<double>& x_nodes, std::size_t t_index) {
    if (t_index >= traj.grid.size()) throw InvalidGrid("time index out of range");
    const double t = traj.grid.node(t_index);
    FieldSnapshot snap;
    snap.t = t;
    snap.x_nodes = x_nodes;
    snap.values.resize(x_nodes.size());
    for (std::size_t k = 0; k < x_nodes.size(); ++k) {
        const double x = x_nodes[k];
        double acc = 0.0;
        for (std::size_t m = traj.c.size(); m-- > 0;)
            acc += traj.c[m][t_index] * basis_fn(static_cast<int>(m + 1), x);
        snap.values[k] = acc + lifted.r_at(x, t);
    }
    return snap;
}

/// Boundary flux of the reconstructed solution:
/// g(t_i) = sum_m c_m(t_i) m sqrt(2/pi) + (u2(t_i) - u1(t_i)) / pi.
inline FluxData synthesize_flux(const ModeTrajectory& traj, const LiftedProblem& lifted) {
    const TimeGrid& grid = traj.grid;
    std::vector<double> g(grid.size(), 0.0);
    const double scale = std::sqrt(2.0 / pi);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double acc = 0.0;
        for (std::size_t m = traj.c.size(); m-- > 0;)
            acc += traj.c[m][i] * static_cast<double>(m + 1);
        g[i] = scale * acc + lifted.r_slope[i];
    }
    return FluxData(grid, std::move(g));
}

} // namespace diffrec
