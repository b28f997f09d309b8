#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "diffrec/forward.hpp"
#include "diffrec/function_spec.hpp"
#include "diffrec/grid.hpp"
#include "diffrec/problem.hpp"

namespace diffrec {

/// Independent finite-difference solution of u_t - a(t) u_xx = f with
/// Dirichlet data, as a cross-check on the spectral synthesis.
///
/// Crank-Nicolson in time with a(t) taken at the half step (second order in
/// both dx and dt); one tridiagonal solve per step. The boundary flux is
/// extracted with the one-sided stencil (-3 u_0 + 4 u_1 - u_2) / (2 dx).
inline std::pair<std::vector<FieldSnapshot>, FluxData>
fd_solve(const ProblemSpec& spec, const FunctionSpec& a, std::size_t x_count,
         const TimeGrid& grid) {
    if (x_count < 8) throw InvalidGrid("finite-difference solver needs x_count >= 8");
    const std::size_t J = x_count; // intervals; J+1 points
    const double dx = pi / static_cast<double>(J);
    const double dt = grid.dt();

    std::vector<double> x(J + 1);
    for (std::size_t j = 0; j <= J; ++j) x[j] = (j == J) ? pi : static_cast<double>(j) * dx;

    std::vector<double> u(J + 1);
    for (std::size_t j = 0; j <= J; ++j) u[j] = spec.h(x[j]);
    u[0] = spec.u1(0.0);
    u[J] = spec.u2(0.0);

    auto flux_at = [&](const std::vector<double>& v) {
        return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
    };

    std::vector<FieldSnapshot> snapshots;
    snapshots.reserve(grid.size());
    std::vector<double> g(grid.size());
    snapshots.push_back(FieldSnapshot{x, u, 0.0});
    g[0] = flux_at(u);

    // Thomas algorithm workspace
    std::vector<double> rhs(J + 1), cp(J + 1), dp(J + 1), u_next(J + 1);

    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t_half = grid.node(k) + 0.5 * dt;
        const double t_next = grid.node(k + 1);
        const double a_half = a(t_half);
        if (!(a_half >= spec.a_floor))
            throw CoefficientError("coefficient below floor at t = " + std::to_string(t_half));
        const double mu = a_half * dt / (dx * dx);

        // interior rows: (1 + mu) u_j - mu/2 (u_{j-1} + u_{j+1}) = rhs_j
        for (std::size_t j = 1; j < J; ++j)
            rhs[j] = u[j] + 0.5 * mu * (u[j + 1] - 2.0 * u[j] + u[j - 1]) +
                     dt * spec.f(x[j], t_half);
        const double left = spec.u1(t_next);
        const double right = spec.u2(t_next);

        // forward sweep (lower = upper = -mu/2, diagonal = 1 + mu)
        const double off = -0.5 * mu;
        const double diag = 1.0 + mu;
        cp[1] = off / diag;
        dp[1] = (rhs[1] - off * left) / diag;
        for (std::size_t j = 2; j < J; ++j) {
            const double denom = diag - off * cp[j - 1];
            cp[j] = off / denom;
            dp[j] = (rhs[j] - off * dp[j - 1]) / denom;
        }
        dp[J - 1] = (rhs[J - 1] - off * right - off * dp[J - 2]) / (diag - off * cp[J - 2]);

        u_next[0] = left;
        u_next[J] = right;
        u_next[J - 1] = dp[J - 1];
        for (std::size_t j = J - 1; j-- > 1;) u_next[j] = dp[j] - cp[j] * u_next[j + 1];

        for (double v : u_next)
            if (!std::isfinite(v))
                throw OracleFailure("finite-difference solution diverged at t = " +
                                    std::to_string(t_next));

        u = u_next;
        snapshots.push_back(FieldSnapshot{x, u, t_next});
        g[k + 1] = flux_at(u);
    }

    return {std::move(snapshots), FluxData(grid, std::move(g))};
}

} // namespace diffrec
