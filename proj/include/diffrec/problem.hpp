#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "diffrec/errors.hpp"
#include "diffrec/function_spec.hpp"
#include "diffrec/grid.hpp"

namespace diffrec {

/// Tolerance for the corner-compatibility checks h(0)=u1(0), h(pi)=u2(0).
inline constexpr double corner_tolerance = 1e-8;

/// Problem data for u_t - a(t) u_xx = f(x,t) on [0,pi] with Dirichlet values
/// u(0,t)=u1(t), u(pi,t)=u2(t) and initial value u(x,0)=h(x).
///
/// a_true is optional and only used to synthesize data; a_floor is the
/// positive lower bound required of the (true or recovered) coefficient.
struct ProblemSpec {
    FunctionSpec u1;
    FunctionSpec u2;
    FunctionSpec h;
    FunctionSpec f;
    std::optional<FunctionSpec> a_true;
    double a_floor = 1e-6;

    ProblemSpec() = default;

    ProblemSpec(FunctionSpec u1_, FunctionSpec u2_, FunctionSpec h_, FunctionSpec f_,
                std::optional<FunctionSpec> a_true_ = std::nullopt, double a_floor_ = 1e-6)
        : u1(std::move(u1_)), u2(std::move(u2_)), h(std::move(h_)), f(std::move(f_)),
          a_true(std::move(a_true_)), a_floor(a_floor_) {
        if (!(a_floor > 0.0))
            throw CoefficientError("a_floor must be positive");
        const double left = h(0.0) - u1(0.0);
        const double right = h(pi) - u2(0.0);
        if (std::abs(left) > corner_tolerance)
            throw EvaluationError("incompatible data at corner (0,0): |h(0)-u1(0)| = " +
                                  std::to_string(std::abs(left)));
        if (std::abs(right) > corner_tolerance)
            throw EvaluationError("incompatible data at corner (pi,0): |h(pi)-u2(0)| = " +
                                  std::to_string(std::abs(right)));
    }

    /// Verify a_true(t) >= a_floor at all grid nodes (and half nodes).
    void check_coefficient_bound(const TimeGrid& grid) const {
        if (!a_true) return;
        for (std::size_t i = 0; i <= 2 * grid.n(); ++i) {
            const double t = 0.5 * static_cast<double>(i) * grid.dt();
            const double v = (*a_true)(t);
            if (!(v >= a_floor))
                throw CoefficientError("a_true(t) < a_floor at t = " + std::to_string(t));
        }
    }
};

/// Measured or synthesized boundary flux g(t) = u_x(0,t) sampled on a grid.
struct FluxData {
    TimeGrid grid;
    std::vector<double> g;

    FluxData() = default;
    FluxData(TimeGrid grid_, std::vector<double> g_) : grid(grid_), g(std::move(g_)) {
        if (g.size() != grid.size())
            throw InvalidGrid("flux sample count does not match grid");
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!std::isfinite(g[i]))
                throw EvaluationError("non-finite flux sample at node " + std::to_string(i));
    }
};

} // namespace diffrec
