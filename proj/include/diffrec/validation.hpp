#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "diffrec/problem.hpp"
#include "diffrec/spectral.hpp"

namespace diffrec {

enum class Verdict { pass, warn_nonnegative, fail };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::warn_nonnegative: return "warn-nonnegative";
    case Verdict::fail: return "fail";
    }
    return "?";
}

/// Verdicts for the structural conditions the fixed-point recovery relies on:
/// positivity of the lifted initial-value coefficients, positivity of the
/// flux data, nonnegativity of the source coefficients, and boundedness of
/// the cubic-weighted source sum. compatibility_residual measures
/// |g(0) - flux implied by the initial data|.
struct AssumptionReport {
    Verdict h_coeff_positivity = Verdict::fail;
    Verdict g_positivity = Verdict::fail;
    Verdict f_coeff_nonnegativity = Verdict::fail;
    Verdict cubic_sum_verdict = Verdict::fail;
    double cubic_sum_bound = 0.0;    // max over grid t of sum m^3 |F_m(t)|, m <= M
    double cubic_tail_estimate = 0.0;
    double compatibility_residual = 0.0;

    bool any_fail() const {
        return h_coeff_positivity == Verdict::fail || g_positivity == Verdict::fail ||
               f_coeff_nonnegativity == Verdict::fail || cubic_sum_verdict == Verdict::fail;
    }
};

namespace detail {

/// Values within snap_tol of zero count as exactly zero, so quadrature noise
/// on analytically-zero coefficients cannot flip a verdict.
inline Verdict sign_verdict(const std::vector<double>& values, bool strict,
                            bool known_zero_tail) {
    double scale = 1.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    const double snap = 1e-9 * scale;

    bool any_negative = false;
    bool any_zero = known_zero_tail;
    bool any_positive = false;
    for (double v : values) {
        if (std::abs(v) <= snap)
            any_zero = true;
        else if (v < 0.0)
            any_negative = true;
        else
            any_positive = true;
    }
    if (any_negative) return Verdict::fail;
    if (!strict) return Verdict::pass;
    if (!any_positive) return Verdict::fail;
    return any_zero ? Verdict::warn_nonnegative : Verdict::pass;
}

} // namespace detail

/// Coefficients of the lifted initial value h - r(.,0) against p_1..p_M.
inline std::vector<double> lifted_initial_coefficients(const ProblemSpec& spec, int modes) {
    const double u1_0 = spec.u1(0.0);
    const double u2_0 = spec.u2(0.0);
    if (u1_0 == 0.0 && u2_0 == 0.0 && spec.h.is_pure_sine_combination())
        return sine_coefficients(spec.h, modes);
    SineProjector proj(modes);
    return proj.project([&](double x) { return spec.h(x) - (u1_0 + (x / pi) * (u2_0 - u1_0)); });
}

/// Mismatch between the measured initial flux and the flux implied by the
/// initial data: |g(0) - (sqrt(2/pi) sum m H_m + (u2(0)-u1(0))/pi)|.
inline double compatibility_check(const ProblemSpec& spec, const FluxData& data, int modes) {
    if (data.grid.node(0) != 0.0)
        throw InvalidGrid("flux data must start at t = 0");
    const std::vector<double> H = lifted_initial_coefficients(spec, modes);
    const double slope0 = (spec.u2(0.0) - spec.u1(0.0)) / pi;
    return std::abs(data.g.front() - (eval_q0(H, 0.0) + slope0));
}

/// Evaluate the structural assumptions on the given problem and flux data.
///
/// Strict positivity of the initial-value coefficients is relaxed to
/// "nonnegative with at least one positive" (warn): finite sine combinations
/// always carry exact zeros above their top mode, yet Q0 stays strictly
/// decreasing as long as one coefficient is positive. A pure sine combination
/// therefore never reports pass, regardless of the truncation order.
inline AssumptionReport validate_assumptions(const ProblemSpec& spec, const TimeGrid& grid,
                                             int modes, const FluxData& data,
                                             double tail_decay_exponent = 4.0) {
    AssumptionReport report;
    const LiftedProblem lifted = lift(spec, grid, modes);
    const ModeData& md = lifted.mode_data;

    const bool h_exact_tail =
        spec.h.is_pure_sine_combination() && spec.u1(0.0) == 0.0 && spec.u2(0.0) == 0.0;
    report.h_coeff_positivity = detail::sign_verdict(md.H, /*strict=*/true, h_exact_tail);
    report.g_positivity = detail::sign_verdict(data.g, /*strict=*/true, false);

    std::vector<double> f_flat;
    f_flat.reserve(static_cast<std::size_t>(modes) * grid.size());
    for (const auto& row : md.F) f_flat.insert(f_flat.end(), row.begin(), row.end());
    report.f_coeff_nonnegativity = detail::sign_verdict(f_flat, /*strict=*/false, false);

    double cubic = 0.0;
    double top_mode_max = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        for (int m = 1; m <= modes; ++m) {
            const double mm = static_cast<double>(m);
            s += mm * mm * mm * std::abs(md.F[static_cast<std::size_t>(m - 1)][i]);
        }
        cubic = std::max(cubic, s);
        top_mode_max = std::max(top_mode_max, std::abs(md.F.back()[i]));
    }
    report.cubic_sum_bound = cubic;
    report.cubic_sum_verdict = std::isfinite(cubic) ? Verdict::pass : Verdict::fail;

    // Truncation-tail heuristic under the declared decay |F_m| <= c / m^p,
    // with c fitted at the top retained mode. Capped partial sum; a large
    // value flags a truncation order that is too small for the source.
    {
        const double p = tail_decay_exponent;
        const double c = top_mode_max * std::pow(static_cast<double>(modes), p);
        double tail = 0.0;
        for (int m = modes + 1; m <= modes + 10000; ++m)
            tail += c * std::pow(static_cast<double>(m), 3.0 - p);
        report.cubic_tail_estimate = tail;
    }

    report.compatibility_residual = compatibility_check(spec, data, modes);
    return report;
}

} // namespace diffrec
