#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "diffrec/errors.hpp"
#include "diffrec/function_spec.hpp"
#include "diffrec/grid.hpp"
#include "diffrec/problem.hpp"

namespace diffrec {

/// Normalized Dirichlet eigenfunctions on [0,pi]: p_m(x) = sqrt(2/pi) sin(mx).
inline double basis_fn(int m, double x) { return std::sqrt(2.0 / pi) * std::sin(m * x); }

/// Shared quadrature for projecting a function of x onto p_1..p_M.
/// Composite Simpson; panel count scales with M so the highest mode is
/// resolved with plenty of points per wavelength.
class SineProjector {
public:
    explicit SineProjector(int modes, std::size_t min_panels = 1024)
        : modes_(modes) {
        if (modes < 1) throw EvaluationError("mode count must be >= 1");
        std::size_t panels = std::max<std::size_t>(min_panels, 64 * static_cast<std::size_t>(modes));
        if (panels % 2 != 0) ++panels;
        const std::size_t points = panels + 1;
        x_.resize(points);
        w_.resize(points);
        const double dx = pi / static_cast<double>(panels);
        for (std::size_t k = 0; k < points; ++k) {
            x_[k] = static_cast<double>(k) * dx;
            double w = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
            w_[k] = w * dx / 3.0;
        }
        sin_table_.resize(static_cast<std::size_t>(modes) * points);
        for (int m = 1; m <= modes; ++m)
            for (std::size_t k = 0; k < points; ++k)
                sin_table_[static_cast<std::size_t>(m - 1) * points + k] = std::sin(m * x_[k]);
    }

    int modes() const noexcept { return modes_; }

    template <typename Fn>
    std::vector<double> project(Fn&& fn) const {
        const std::size_t points = x_.size();
        std::vector<double> samples(points);
        for (std::size_t k = 0; k < points; ++k) samples[k] = fn(x_[k]) * w_[k];
        std::vector<double> coeff(static_cast<std::size_t>(modes_), 0.0);
        const double scale = std::sqrt(2.0 / pi);
        for (int m = 1; m <= modes_; ++m) {
            const double* row = sin_table_.data() + static_cast<std::size_t>(m - 1) * points;
            double acc = 0.0;
            for (std::size_t k = 0; k < points; ++k) acc += samples[k] * row[k];
            coeff[static_cast<std::size_t>(m - 1)] = scale * acc;
        }
        return coeff;
    }

private:
    int modes_;
    std::vector<double> x_;
    std::vector<double> w_;
    std::vector<double> sin_table_;
};

/// Coefficients (fn, p_m) for m = 1..M. Pure sine combinations are projected
/// exactly; everything else goes through Simpson quadrature.
inline std::vector<double> sine_coefficients(const FunctionSpec& fn, int modes) {
    if (modes < 1) throw EvaluationError("mode count must be >= 1");
    if (fn.is_pure_sine_combination()) {
        // (sin(jx), p_m) = sqrt(pi/2) delta_jm
        std::vector<double> coeff(static_cast<std::size_t>(modes), 0.0);
        for (int m = 1; m <= modes; ++m)
            coeff[static_cast<std::size_t>(m - 1)] =
                fn.plain_sine_coefficient(m) * std::sqrt(pi / 2.0);
        return coeff;
    }
    SineProjector proj(modes);
    return proj.project([&fn](double x) { return fn(x); });
}

/// Truncated sine-expansion data of the homogenized problem:
/// H_m of the shifted initial value and F_m(t_i) of the shifted source.
struct ModeData {
    int modes = 0;
    std::vector<double> H;              // H_m, m = 1..modes
    std::vector<std::vector<double>> F; // F[m-1][i] = F_m(t_i)
    TimeGrid grid;

    ModeData() = default;
    ModeData(int modes_, std::vector<double> H_, std::vector<std::vector<double>> F_,
             TimeGrid grid_)
        : modes(modes_), H(std::move(H_)), F(std::move(F_)), grid(grid_) {
        if (H.size() != static_cast<std::size_t>(modes) ||
            F.size() != static_cast<std::size_t>(modes))
            throw EvaluationError("mode data dimensions do not match mode count");
        for (double v : H)
            if (!std::isfinite(v)) throw EvaluationError("non-finite initial-value coefficient");
        for (const auto& row : F) {
            if (row.size() != grid.size())
                throw EvaluationError("source coefficient row does not match grid");
            for (double v : row)
                if (!std::isfinite(v)) throw EvaluationError("non-finite source coefficient");
        }
    }

    /// Column F_m(t_i) over m at a fixed node.
    std::vector<double> source_coefficients_at(std::size_t i) const {
        std::vector<double> col(static_cast<std::size_t>(modes));
        for (int m = 0; m < modes; ++m) col[static_cast<std::size_t>(m)] = F[static_cast<std::size_t>(m)][i];
        return col;
    }

    /// Truncation indicator M*|H_M| + M*max_t |F_M(t)|; small values mean the
    /// top retained mode carries negligible weight.
    double tail_indicator() const {
        const double M = static_cast<double>(modes);
        double fmax = 0.0;
        for (double v : F.back()) fmax = std::max(fmax, std::abs(v));
        return M * std::abs(H.back()) + M * fmax;
    }
};

/// Homogenized problem: u = v + r with r(x,t) = u1 + (x/pi)(u2 - u1), so v has
/// zero boundary values, v(x,0) = h - r(.,0) =: H and source f - r_t =: F.
struct LiftedProblem {
    ModeData mode_data;
    std::vector<double> r_slope; // (u2(t_i) - u1(t_i)) / pi
    FunctionSpec u1;
    FunctionSpec u2;

    double r_at(double x, double t) const { return u1(t) + (x / pi) * (u2(t) - u1(t)); }
};

/// Build the homogenization lift and project initial value and source onto
/// the sine basis. Pure sine data with zero boundary contribution keeps the
/// exact projection path.
inline LiftedProblem lift(const ProblemSpec& spec, const TimeGrid& grid, int modes) {
    if (modes < 1) throw EvaluationError("mode count must be >= 1");
    const std::size_t count = grid.size();

    const double u1_0 = spec.u1(0.0);
    const double u2_0 = spec.u2(0.0);
    const bool boundary_zero_at_0 = (u1_0 == 0.0 && u2_0 == 0.0);
    const bool boundary_static = spec.u1.has_zero_derivative() && spec.u2.has_zero_derivative();

    // H_m: coefficients of h(x) - r(x,0)
    std::vector<double> H;
    if (boundary_zero_at_0 && spec.h.is_pure_sine_combination()) {
        H = sine_coefficients(spec.h, modes);
    } else {
        SineProjector proj(modes);
        H = proj.project([&](double x) {
            return spec.h(x) - (u1_0 + (x / pi) * (u2_0 - u1_0));
        });
    }

    // F_m(t_i): coefficients of f(x,t_i) - r_t(x,t_i)
    std::vector<std::vector<double>> F(static_cast<std::size_t>(modes),
                                       std::vector<double>(count, 0.0));
    const FunctionSpec* f_space = nullptr;
    const FunctionSpec* f_time = nullptr;
    static const FunctionSpec unit_time = FunctionSpec::constant(1.0);
    if (spec.f.kind() == FunctionSpec::Kind::product) {
        f_space = &spec.f.space_part();
        f_time = &spec.f.time_part();
    } else if (spec.f.is_pure_sine_combination()) {
        f_space = &spec.f;
        f_time = &unit_time;
    }

    if (spec.f.is_identically_zero() && boundary_static) {
        // F stays zero
    } else if (boundary_static && f_space != nullptr && f_space->is_pure_sine_combination()) {
        std::vector<double> space_coeff = sine_coefficients(*f_space, modes);
        for (std::size_t i = 0; i < count; ++i) {
            const double scale = (*f_time)(grid.node(i));
            for (int m = 0; m < modes; ++m)
                F[static_cast<std::size_t>(m)][i] = scale * space_coeff[static_cast<std::size_t>(m)];
        }
    } else {
        SineProjector proj(modes);
        for (std::size_t i = 0; i < count; ++i) {
            const double t = grid.node(i);
            const double du1 = spec.u1.derivative(t);
            const double du2 = spec.u2.derivative(t);
            std::vector<double> col = proj.project([&](double x) {
                return spec.f(x, t) - (du1 + (x / pi) * (du2 - du1));
            });
            for (int m = 0; m < modes; ++m)
                F[static_cast<std::size_t>(m)][i] = col[static_cast<std::size_t>(m)];
        }
    }

    std::vector<double> slope(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = grid.node(i);
        slope[i] = (spec.u2(t) - spec.u1(t)) / pi;
    }

    LiftedProblem out;
    out.mode_data = ModeData(modes, std::move(H), std::move(F), grid);
    out.r_slope = std::move(slope);
    out.u1 = spec.u1;
    out.u2 = spec.u2;
    return out;
}

/*
 * Series kernels of the flux equation. With the sqrt(2/pi) basis factor
 * absorbed, the boundary flux of the homogenized solution satisfies
 *
 *     Q0(A(t)) + int_0^t Q(A(t)-A(s), s) ds = g(t) - (u2(t)-u1(t))/pi,
 *
 * where A(t) = int_0^t a(s) ds.
 */

/// Q0(z) = sqrt(2/pi) * sum_m m H_m exp(-m^2 z); strictly decreasing in z for
/// admissible H (all H_m >= 0, at least one positive).
inline double eval_q0(const std::vector<double>& H, double z) {
    if (z < 0.0) throw DomainError("Q0 argument must be nonnegative, got " + std::to_string(z));
    double acc = 0.0;
    for (std::size_t m = H.size(); m-- > 0;) {
        const double mm = static_cast<double>(m + 1);
        acc += mm * H[m] * std::exp(-mm * mm * z);
    }
    return std::sqrt(2.0 / pi) * acc;
}

/// Q(z,s) = sqrt(2/pi) * sum_m m F_m(s) exp(-m^2 z), given the coefficient
/// column F_m(s) at fixed s.
inline double eval_q(const std::vector<double>& F_at_s, double z) {
    if (z < 0.0) throw DomainError("Q argument must be nonnegative, got " + std::to_string(z));
    double acc = 0.0;
    for (std::size_t m = F_at_s.size(); m-- > 0;) {
        const double mm = static_cast<double>(m + 1);
        acc += mm * F_at_s[m] * std::exp(-mm * mm * z);
    }
    return std::sqrt(2.0 / pi) * acc;
}

/// dQ/dz at fixed s, summed term by term.
inline double eval_q_derivative(const std::vector<double>& F_at_s, double z) {
    if (z < 0.0) throw DomainError("Q argument must be nonnegative, got " + std::to_string(z));
    double acc = 0.0;
    for (std::size_t m = F_at_s.size(); m-- > 0;) {
        const double mm = static_cast<double>(m + 1);
        acc -= mm * mm * mm * F_at_s[m] * std::exp(-mm * mm * z);
    }
    return std::sqrt(2.0 / pi) * acc;
}

/// dQ0/dz, summed term by term (negative for admissible H).
inline double eval_q0_derivative(const std::vector<double>& H, double z) {
    if (z < 0.0) throw DomainError("Q0 argument must be nonnegative, got " + std::to_string(z));
    double acc = 0.0;
    for (std::size_t m = H.size(); m-- > 0;) {
        const double mm = static_cast<double>(m + 1);
        acc -= mm * mm * mm * H[m] * std::exp(-mm * mm * z);
    }
    return std::sqrt(2.0 / pi) * acc;
}

/// Solve Q0(z) = y for z >= 0 by geometric bracketing followed by Newton with
/// a bisection safeguard. Requires 0 < y <= Q0(0).
inline double invert_q0(const std::vector<double>& H, double y, double tol) {
    const double top = eval_q0(H, 0.0);
    if (!(top > 0.0))
        throw DegenerateKernel("Q0 vanishes identically; initial-value coefficients are all zero");
    if (!(y > 0.0))
        throw OutOfRange("inversion target must be positive, got " + std::to_string(y));
    if (y > top * (1.0 + 1e-12))
        throw OutOfRange("inversion target " + std::to_string(y) + " exceeds Q0(0) = " +
                         std::to_string(top));
    if (y >= top) return 0.0;

    // grow the bracket until Q0(hi) <= y
    double lo = 0.0;
    double hi = 1.0;
    while (eval_q0(H, hi) > y) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e8)
            throw OutOfRange("inversion target too small to bracket: y = " + std::to_string(y));
    }

    double z = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double fz = eval_q0(H, z) - y;
        if (fz > 0.0)
            lo = z;
        else
            hi = z;
        if (std::abs(fz) <= tol * y) break;

        const double dfz = eval_q0_derivative(H, z);
        double z_next;
        if (dfz < 0.0) {
            z_next = z - fz / dfz;
            if (!(z_next > lo) || !(z_next < hi)) z_next = 0.5 * (lo + hi);
        } else {
            z_next = 0.5 * (lo + hi);
        }
        if (std::abs(z_next - z) <= 1e-16 * std::max(1.0, z)) {
            z = z_next;
            break;
        }
        z = z_next;
    }
    return z;
}

} // namespace diffrec
