#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "diffrec/fd_oracle.hpp"
#include "diffrec/forward.hpp"
#include "diffrec/validation.hpp"
#include "oracles.hpp"

using namespace diffrec;

namespace {

TimeSeries linear_A(const TimeGrid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = grid.node(i);
    return TimeSeries(grid, std::move(v));
}

ModeData single_mode_data(const TimeGrid& grid, double H1, double (*F1)(double)) {
    std::vector<std::vector<double>> F(1, std::vector<double>(grid.size(), 0.0));
    if (F1 != nullptr)
        for (std::size_t i = 0; i < grid.size(); ++i) F[0][i] = F1(grid.node(i));
    return ModeData(1, {H1}, std::move(F), grid);
}

double forced_mode(double s) { return std::sqrt(pi / 2.0) * std::exp(-s); }

} // namespace

TEST_CASE("accumulate_a: constant and sinusoidal coefficients") {
    const TimeGrid grid(1.0, 2000);
    const TimeSeries A1 = accumulate_a(FunctionSpec::constant(1.0), grid, 1e-6);
    CHECK(A1.values.front() == 0.0);
    CHECK(A1.values.back() == doctest::Approx(1.0).epsilon(1e-12));

    // a(t) = 1 + 0.5 sin t integrates to t + 0.5 (1 - cos t)
    const TimeSeries A2 = accumulate_a(FunctionSpec::sinusoid(1.0, 0.5, 1.0), grid, 1e-6);
    CHECK(A2.values.back() ==
          doctest::Approx(1.0 + 0.5 * (1.0 - std::cos(1.0))).epsilon(1e-8));
    for (std::size_t i = 1; i < A2.size(); ++i) CHECK(A2.values[i] > A2.values[i - 1]);
}

TEST_CASE("accumulate_a rejects coefficients at or below the floor") {
    const TimeGrid grid(1.0, 10);
    CHECK_THROWS_AS(accumulate_a(FunctionSpec::zero(), grid, 1e-6), CoefficientError);
    CHECK_THROWS_AS(accumulate_a(FunctionSpec::constant(-1.0), grid, 1e-6), CoefficientError);
    // dips below the floor between nodes
    CHECK_THROWS_AS(accumulate_a(FunctionSpec::sinusoid(1.0, -1.5, 2.0), grid, 1e-6),
                    CoefficientError);
}

TEST_CASE("accumulate_a flags a grid too coarse for the coefficient") {
    const TimeGrid grid(1.0, 10);
    CHECK_THROWS_AS(accumulate_a(FunctionSpec::sinusoid(1.0, 0.9, 200.0), grid, 1e-9),
                    CoefficientError);
}

TEST_CASE("solve_modes: decay of an unforced mode") {
    const TimeGrid grid(1.0, 200);
    const ModeTrajectory traj = solve_modes(linear_A(grid), single_mode_data(grid, std::sqrt(pi / 2.0), nullptr));
    CHECK(traj.c[0][0] == std::sqrt(pi / 2.0)); // exact initial condition
    CHECK(traj.c[0].back() ==
          doctest::Approx(std::sqrt(pi / 2.0) * std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("solve_modes: forced single mode matches the exact kernel integral") {
    // A = t, F_1(s) = sqrt(pi/2) e^{-s}  =>  c_1(t) = sqrt(pi/2) e^{-t} (1 + t)
    const TimeGrid grid(1.0, 200);
    const ModeTrajectory traj =
        solve_modes(linear_A(grid), single_mode_data(grid, std::sqrt(pi / 2.0), forced_mode));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        const double expect = std::sqrt(pi / 2.0) * std::exp(-t) * (1.0 + t);
        CHECK(traj.c[0][i] == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(traj.c[0].back() ==
          doctest::Approx(std::sqrt(pi / 2.0) * 2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("solve_modes: zero data stays zero") {
    const TimeGrid grid(1.0, 50);
    const ModeTrajectory traj = solve_modes(linear_A(grid), single_mode_data(grid, 0.0, nullptr));
    for (double v : traj.c[0]) CHECK(v == 0.0);
}

TEST_CASE("solve_modes rejects a decreasing accumulated coefficient") {
    const TimeGrid grid(1.0, 4);
    TimeSeries bad(grid, {0.0, 0.5, 0.4, 0.6, 0.8});
    CHECK_THROWS_AS(solve_modes(bad, single_mode_data(grid, 1.0, nullptr)), DomainError);
    TimeSeries offset(grid, {0.1, 0.2, 0.3, 0.4, 0.5});
    CHECK_THROWS_AS(solve_modes(offset, single_mode_data(grid, 1.0, nullptr)), DomainError);
}

TEST_CASE("property: discrete modes satisfy the mode equation at second order") {
    // residual of c' + a m^2 c = F under grid refinement
    auto max_residual = [](std::size_t n) {
        const TimeGrid grid(1.0, n);
        const FunctionSpec a = FunctionSpec::sinusoid(1.0, 0.5, 1.0);
        const TimeSeries A = accumulate_a(a, grid, 1e-6);
        const ModeTrajectory traj =
            solve_modes(A, single_mode_data(grid, std::sqrt(pi / 2.0), forced_mode));
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
            const double dc =
                (traj.c[0][i + 1] - traj.c[0][i - 1]) / (2.0 * grid.dt());
            const double res = dc + a(grid.node(i)) * traj.c[0][i] - forced_mode(grid.node(i));
            worst = std::max(worst, std::abs(res));
        }
        return worst;
    };
    const double coarse = max_residual(100);
    const double fine = max_residual(200);
    CHECK(fine < 1e-4);
    CHECK(coarse / fine > 3.0);
    CHECK(coarse / fine < 5.0);
}

TEST_CASE("property: mode amplitudes obey the damping bound") {
    std::mt19937 rng(20240815u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const TimeGrid grid(2.0, 64);
    for (int trial = 0; trial < 20; ++trial) {
        const int M = 3;
        std::vector<double> H(M);
        std::vector<std::vector<double>> F(M, std::vector<double>(grid.size()));
        for (auto& v : H) v = dist(rng);
        for (auto& row : F)
            for (auto& v : row) v = dist(rng);
        const ModeData md(M, H, F, grid);
        const ModeTrajectory traj = solve_modes(linear_A(grid), md);
        for (int m = 0; m < M; ++m) {
            double fmax = 0.0;
            for (double v : md.F[static_cast<std::size_t>(m)]) fmax = std::max(fmax, std::abs(v));
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double bound = std::abs(md.H[static_cast<std::size_t>(m)]) +
                                     grid.node(i) * fmax + 1e-12;
                CHECK(std::abs(traj.c[static_cast<std::size_t>(m)][i]) <= bound);
            }
        }
    }
}

TEST_CASE("reconstruct_u: single decaying mode") {
    const ProblemSpec spec(FunctionSpec::zero(), FunctionSpec::zero(),
                           FunctionSpec::sine_combination({{1, 1.0}}), FunctionSpec::zero());
    const TimeGrid grid(1.0, 100);
    const LiftedProblem lifted = lift(spec, grid, 4);
    const TimeSeries A = linear_A(grid);
    const ModeTrajectory traj = solve_modes(A, lifted.mode_data);
    const FieldSnapshot snap = reconstruct_u(traj, lifted, {0.0, pi / 2.0, pi}, grid.n());
    CHECK(snap.values[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(snap.values[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(snap.values[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("reconstruct_u: pure lift and zero cases") {
    const TimeGrid grid(1.0, 10);
    const ProblemSpec ones(FunctionSpec::constant(1.0), FunctionSpec::constant(1.0),
                           FunctionSpec::constant(1.0), FunctionSpec::zero());
    const LiftedProblem lifted = lift(ones, grid, 4);
    const ModeTrajectory traj = solve_modes(linear_A(grid), lifted.mode_data);
    const FieldSnapshot snap = reconstruct_u(traj, lifted, {0.0, 1.0, 2.0, pi}, 5);
    for (double v : snap.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));

    const ProblemSpec zero(FunctionSpec::zero(), FunctionSpec::zero(), FunctionSpec::zero(),
                           FunctionSpec::zero());
    const LiftedProblem lifted0 = lift(zero, grid, 4);
    const ModeTrajectory traj0 = solve_modes(linear_A(grid), lifted0.mode_data);
    const FieldSnapshot snap0 = reconstruct_u(traj0, lifted0, {0.5, 1.5}, 3);
    for (double v : snap0.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("reconstruct_u matches boundary data exactly") {
    const ProblemSpec spec(FunctionSpec::sinusoid(1.0, 0.25, 2.0),
                           FunctionSpec::exponential(1.0, 0.5),
                           FunctionSpec::sample_table({{0.0, 1.0}, {pi / 2, 1.1}, {pi, 1.0}}),
                           FunctionSpec::zero());
    const TimeGrid grid(1.0, 20);
    const LiftedProblem lifted = lift(spec, grid, 6);
    const ModeTrajectory traj = solve_modes(linear_A(grid), lifted.mode_data);
    for (std::size_t idx : {std::size_t{0}, std::size_t{10}, std::size_t{20}}) {
        const FieldSnapshot snap = reconstruct_u(traj, lifted, {0.0, pi}, idx);
        const double t = grid.node(idx);
        CHECK(snap.values[0] == doctest::Approx(spec.u1(t)).epsilon(1e-9));
        CHECK(snap.values[1] == doctest::Approx(spec.u2(t)).epsilon(1e-9));
    }
}

TEST_CASE("synthesize_flux: single mode, lift slope, and forced cases") {
    const TimeGrid grid(1.0, 100);

    // decaying single mode: g(t) = e^{-t}
    const ModeTrajectory decay =
        solve_modes(linear_A(grid), single_mode_data(grid, std::sqrt(pi / 2.0), nullptr));
    LiftedProblem zero_lift;
    zero_lift.mode_data = single_mode_data(grid, std::sqrt(pi / 2.0), nullptr);
    zero_lift.r_slope.assign(grid.size(), 0.0);
    zero_lift.u1 = FunctionSpec::zero();
    zero_lift.u2 = FunctionSpec::zero();
    const FluxData g1 = synthesize_flux(decay, zero_lift);
    CHECK(g1.g.front() == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(g1.g[i] == doctest::Approx(std::exp(-grid.node(i))).epsilon(1e-12));

    // zero modes, u1 = 0, u2 = pi: flux is the lift slope alone;
    // h(x) = x matches the corners (h(0)=0, h(pi)=pi) and equals the lift
    const ProblemSpec lift_spec(FunctionSpec::zero(), FunctionSpec::constant(pi),
                                FunctionSpec::polynomial({0.0, 1.0}), FunctionSpec::zero());
    const LiftedProblem lifted = lift(lift_spec, grid, 4);
    const ModeTrajectory traj = solve_modes(linear_A(grid), lifted.mode_data);
    const FluxData g2 = synthesize_flux(traj, lifted);
    for (double v : g2.g) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));

    // forced single mode: g(t) = e^{-t} (1 + t)
    const ModeTrajectory forced =
        solve_modes(linear_A(grid), single_mode_data(grid, std::sqrt(pi / 2.0), forced_mode));
    const FluxData g3 = synthesize_flux(forced, zero_lift);
    CHECK(g3.g.back() == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("synthesized flux at t=0 agrees with the compatibility value") {
    const TimeGrid grid(1.0, 50);
    for (const ProblemSpec& spec :
         {ProblemSpec(FunctionSpec::zero(), FunctionSpec::zero(),
                      FunctionSpec::sine_combination({{1, 1.0}, {3, 0.2}}), FunctionSpec::zero()),
          ProblemSpec(FunctionSpec::zero(), FunctionSpec::zero(),
                      FunctionSpec::polynomial({0.0, pi, -1.0}), FunctionSpec::zero())}) {
        const LiftedProblem lifted = lift(spec, grid, 8);
        const TimeSeries A = accumulate_a(FunctionSpec::constant(1.0), grid, 1e-6);
        const FluxData g = synthesize_flux(solve_modes(A, lifted.mode_data), lifted);
        CHECK(compatibility_check(spec, g, 8) <= 1e-10);
    }
}

TEST_CASE("fd_solve: decaying sine mode against the separated solution") {
    const ProblemSpec spec(FunctionSpec::zero(), FunctionSpec::zero(),
                           FunctionSpec::sine_combination({{1, 1.0}}), FunctionSpec::zero());
    const TimeGrid grid(1.0, 1000);
    const auto [snaps, g] = fd_solve(spec, FunctionSpec::constant(1.0), 200, grid);
    const FieldSnapshot& last = snaps.back();
    // u(pi/2, 1) = e^{-1}
    const std::size_t mid = 100;
    CHECK(last.x_nodes[mid] == doctest::Approx(pi / 2.0).epsilon(1e-14));
    CHECK(last.values[mid] == doctest::Approx(std::exp(-1.0)).epsilon(1e-4));
    CHECK(std::abs(last.values[mid] - std::exp(-1.0)) <= 1e-4);
    // flux g(t) = e^{-t}
    CHECK(g.g.back() == doctest::Approx(std::exp(-1.0)).epsilon(5e-4));
}

TEST_CASE("fd_solve: zero and constant data are reproduced exactly") {
    const TimeGrid grid(0.5, 50);
    const ProblemSpec zero(FunctionSpec::zero(), FunctionSpec::zero(), FunctionSpec::zero(),
                           FunctionSpec::zero());
    const auto [zsnaps, zg] = fd_solve(zero, FunctionSpec::constant(1.0), 16, grid);
    for (double v : zsnaps.back().values) CHECK(v == 0.0);
    for (double v : zg.g) CHECK(v == 0.0);

    const ProblemSpec ones(FunctionSpec::constant(1.0), FunctionSpec::constant(1.0),
                           FunctionSpec::constant(1.0), FunctionSpec::zero());
    const auto [osnaps, og] = fd_solve(ones, FunctionSpec::constant(1.0), 16, grid);
    for (double v : osnaps.back().values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
    for (double v : og.g) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("fd_solve: moving boundary with compensating source") {
    // u2 = pi t, f = x, h = sin x, a = 1: exact solution u = e^{-t} sin x + x t
    const ProblemSpec spec(FunctionSpec::zero(), FunctionSpec::polynomial({0.0, pi}),
                           FunctionSpec::sine_combination({{1, 1.0}}),
                           FunctionSpec::product(FunctionSpec::polynomial({0.0, 1.0}),
                                                 FunctionSpec::constant(1.0)));
    const TimeGrid grid(1.0, 1000);
    const auto [snaps, g] = fd_solve(spec, FunctionSpec::constant(1.0), 200, grid);
    const FieldSnapshot& last = snaps.back();
    const std::size_t mid = 100;
    CHECK(last.values[mid] ==
          doctest::Approx(std::exp(-1.0) + pi / 2.0).epsilon(1e-4));
    // flux g(t) = e^{-t} + t
    CHECK(g.g.back() == doctest::Approx(std::exp(-1.0) + 1.0).epsilon(1e-3));
    CHECK(g.g.front() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("fd_solve validates inputs") {
    const TimeGrid grid(1.0, 10);
    const ProblemSpec spec(FunctionSpec::zero(), FunctionSpec::zero(), FunctionSpec::zero(),
                           FunctionSpec::zero());
    CHECK_THROWS_AS(fd_solve(spec, FunctionSpec::constant(1.0), 4, grid), InvalidGrid);
    CHECK_THROWS_AS(fd_solve(spec, FunctionSpec::zero(), 16, grid), CoefficientError);
}
