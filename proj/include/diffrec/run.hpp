#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffrec/config.hpp"
#include "diffrec/csv.hpp"
#include "diffrec/fd_oracle.hpp"
#include "diffrec/forward.hpp"
#include "diffrec/inverse.hpp"
#include "diffrec/validation.hpp"

namespace diffrec {

/// Documented process exit codes.
inline int exit_code_for(ErrorCategory cat) {
    switch (cat) {
    case ErrorCategory::config:
    case ErrorCategory::invalid_grid:
    case ErrorCategory::evaluation:
    case ErrorCategory::coefficient:
        return 2;
    case ErrorCategory::data_inconsistent:
    case ErrorCategory::out_of_range:
    case ErrorCategory::domain:
    case ErrorCategory::degenerate_kernel:
        return 3;
    case ErrorCategory::not_converged:
        return 4;
    case ErrorCategory::oracle_failure:
        return 5;
    }
    return 1;
}

inline const char* category_slug(ErrorCategory cat) {
    switch (cat) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::invalid_grid: return "invalid-grid";
    case ErrorCategory::evaluation: return "evaluation";
    case ErrorCategory::coefficient: return "coefficient";
    case ErrorCategory::data_inconsistent: return "data-inconsistent";
    case ErrorCategory::out_of_range: return "out-of-range";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::degenerate_kernel: return "degenerate-kernel";
    case ErrorCategory::not_converged: return "not-converged";
    case ErrorCategory::oracle_failure: return "oracle-failure";
    }
    return "error";
}

namespace rundetail {

inline nlohmann::json json_of(const ContractionReport& r) {
    return {{"C0", r.C0},
            {"C", r.C},
            {"C1", r.C1},
            {"t0_predicted", r.t0_predicted},
            {"ball_radius", r.ball_radius}};
}

inline nlohmann::json json_of(const AssumptionReport& r) {
    return {{"h_coeff_positivity", to_string(r.h_coeff_positivity)},
            {"g_positivity", to_string(r.g_positivity)},
            {"f_coeff_nonnegativity", to_string(r.f_coeff_nonnegativity)},
            {"cubic_sum_verdict", to_string(r.cubic_sum_verdict)},
            {"cubic_sum_bound", r.cubic_sum_bound},
            {"cubic_tail_estimate", r.cubic_tail_estimate},
            {"compatibility_residual", r.compatibility_residual}};
}

inline nlohmann::json json_of(const InverseResult& r) {
    return {{"residual_history", r.residual_history},
            {"equation_residual", r.equation_residual},
            {"converged", r.converged},
            {"iterations_used", r.iterations_used},
            {"clamped_mass", r.clamped_mass}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = detail::open_for_write(path);
    out << j.dump(2) << '\n';
}

/// Synthesize flux from a_true through the spectral forward chain.
inline FluxData synthesize(const RunConfig& cfg, const LiftedProblem& lifted) {
    const TimeSeries A = accumulate_a(*cfg.problem.a_true, cfg.grid, cfg.problem.a_floor);
    const ModeTrajectory traj = solve_modes(A, lifted.mode_data);
    return synthesize_flux(traj, lifted);
}

/// Flux for data-consuming commands: measured table if configured, else
/// synthesized from a_true.
inline FluxData obtain_flux(const RunConfig& cfg, const LiftedProblem& lifted,
                            std::string& source_note) {
    if (cfg.g_csv) {
        source_note = "table " + *cfg.g_csv + " (linear interpolation onto the solver grid; "
                      "interpolation error is not corrected)";
        return read_flux_table(*cfg.g_csv, cfg.grid);
    }
    source_note = "synthesized from problem.a_true";
    return synthesize(cfg, lifted);
}

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.io.out_dir) / name).string();
}

inline void warn_tail(const ModeData& md) {
    const double tail = md.tail_indicator();
    if (tail > 1e-8)
        std::cerr << "warning: spectral tail indicator " << format_double(tail)
                  << " exceeds 1e-8; consider increasing solver.modes\n";
}

inline std::size_t nearest_node(const TimeGrid& grid, double t) {
    const double idx = t / grid.dt();
    const long i = std::lround(idx);
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(grid.n())));
}

inline std::string snapshot_name(double t) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "field_%.6g.csv", t);
    return buf;
}

inline int run_forward(const RunConfig& cfg) {
    const LiftedProblem lifted = lift(cfg.problem, cfg.grid, cfg.solver.modes);
    warn_tail(lifted.mode_data);
    const TimeSeries A = accumulate_a(*cfg.problem.a_true, cfg.grid, cfg.problem.a_floor);
    const ModeTrajectory traj = solve_modes(A, lifted.mode_data);
    const FluxData g = synthesize_flux(traj, lifted);
    write_flux_csv(out_path(cfg, "g.csv"), g);

    std::vector<double> x_nodes(cfg.io.x_count + 1);
    for (std::size_t j = 0; j <= cfg.io.x_count; ++j)
        x_nodes[j] = pi * static_cast<double>(j) / static_cast<double>(cfg.io.x_count);
    std::vector<double> times = cfg.io.snapshot_times;
    if (times.empty()) times.push_back(cfg.grid.t_max());
    nlohmann::json fields = nlohmann::json::array();
    for (double t : times) {
        const std::size_t idx = nearest_node(cfg.grid, t);
        const FieldSnapshot snap = reconstruct_u(traj, lifted, x_nodes, idx);
        const std::string name = snapshot_name(snap.t);
        write_field_csv(out_path(cfg, name), snap);
        fields.push_back(name);
    }

    write_json(out_path(cfg, "report.json"),
               {{"command", "forward"},
                {"tail_indicator", lifted.mode_data.tail_indicator()},
                {"g_csv", "g.csv"},
                {"fields", fields}});
    std::cout << "forward: wrote g.csv and " << times.size() << " field snapshot(s) to "
              << cfg.io.out_dir << "\n";
    return 0;
}

inline int run_invert(const RunConfig& cfg, bool roundtrip) {
    const LiftedProblem lifted = lift(cfg.problem, cfg.grid, cfg.solver.modes);
    warn_tail(lifted.mode_data);

    std::string source_note;
    FluxData g = roundtrip ? synthesize(cfg, lifted) : obtain_flux(cfg, lifted, source_note);
    if (roundtrip) {
        source_note = "synthesized from problem.a_true";
        if (cfg.roundtrip_noise > 0.0) {
            std::mt19937 rng(static_cast<std::mt19937::result_type>(cfg.roundtrip_seed));
            std::uniform_real_distribution<double> dist(-cfg.roundtrip_noise, cfg.roundtrip_noise);
            for (double& v : g.g) v += dist(rng);
            source_note += " with uniform noise amplitude " + format_double(cfg.roundtrip_noise);
        }
        write_flux_csv(out_path(cfg, "g.csv"), g);
    }

    const AssumptionReport assumptions =
        validate_assumptions(cfg.problem, cfg.grid, cfg.solver.modes, g);
    if (assumptions.any_fail())
        throw DataInconsistent(
            "assumption check failed (h: " + std::string(to_string(assumptions.h_coeff_positivity)) +
            ", g: " + to_string(assumptions.g_positivity) +
            ", f: " + to_string(assumptions.f_coeff_nonnegativity) + ")");

    const InverseResult result = fixed_point_solve(g, lifted, cfg.solver);
    const ContractionReport contraction = contraction_estimate(lifted, g, cfg.solver);

    write_result_csv(out_path(cfg, "result.csv"), result.A, result.a);
    nlohmann::json report{{"command", roundtrip ? "roundtrip" : "invert"},
                          {"g_source", source_note},
                          {"solver", json_of(result)},
                          {"contraction", json_of(contraction)},
                          {"assumptions", json_of(assumptions)},
                          {"result_csv", "result.csv"}};

    if (roundtrip) {
        const TimeSeries A_true = accumulate_a(*cfg.problem.a_true, cfg.grid, cfg.problem.a_floor);
        const std::size_t n = cfg.grid.n();
        const std::size_t lo = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n)));
        const std::size_t hi = static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(n)));
        double supA = 0.0, l2A = 0.0, sup_a = 0.0, l2_a = 0.0, sup_rel_a = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double d = std::abs(result.A.values[i] - A_true.values[i]);
            supA = std::max(supA, d);
            l2A += d * d;
        }
        for (std::size_t i = lo; i <= hi; ++i) {
            const double truth = (*cfg.problem.a_true)(cfg.grid.node(i));
            const double d = std::abs(result.a.values[i] - truth);
            sup_a = std::max(sup_a, d);
            sup_rel_a = std::max(sup_rel_a, d / std::abs(truth));
            l2_a += d * d;
        }
        const double dt = cfg.grid.dt();
        report["recovery"] = {{"A_sup_error", supA},
                              {"A_l2_error", std::sqrt(l2A * dt)},
                              {"a_interior_sup_error", sup_a},
                              {"a_interior_sup_rel_error", sup_rel_a},
                              {"a_interior_l2_error", std::sqrt(l2_a * dt)},
                              {"interior_range", {cfg.grid.node(lo), cfg.grid.node(hi)}}};
        std::cout << "roundtrip: sup|A_rec - A_true| = " << format_double(supA)
                  << ", interior sup|a_rec - a_true| = " << format_double(sup_a) << "\n";
    }

    write_json(out_path(cfg, "report.json"), report);
    std::cout << (roundtrip ? "roundtrip" : "invert") << ": converged = "
              << (result.converged ? "true" : "false")
              << ", iterations = " << result.iterations_used
              << ", equation residual = " << format_double(result.equation_residual) << "\n";

    if (!result.converged) {
        std::cerr << "error: not-converged: fixed point not reached within "
                  << cfg.solver.max_iter << " iterations\n";
        return exit_code_for(ErrorCategory::not_converged);
    }
    return 0;
}

inline int run_closedform(const RunConfig& cfg) {
    const LiftedProblem lifted = lift(cfg.problem, cfg.grid, cfg.solver.modes);
    std::string source_note;
    const FluxData g = obtain_flux(cfg, lifted, source_note);
    const ClosedFormResult rec = closed_form_recover(g, cfg.closedform_t_min);
    write_series_csv(out_path(cfg, "closedform.csv"), "t,a", rec.a, rec.first_valid);
    write_json(out_path(cfg, "report.json"),
               {{"command", "closedform"},
                {"g_source", source_note},
                {"t_min", cfg.closedform_t_min},
                {"first_valid_t", rec.a.grid.node(rec.first_valid)},
                {"result_csv", "closedform.csv"}});
    std::cout << "closedform: recovered a(t) on [" << format_double(rec.a.grid.node(rec.first_valid))
              << ", " << format_double(cfg.grid.t_max()) << "]\n";
    return 0;
}

inline int run_validate(const RunConfig& cfg) {
    const LiftedProblem lifted = lift(cfg.problem, cfg.grid, cfg.solver.modes);
    std::string source_note;
    const FluxData g = obtain_flux(cfg, lifted, source_note);
    const AssumptionReport report =
        validate_assumptions(cfg.problem, cfg.grid, cfg.solver.modes, g);
    nlohmann::json j = json_of(report);
    j["command"] = "validate";
    j["g_source"] = source_note;
    j["tail_indicator"] = lifted.mode_data.tail_indicator();
    write_json(out_path(cfg, "assumptions.json"), j);
    std::cout << "h coefficient positivity:    " << to_string(report.h_coeff_positivity) << "\n"
              << "g positivity:                " << to_string(report.g_positivity) << "\n"
              << "f coefficient nonnegativity: " << to_string(report.f_coeff_nonnegativity) << "\n"
              << "cubic sum bound:             " << format_double(report.cubic_sum_bound) << " ("
              << to_string(report.cubic_sum_verdict) << ")\n"
              << "compatibility residual:      " << format_double(report.compatibility_residual)
              << "\n";
    return 0;
}

} // namespace rundetail

/// Execute one command; writes artifacts under cfg.io.out_dir and returns the
/// process exit status.
inline int run(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.io.out_dir);
    switch (cfg.command) {
    case Command::forward: return rundetail::run_forward(cfg);
    case Command::invert: return rundetail::run_invert(cfg, false);
    case Command::roundtrip: return rundetail::run_invert(cfg, true);
    case Command::closedform: return rundetail::run_closedform(cfg);
    case Command::validate: return rundetail::run_validate(cfg);
    }
    return 1;
}

} // namespace diffrec
