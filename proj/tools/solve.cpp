#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffrec/diffrec.hpp"

namespace {

struct Args {
    std::string config;
    std::string out = "out";
    std::vector<std::string> sets;
};

int dispatch(diffrec::Command command, const Args& args) {
    try {
        diffrec::RunConfig cfg = diffrec::parse_config(args.config, command, args.sets);
        cfg.io.out_dir = args.out;
        return diffrec::run(cfg);
    } catch (const diffrec::Error& e) {
        std::cerr << "error: " << diffrec::category_slug(e.category()) << ": " << e.what() << "\n";
        return diffrec::exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Recover a time-dependent diffusion coefficient a(t) in "
        "u_t - a(t) u_xx = f on [0,pi] from boundary flux data, or synthesize "
        "such data for a known coefficient."};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 2 config, 3 data-inconsistent, 4 not-converged, "
               "5 oracle-failure.\n"
               "The config schema is documented in README.md; see configs/ for samples.");

    Args args;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"forward", "Synthesize flux and field snapshots for a known a(t)"},
        {"invert", "Recover a(t) from measured or synthesized flux data"},
        {"roundtrip", "Synthesize flux from a_true, invert it, report recovery errors"},
        {"closedform", "Closed-form recovery for the single-mode source scenario"},
        {"validate", "Check the structural assumptions and data compatibility"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", args.config, "Path to the run configuration file")
            ->required();
        sub->add_option("--out", args.out, "Output directory (default: out)");
        sub->add_option("--set", args.sets,
                        "Override a config key, e.g. --set solver.tol=1e-10 (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "forward") return dispatch(diffrec::Command::forward, args);
    if (name == "invert") return dispatch(diffrec::Command::invert, args);
    if (name == "roundtrip") return dispatch(diffrec::Command::roundtrip, args);
    if (name == "closedform") return dispatch(diffrec::Command::closedform, args);
    return dispatch(diffrec::Command::validate, args);
}
