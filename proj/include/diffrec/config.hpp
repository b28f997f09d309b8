#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diffrec/csv.hpp"
#include "diffrec/errors.hpp"
#include "diffrec/function_spec.hpp"
#include "diffrec/grid.hpp"
#include "diffrec/inverse.hpp"
#include "diffrec/problem.hpp"

namespace diffrec {

enum class Command { forward, invert, roundtrip, closedform, validate };

inline const char* to_string(Command c) {
    switch (c) {
    case Command::forward: return "forward";
    case Command::invert: return "invert";
    case Command::roundtrip: return "roundtrip";
    case Command::closedform: return "closedform";
    case Command::validate: return "validate";
    }
    return "?";
}

struct IoOptions {
    std::string out_dir = "out";
    std::size_t x_count = 200;
    std::vector<double> snapshot_times; // empty means final time only
};

/// One run = one command + one fully validated configuration.
struct RunConfig {
    Command command = Command::validate;
    ProblemSpec problem;
    TimeGrid grid;
    SolverOptions solver;
    IoOptions io;
    std::optional<std::string> g_csv; // measured flux table
    double closedform_t_min = 0.01;
    double roundtrip_noise = 0.0;
    unsigned long roundtrip_seed = 20240801;
    std::string config_path;
};

namespace cfg {

struct Entry {
    std::string value;
    std::size_t line = 0; // 0 = command-line override
    bool used = false;
};

using FlatMap = std::map<std::string, Entry>;

[[noreturn]] inline void fail(const std::string& file, const Entry* e, const std::string& key,
                              const std::string& msg) {
    std::string where = file;
    if (e != nullptr) where += e->line == 0 ? " (--set)" : (":" + std::to_string(e->line));
    throw ConfigError("config error at " + where + ": " + key + ": " + msg);
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Parse "[section]" / "key = value" lines with '#' comments into a flat
/// dotted-key map.
inline FlatMap parse_flat(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    FlatMap map;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config error at " + path + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config error at " + path + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        map[key] = Entry{trim(t.substr(eq + 1)), line_no, false};
    }
    return map;
}

inline void apply_overrides(FlatMap& map, const std::vector<std::string>& overrides,
                            const std::string& path) {
    for (const std::string& o : overrides) {
        const std::size_t eq = o.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config error at " + path +
                              " (--set): expected key=value, got '" + o + "'");
        map[trim(o.substr(0, eq))] = Entry{trim(o.substr(eq + 1)), 0, false};
    }
}

inline double to_double(const std::string& file, const Entry& e, const std::string& key,
                        const std::string& text) {
    std::istringstream ss(text);
    double v = 0.0;
    char extra = 0;
    if (!(ss >> v) || (ss >> extra) || !std::isfinite(v))
        fail(file, &e, key, "malformed number '" + text + "'");
    return v;
}

class Reader {
public:
    Reader(FlatMap& map, std::string file) : map_(map), file_(std::move(file)) {}

    bool has(const std::string& key) const { return map_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        auto it = map_.find(key);
        if (it == map_.end()) return fallback;
        it->second.used = true;
        return it->second.value;
    }

    std::string require_string(const std::string& key) {
        auto it = map_.find(key);
        if (it == map_.end())
            throw ConfigError("config error at " + file_ + ": missing required key '" + key + "'");
        it->second.used = true;
        return it->second.value;
    }

    double get_double(const std::string& key, double fallback) {
        auto it = map_.find(key);
        if (it == map_.end()) return fallback;
        it->second.used = true;
        return to_double(file_, it->second, key, it->second.value);
    }

    double require_double(const std::string& key) {
        auto it = map_.find(key);
        if (it == map_.end())
            throw ConfigError("config error at " + file_ + ": missing required key '" + key + "'");
        it->second.used = true;
        return to_double(file_, it->second, key, it->second.value);
    }

    long get_long(const std::string& key, long fallback) {
        auto it = map_.find(key);
        if (it == map_.end()) return fallback;
        it->second.used = true;
        const double v = to_double(file_, it->second, key, it->second.value);
        if (v != std::floor(v)) fail(file_, &it->second, key, "expected an integer");
        return static_cast<long>(v);
    }

    const Entry* entry(const std::string& key) const {
        auto it = map_.find(key);
        return it == map_.end() ? nullptr : &it->second;
    }

    [[noreturn]] void fail_key(const std::string& key, const std::string& msg) {
        fail(file_, entry(key), key, msg);
    }

    /// Reject unrecognized keys so typos do not silently fall back to
    /// defaults.
    void check_all_used() const {
        for (const auto& [key, e] : map_)
            if (!e.used) fail(file_, &e, key, "unknown key");
    }

    const std::string& file() const { return file_; }

private:
    FlatMap& map_;
    std::string file_;
};

/// Function grammar:
///   zero | constant c | polynomial c0 c1 ... | exponential c lambda
///   | sinusoid a b omega | sines m1 k1 [m2 k2 ...] | mode-source m
///   | table <path>
/// and, for the source slot only, '<space atom> * <time atom>'.
inline FunctionSpec parse_function_atom(Reader& r, const std::string& key,
                                        const std::string& text) {
    std::istringstream ss(text);
    std::string kind;
    ss >> kind;
    auto numbers = [&]() {
        std::vector<double> out;
        std::string tok;
        while (ss >> tok) {
            std::istringstream ts(tok);
            double v = 0.0;
            char extra = 0;
            if (!(ts >> v) || (ts >> extra))
                r.fail_key(key, "malformed number '" + tok + "'");
            out.push_back(v);
        }
        return out;
    };

    try {
        if (kind == "zero") {
            if (!numbers().empty()) r.fail_key(key, "'zero' takes no parameters");
            return FunctionSpec::zero();
        }
        if (kind == "constant") {
            auto p = numbers();
            if (p.size() != 1) r.fail_key(key, "'constant' takes exactly one parameter");
            return FunctionSpec::constant(p[0]);
        }
        if (kind == "polynomial") {
            auto p = numbers();
            if (p.empty()) r.fail_key(key, "'polynomial' needs at least one coefficient");
            return FunctionSpec::polynomial(p);
        }
        if (kind == "exponential") {
            auto p = numbers();
            if (p.size() != 2) r.fail_key(key, "'exponential' takes amplitude and rate");
            return FunctionSpec::exponential(p[0], p[1]);
        }
        if (kind == "sinusoid") {
            auto p = numbers();
            if (p.size() != 3) r.fail_key(key, "'sinusoid' takes offset, amplitude, frequency");
            return FunctionSpec::sinusoid(p[0], p[1], p[2]);
        }
        if (kind == "sines") {
            auto p = numbers();
            if (p.empty() || p.size() % 2 != 0)
                r.fail_key(key, "'sines' takes mode/coefficient pairs");
            std::vector<std::pair<int, double>> terms;
            for (std::size_t i = 0; i < p.size(); i += 2) {
                if (p[i] != std::floor(p[i]) || p[i] < 1.0)
                    r.fail_key(key, "mode indices must be positive integers");
                terms.emplace_back(static_cast<int>(p[i]), p[i + 1]);
            }
            return FunctionSpec::sine_combination(std::move(terms));
        }
        if (kind == "mode-source") {
            auto p = numbers();
            if (p.size() != 1 || p[0] != std::floor(p[0]) || p[0] < 1.0)
                r.fail_key(key, "'mode-source' takes one positive integer mode index");
            return FunctionSpec::mode_source(static_cast<int>(p[0]));
        }
        if (kind == "table") {
            std::string path, extra;
            ss >> path;
            if (path.empty() || (ss >> extra))
                r.fail_key(key, "'table' takes exactly one file path");
            return FunctionSpec::sample_table(read_table_csv(path));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        r.fail_key(key, e.what());
    }
    r.fail_key(key, "unknown function kind '" + kind + "'");
}

inline FunctionSpec parse_function(Reader& r, const std::string& key, bool allow_product) {
    const std::string text = r.require_string(key);
    const std::size_t star = text.find('*');
    if (star == std::string::npos) return parse_function_atom(r, key, text);
    if (!allow_product)
        r.fail_key(key, "products are only allowed for the source term f");
    FunctionSpec space = parse_function_atom(r, key, trim(text.substr(0, star)));
    FunctionSpec time = parse_function_atom(r, key, trim(text.substr(star + 1)));
    try {
        return FunctionSpec::product(std::move(space), std::move(time));
    } catch (const Error& e) {
        r.fail_key(key, e.what());
    }
}

} // namespace cfg

/// True when the problem is the special scenario solved in closed form:
/// zero boundary and initial data, source equal to the first basis function.
inline bool is_closed_form_scenario(const ProblemSpec& spec) {
    if (!spec.u1.is_identically_zero() || !spec.u2.is_identically_zero() ||
        !spec.h.is_identically_zero())
        return false;
    const FunctionSpec& f = spec.f;
    if (f.kind() == FunctionSpec::Kind::mode_source)
        return static_cast<int>(f.params()[0]) == 1;
    if (f.kind() == FunctionSpec::Kind::sine_combination) {
        const double want = std::sqrt(2.0 / pi);
        double k1 = 0.0;
        for (const auto& [m, k] : f.sine_terms()) {
            if (m == 1)
                k1 = k;
            else if (k != 0.0)
                return false;
        }
        return std::abs(k1 - want) <= 1e-12;
    }
    return false;
}

/// Parse and fully validate a run configuration. Overrides are applied as
/// dotted 'key=value' pairs before validation.
inline RunConfig parse_config(const std::string& path, Command command,
                              const std::vector<std::string>& overrides = {}) {
    cfg::FlatMap map = cfg::parse_flat(path);
    cfg::apply_overrides(map, overrides, path);
    cfg::Reader r(map, path);

    RunConfig out;
    out.command = command;
    out.config_path = path;

    // [grid]
    const double t_max = r.require_double("grid.t_max");
    if (!(t_max > 0.0)) r.fail_key("grid.t_max", "must be > 0");
    const long n = r.get_long("grid.n", -1);
    if (n < 2) r.fail_key("grid.n", "must be an integer >= 2");
    out.grid = TimeGrid(t_max, static_cast<std::size_t>(n));

    // [problem]
    FunctionSpec u1 = cfg::parse_function(r, "problem.u1", false);
    FunctionSpec u2 = cfg::parse_function(r, "problem.u2", false);
    FunctionSpec h = cfg::parse_function(r, "problem.h", false);
    FunctionSpec f = cfg::parse_function(r, "problem.f", true);
    std::optional<FunctionSpec> a_true;
    if (r.has("problem.a_true")) a_true = cfg::parse_function(r, "problem.a_true", false);
    const double a_floor = r.get_double("problem.a_floor", 1e-6);
    if (!(a_floor > 0.0)) r.fail_key("problem.a_floor", "must be > 0");
    try {
        out.problem = ProblemSpec(std::move(u1), std::move(u2), std::move(h), std::move(f),
                                  std::move(a_true), a_floor);
        out.problem.check_coefficient_bound(out.grid);
    } catch (const Error& e) {
        throw ConfigError("config error at " + path + ": problem: " + std::string(e.what()));
    }

    // [solver]
    out.solver.modes = static_cast<int>(r.get_long("solver.modes", 16));
    if (out.solver.modes < 1) r.fail_key("solver.modes", "must be >= 1");
    out.solver.tol = r.get_double("solver.tol", 1e-10);
    if (!(out.solver.tol > 0.0)) r.fail_key("solver.tol", "must be > 0");
    const long max_iter = r.get_long("solver.max_iter", 200);
    if (max_iter < 1) r.fail_key("solver.max_iter", "must be >= 1");
    out.solver.max_iter = static_cast<std::size_t>(max_iter);
    out.solver.inversion_tol = r.get_double("solver.inversion_tol", 1e-13);
    if (!(out.solver.inversion_tol > 0.0)) r.fail_key("solver.inversion_tol", "must be > 0");
    const std::string method = r.get_string("solver.method", "picard-global");
    if (method == "picard-global")
        out.solver.method = InverseMethod::picard_global;
    else if (method == "volterra-marching")
        out.solver.method = InverseMethod::volterra_marching;
    else
        r.fail_key("solver.method", "expected picard-global or volterra-marching");
    const std::string clamp = r.get_string("solver.clamp", "clamp-to-zero");
    if (clamp == "clamp-to-zero")
        out.solver.clamp_policy = ClampPolicy::clamp_to_zero;
    else if (clamp == "monotone-projection")
        out.solver.clamp_policy = ClampPolicy::monotone_projection;
    else
        r.fail_key("solver.clamp", "expected clamp-to-zero or monotone-projection");
    const long window = r.get_long("solver.smoothing_window", 0);
    if (window < 0) r.fail_key("solver.smoothing_window", "must be >= 0");
    out.solver.smoothing_window = static_cast<std::size_t>(window);

    // [data] / [closedform] / [roundtrip] / [io]
    if (r.has("data.g_csv")) out.g_csv = r.require_string("data.g_csv");
    out.closedform_t_min = r.get_double("closedform.t_min", 0.01);
    if (!(out.closedform_t_min > 0.0)) r.fail_key("closedform.t_min", "must be > 0");
    out.roundtrip_noise = r.get_double("roundtrip.noise", 0.0);
    if (out.roundtrip_noise < 0.0) r.fail_key("roundtrip.noise", "must be >= 0");
    out.roundtrip_seed = static_cast<unsigned long>(r.get_long("roundtrip.seed", 20240801));
    const long x_count = r.get_long("io.x_count", 200);
    if (x_count < 8) r.fail_key("io.x_count", "must be >= 8");
    out.io.x_count = static_cast<std::size_t>(x_count);
    if (r.has("io.snapshot_times")) {
        std::istringstream ss(r.require_string("io.snapshot_times"));
        double t = 0.0;
        while (ss >> t) {
            if (t < 0.0 || t > out.grid.t_max())
                r.fail_key("io.snapshot_times", "snapshot time outside [0, t_max]");
            out.io.snapshot_times.push_back(t);
        }
    }

    r.check_all_used();

    // command-specific requirements
    const bool has_a = out.problem.a_true.has_value();
    switch (command) {
    case Command::forward:
    case Command::roundtrip:
        if (!has_a)
            throw ConfigError("config error at " + path + ": problem.a_true: required for " +
                              std::string(to_string(command)));
        break;
    case Command::invert:
    case Command::validate:
        if (!has_a && !out.g_csv)
            throw ConfigError("config error at " + path +
                              ": need problem.a_true (synthetic data) or data.g_csv for " +
                              std::string(to_string(command)));
        break;
    case Command::closedform:
        if (!is_closed_form_scenario(out.problem))
            throw ConfigError("config error at " + path +
                              ": closedform requires u1 = u2 = h = zero and f = mode-source 1");
        if (!has_a && !out.g_csv)
            throw ConfigError("config error at " + path +
                              ": need problem.a_true or data.g_csv for closedform");
        break;
    }
    return out;
}

} // namespace diffrec
