// Command-line front end: parse a JSON run configuration, dispatch to the
// library modules, and write the artifacts (CSV for array data, JSON for
// scalar reports) plus a run summary.
//
// Contract
//   - the configuration is a flat JSON object; unknown keys are rejected by
//     name, defaults are applied and echoed into the summary so a run is
//     reproducible from its own output
//   - every file is written atomically (temporary file + rename) and the
//     summary is written last, so a summary on disk implies the run finished
//   - exit codes: 0 success, 2 validation error, 3 solver non-convergence,
//     4 I/O error (unreadable config, malformed JSON, failed write)
//   - identical configurations produce byte-identical outputs: there is no
//     randomness, iteration orders are fixed, and `scan` rows are emitted in
//     grid order regardless of --jobs

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "henonlab/asymptotics.hpp"
#include "henonlab/errors.hpp"
#include "henonlab/exponents.hpp"
#include "henonlab/identities.hpp"
#include "henonlab/radial_ode.hpp"
#include "henonlab/transform.hpp"
#include "henonlab/variational.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace henonlab;

namespace {

// ------------------------------------------------------------- config access
//
// Small typed getters over the parsed JSON object.  Every wrong type or
// missing required key maps to validation_error so the caller can translate
// the exception class into the documented exit code.

std::string require_string(const ordered_json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end())
        throw validation_error(std::string("config: missing required key \"") + key + "\"");
    if (!it->is_string())
        throw validation_error(std::string("config: key \"") + key + "\" must be a string");
    return it->get<std::string>();
}

double number_or(const ordered_json& doc, const char* key, double fallback) {
    auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number())
        throw validation_error(std::string("config: key \"") + key + "\" must be a number");
    return it->get<double>();
}

std::optional<double> number_opt(const ordered_json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) return std::nullopt;
    if (!it->is_number())
        throw validation_error(std::string("config: key \"") + key + "\" must be a number");
    return it->get<double>();
}

int integer_or(const ordered_json& doc, const char* key, int fallback) {
    auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number_integer())
        throw validation_error(std::string("config: key \"") + key + "\" must be an integer");
    return it->get<int>();
}

std::vector<double> require_number_array(const ordered_json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end())
        throw validation_error(std::string("config: missing required key \"") + key + "\"");
    if (!it->is_array() || it->empty())
        throw validation_error(std::string("config: key \"") + key +
                               "\" must be a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_number())
            throw validation_error(std::string("config: key \"") + key +
                                   "\" must be a non-empty array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::optional<std::array<double, 2>> interval_opt(const ordered_json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) return std::nullopt;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
        throw validation_error(std::string("config: key \"") + key +
                               "\" must be an array of two numbers");
    return std::array<double, 2>{(*it)[0].get<double>(), (*it)[1].get<double>()};
}

// Reject any key outside the per-command allowlist, naming the offender.
void check_keys(const ordered_json& doc, std::initializer_list<const char*> allowed) {
    for (const auto& item : doc.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                known = true;
                break;
            }
        if (!known)
            throw validation_error("config: unknown key \"" + item.key() + "\"");
    }
}

// Problem parameters shared by every command.  `p` falls back to the supplied
// default, which is the critical exponent for `exponents` (self-consistent:
// its Pohozaev coefficient is exactly zero) and the struct default elsewhere.
ProblemParams read_params(const ordered_json& doc, std::optional<double> p_default) {
    ProblemParams prm;
    prm.N = integer_or(doc, "N", prm.N);
    prm.alpha = number_or(doc, "alpha", prm.alpha);
    prm.l = number_or(doc, "l", prm.l);
    const auto p = number_opt(doc, "p");
    if (p) {
        prm.p = *p;
    } else if (p_default) {
        prm.p = *p_default;
    } else {
        // The default lives in derive_exponents' input domain, so admissibility
        // of (N, alpha, l) is checked before p_s is formed.
        validate(prm);
        prm.p = derive_exponents(prm).p_s;
    }
    validate(prm);
    return prm;
}

// --------------------------------------------------------------- file output

void atomic_write(const fs::path& path, const std::string& bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw io_error("cannot open for writing: " + tmp.string());
        os << bytes;
        os.flush();
        if (!os) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw io_error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("rename failed: " + path.string() + ": " + ec.message());
}

// Collects the data files of one run; the summary lists them by name.
class ArtifactSink {
public:
    ArtifactSink(fs::path dir, bool quiet) : dir_(std::move(dir)), quiet_(quiet) {}

    void write(const std::string& name, const std::string& bytes) {
        atomic_write(dir_ / name, bytes);
        names_.push_back(name);
        if (!quiet_) std::cout << "wrote " << (dir_ / name).string() << "\n";
    }

    const std::vector<std::string>& names() const { return names_; }
    const fs::path& dir() const { return dir_; }
    bool quiet() const { return quiet_; }

private:
    fs::path dir_;
    bool quiet_;
    std::vector<std::string> names_;
};

// ------------------------------------------------------------- serialization

ordered_json params_json(const ProblemParams& prm) {
    return {{"N", prm.N}, {"alpha", prm.alpha}, {"l", prm.l}, {"p", prm.p}};
}

ordered_json derived_json(const ProblemParams& prm) {
    const DerivedExponents d = derive_exponents(prm);
    return {{"Nprime", d.Nprime},
            {"tau", d.tau},
            {"p_s", d.p_s},
            {"p_star", d.p_star},
            {"p_upper_star", d.p_upper_star},
            {"delta", d.delta},
            {"delta_tilde", d.delta_tilde},
            {"gamma_alpha", d.gamma_alpha},
            {"beta", d.beta},
            {"gamma", d.gamma},
            {"sobolev_exp", d.sobolev_exp},
            {"pohozaev_coefficient", pohozaev_coefficient(prm)}};
}

const char* to_string(Criticality c) {
    switch (c) {
        case Criticality::subcritical: return "subcritical";
        case Criticality::critical: return "critical";
        default: return "supercritical";
    }
}

ordered_json fit_json(const AsymptoticsFit& f) {
    return {{"rate", f.rate},
            {"amplitude", f.amplitude},
            {"window", {f.window[0], f.window[1]}},
            {"fit_quality", f.fit_quality}};
}

ordered_json monotonicity_entry_json(const MonotonicityEntry& e) {
    return {{"min_value", e.min_value}, {"at_r", e.at_r}, {"strict", e.strict}};
}

std::string csv_bytes(const RadialProfile& p) {
    std::ostringstream os;
    write_profile_csv(os, p);
    return os.str();
}

std::string csv_bytes(const TransformedProfile& p) {
    std::ostringstream os;
    write_profile_csv(os, p);
    return os.str();
}

// ------------------------------------------------------------- profile input

RadialProfile load_profile(const fs::path& path, const ProblemParams& prm) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open profile: " + path.string());
    return read_profile_csv(is, prm);
}

// ----------------------------------------------------------------- commands
//
// Each handler receives the parsed config plus the effective flag values,
// writes its data files through the sink, and returns (inputs, results) for
// the summary.  Inputs echo every effective setting, including defaults.

struct CommandOutput {
    ProblemParams params;
    ordered_json inputs;
    ordered_json results;
};

CommandOutput run_exponents(const ordered_json& doc) {
    check_keys(doc, {"command", "N", "alpha", "l", "p"});
    const ProblemParams prm = read_params(doc, std::nullopt);

    const RegimeReport rr = classify_regime(prm);
    const LinearizationSpectrum ls = linearization_spectrum(prm);

    CommandOutput out;
    out.params = prm;
    out.inputs = params_json(prm);
    out.results = {
        {"regime",
         {{"embedding", rr.regime == EmbeddingRegime::full_critical_range ? "full_critical_range"
                                                                          : "sobolev_capped"},
          {"alpha_threshold", rr.alpha_threshold},
          {"q_max", rr.q_max},
          {"p_vs_ps", to_string(rr.p_vs_ps)},
          {"p_vs_sobolev", to_string(rr.p_vs_sobolev)}}},
        {"linearization_eigenvalues",
         {ls.eigenvalues[0], ls.eigenvalues[1], ls.eigenvalues[2], ls.eigenvalues[3]}}};
    return out;
}

CommandOutput run_shoot(const ordered_json& doc, std::optional<double> tol_flag,
                        ArtifactSink& sink) {
    check_keys(doc, {"command", "N", "alpha", "l", "p", "R", "tol", "nodes"});
    const ProblemParams prm = read_params(doc, 3.0);
    const double R = number_or(doc, "R", 1.0);
    const double tol = tol_flag ? *tol_flag : number_or(doc, "tol", 1e-10);
    const int n_nodes = integer_or(doc, "nodes", 1201);
    if (n_nodes < 2) throw validation_error("config: key \"nodes\" must be at least 2");

    // Same recipe as the library default: log-spaced radii on [R e^{-11}, R].
    std::vector<double> nodes(static_cast<std::size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i)
        nodes[static_cast<std::size_t>(i)] = R * std::exp(-11.0 * (1.0 - i / double(n_nodes - 1)));

    const BvpSolution sol = shoot_navier_ball(prm, R, tol, nodes);
    sink.write("profile.csv", csv_bytes(sol.profile));

    CommandOutput out;
    out.params = prm;
    out.inputs = params_json(prm);
    out.inputs["R"] = R;
    out.inputs["tol"] = tol;
    out.inputs["nodes"] = n_nodes;
    out.results = {{"center_u", sol.center_u},
                   {"center_v", sol.center_v},
                   {"shooting_parameter", sol.shooting_parameter},
                   {"residual_u", sol.residual_u},
                   {"residual_v", sol.residual_v}};
    return out;
}

CommandOutput run_scan(const ordered_json& doc, std::optional<double> tol_flag, int jobs,
                       ArtifactSink& sink) {
    check_keys(doc, {"command", "N", "alpha", "l", "p", "p_values", "b_min", "b_max", "b_count",
                     "r_max", "tol"});
    const ProblemParams prm = read_params(doc, 3.0);
    const std::vector<double> p_values = require_number_array(doc, "p_values");
    const double b_min = number_or(doc, "b_min", 1e-2);
    const double b_max = number_or(doc, "b_max", 1e2);
    const int b_count = integer_or(doc, "b_count", 40);
    const double r_max = number_or(doc, "r_max", 1e4);
    const double tol = tol_flag ? *tol_flag : number_or(doc, "tol", 1e-10);
    if (!(b_min > 0.0) || !(b_max > b_min))
        throw validation_error("config: requires 0 < b_min < b_max");
    if (b_count < 2) throw validation_error("config: key \"b_count\" must be at least 2");

    std::vector<double> b_grid(static_cast<std::size_t>(b_count));
    const double lo = std::log(b_min), hi = std::log(b_max);
    for (int i = 0; i < b_count; ++i)
        b_grid[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / double(b_count - 1));
    b_grid.front() = b_min; // pin the endpoints to the configured values exactly
    b_grid.back() = b_max;

    const ScanReport rep = liouville_scan(prm, p_values, b_grid, r_max, tol, jobs);
    std::ostringstream os;
    write_scan_csv(os, rep);
    sink.write("scan.csv", os.str());

    CommandOutput out;
    out.params = prm;
    out.inputs = params_json(prm);
    out.inputs["p_values"] = p_values;
    out.inputs["b_min"] = b_min;
    out.inputs["b_max"] = b_max;
    out.inputs["b_count"] = b_count;
    out.inputs["r_max"] = r_max;
    out.inputs["tol"] = tol;
    out.results = {{"rows", rep.rows.size()},
                   {"n_positive", rep.n_positive},
                   {"n_positive_subcritical", rep.n_positive_subcritical},
                   {"fraction_positive", rep.fraction_positive}};
    return out;
}

// Shared by minimize/eigen: the chart window for the ball B_R is
// t in [-ln R, -ln R + span].
Grid1D ball_grid(double R, int n, double span) {
    if (!(R > 0.0)) throw validation_error("config: key \"R\" must be > 0");
    const double t_min = -std::log(R);
    return make_grid(t_min, t_min + span, n);
}

CommandOutput run_minimize(const ordered_json& doc, ArtifactSink& sink) {
    check_keys(doc, {"command", "N", "alpha", "l", "p", "q", "R", "n", "span"});
    const ProblemParams prm = read_params(doc, 3.0);
    const double q = number_or(doc, "q", prm.p + 1.0);
    const double R = number_or(doc, "R", 1.0);
    const int n = integer_or(doc, "n", 2000);
    const double span = number_or(doc, "span", 12.0);
    const Grid1D grid = ball_grid(R, n, span);

    const RayleighResult res = minimize_rayleigh(prm, grid, q);
    sink.write("minimizer.csv", csv_bytes(res.minimizer));

    CommandOutput out;
    out.params = prm;
    out.inputs = params_json(prm);
    out.inputs["q"] = q;
    out.inputs["R"] = R;
    out.inputs["n"] = n;
    out.inputs["span"] = span;
    out.results = {{"value", res.value},
                   {"q_star", q_star(prm, q)},
                   {"iterations", res.iterations},
                   {"critical_norm", res.critical_norm},
                   {"grid", {{"t_min", res.grid.t_min}, {"t_max", res.grid.t_max}, {"n", res.grid.n}}}};
    return out;
}

CommandOutput run_eigen(const ordered_json& doc, ArtifactSink& sink) {
    check_keys(doc, {"command", "N", "alpha", "l", "p", "R", "n", "span"});
    const ProblemParams prm = read_params(doc, 3.0);
    const double R = number_or(doc, "R", 1.0);
    const int n = integer_or(doc, "n", 2000);
    const double span = number_or(doc, "span", 12.0);
    const Grid1D grid = ball_grid(R, n, span);

    const SpectralResult res = first_eigenpair(prm, grid);
    sink.write("eigenfunction.csv", csv_bytes(res.eigenfunction));

    CommandOutput out;
    out.params = prm;
    out.inputs = params_json(prm);
    out.inputs["R"] = R;
    out.inputs["n"] = n;
    out.inputs["span"] = span;
    out.results = {{"lambda1", res.lambda1},
                   {"residual", res.residual},
                   {"grid", {{"t_min", grid.t_min}, {"t_max", grid.t_max}, {"n", grid.n}}}};
    return out;
}

CommandOutput run_pohozaev(const ordered_json& doc) {
    check_keys(doc, {"command", "N", "alpha", "l", "p", "profile", "R"});
    const ProblemParams prm = read_params(doc, 3.0);
    const std::string path = require_string(doc, "profile");
    const RadialProfile prof = load_profile(path, prm);
    const double R = number_or(doc, "R", prof.r.back());

    const PohozaevReport pr = pohozaev_check(prm, prof, R);
    const EnergyReport er = energy(prm, prof, R);

    CommandOutput out;
    out.params = prm;
    out.inputs = params_json(prm);
    out.inputs["profile"] = path;
    out.inputs["R"] = R;
    out.results = {{"pohozaev",
                    {{"lhs", pr.lhs},
                     {"rhs", pr.rhs},
                     {"residual", pr.residual},
                     {"relative_residual", pr.relative_residual}}},
                   {"energy",
                    {{"value", er.value},
                     {"quadratic", er.quadratic},
                     {"nonlinear", er.nonlinear},
                     {"nehari_gap", er.nehari_gap}}}};
    return out;
}

CommandOutput run_asymptotics(const ordered_json& doc) {
    check_keys(doc, {"command", "N", "alpha", "l", "p", "profile", "window"});
    const ProblemParams prm = read_params(doc, 3.0);
    const std::string path = require_string(doc, "profile");
    const auto window = interval_opt(doc, "window");
    const RadialProfile prof = load_profile(path, prm);
    const TransformedProfile tprof = to_transformed(prof, ChartKind::interior);

    const AsymptoticsFit fw = fit_tail(tprof, TailComponent::w, window);
    const AsymptoticsFit fz = fit_tail(tprof, TailComponent::z, window);
    const std::vector<BoundCheck> bounds = check_bounds(prm, prof);
    const MonotonicityReport mono = monotonicity_report(prm, prof);

    ordered_json jbounds = ordered_json::array();
    for (const BoundCheck& b : bounds)
        jbounds.push_back({{"bound_name", b.bound_name},
                           {"sup_constant", b.sup_constant},
                           {"sup_at", b.sup_at},
                           {"satisfied", b.satisfied}});

    CommandOutput out;
    out.params = prm;
    out.inputs = params_json(prm);
    out.inputs["profile"] = path;
    if (window) out.inputs["window"] = {(*window)[0], (*window)[1]};
    out.results = {{"fit_w", fit_json(fw)},
                   {"fit_z", fit_json(fz)},
                   {"bounds", jbounds},
                   {"monotonicity",
                    {{"weighted_u_slope", monotonicity_entry_json(mono.weighted_u_slope)},
                     {"weighted_v_slope", monotonicity_entry_json(mono.weighted_v_slope)},
                     {"radial_combination_u", monotonicity_entry_json(mono.radial_combination_u)},
                     {"radial_combination_v", monotonicity_entry_json(mono.radial_combination_v)}}}};
    return out;
}

// ------------------------------------------------------------------ dispatch

ordered_json load_config(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open config: " + path.string());
    try {
        return ordered_json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error("config: malformed JSON: " + std::string(e.what()));
    }
}

int run(const fs::path& config_path, const fs::path& out_dir, int jobs,
        std::optional<double> tol_flag, bool quiet) {
    const ordered_json doc = load_config(config_path);
    if (!doc.is_object()) throw validation_error("config: top level must be a JSON object");
    const std::string command = require_string(doc, "command");

    // --tol is a math input; commands without a tol knob reject it up front
    // instead of silently ignoring it.  --jobs only selects the execution
    // width of scan and never changes results, so it is inert elsewhere and
    // not echoed into the summary.
    if (tol_flag && command != "shoot" && command != "scan")
        throw validation_error("--tol does not apply to command \"" + command + "\"");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory: " + out_dir.string());
    ArtifactSink sink(out_dir, quiet);

    CommandOutput out;
    if (command == "exponents") {
        out = run_exponents(doc);
    } else if (command == "shoot") {
        out = run_shoot(doc, tol_flag, sink);
    } else if (command == "scan") {
        out = run_scan(doc, tol_flag, jobs, sink);
    } else if (command == "minimize") {
        out = run_minimize(doc, sink);
    } else if (command == "eigen") {
        out = run_eigen(doc, sink);
    } else if (command == "pohozaev") {
        out = run_pohozaev(doc);
    } else if (command == "asymptotics") {
        out = run_asymptotics(doc);
    } else {
        throw validation_error("config: unknown command \"" + command + "\"");
    }

    ordered_json summary = {{"schema_version", 1},
                            {"command", command},
                            {"inputs", out.inputs},
                            {"derived_exponents", derived_json(out.params)},
                            {"results", out.results},
                            {"artifacts", sink.names()}};
    atomic_write(out_dir / "summary.json", summary.dump(2) + "\n");
    if (!quiet) std::cout << "wrote " << (out_dir / "summary.json").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted biharmonic Henon laboratory: batch runs from a JSON config"};
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    double tol_flag = 0.0;
    bool quiet = false;
    app.add_option("--config", config_path, "path to the JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--jobs", jobs, "worker threads for scan")->check(CLI::PositiveNumber);
    app.add_option("--tol", tol_flag, "override the config tolerance (shoot, scan)");
    app.add_flag("--quiet", quiet, "suppress progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::optional<double> tol_override;
    if (app.count("--tol") > 0) tol_override = tol_flag;

    try {
        return run(config_path, out_dir, jobs, tol_override, quiet);
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const solver_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
