#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "squeeze/errors.hpp"
#include "squeeze/spinboson.hpp"
#include "squeeze/squeezing.hpp"
#include "squeeze/sweep.hpp"
#include "squeeze/tensor_oracle.hpp"

#ifndef SQUEEZE_VERSION
#define SQUEEZE_VERSION "dev"
#endif

namespace squeeze::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct OutputFile {
    std::string name;
    std::string content;
};

// Flags shared by every file-producing subcommand.
struct CommonFlags {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_config(const std::optional<std::string>& path) {
    if (!path) return json::object();
    std::ifstream in(*path);
    if (!in) throw InvalidArgument("cannot open config file '" + *path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidArgument("config file '" + *path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw InvalidArgument("config file must hold a JSON object");
    return j;
}

// Defaults, then the config file, then flags. Unknown config keys are errors.
json resolve(json defaults, const json& file, const json& flags) {
    for (auto it = file.begin(); it != file.end(); ++it) {
        if (!defaults.contains(it.key()))
            throw InvalidArgument("unknown config key '" + it.key() + "'");
        defaults[it.key()] = it.value();
    }
    for (auto it = flags.begin(); it != flags.end(); ++it) defaults[it.key()] = it.value();
    return defaults;
}

template <class T>
T get(const json& cfg, const char* key) {
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidArgument(std::string("config key '") + key + "' has the wrong type");
    }
}

json common_defaults() { return {{"out", "."}, {"format", "csv"}}; }

void apply_common(json& flags, const CommonFlags& c) {
    if (c.out) flags["out"] = *c.out;
    if (c.format) flags["format"] = *c.format;
}

std::string format_of(const json& cfg) {
    const auto f = get<std::string>(cfg, "format");
    if (f != "csv" && f != "json") throw InvalidArgument("format must be 'csv' or 'json'");
    return f;
}

// The output directory is left out so that runs into different directories
// produce identical files.
json header(const char* command, const json& cfg) {
    json recorded = cfg;
    recorded.erase("out");
    return {{"command", command}, {"version", SQUEEZE_VERSION}, {"config", recorded}};
}

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// All outputs are computed before anything is written, and each file goes
// through a temporary name, so a failing run leaves no partial files behind.
void write_outputs(const std::string& dir, const std::vector<OutputFile>& files) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidArgument("cannot create output directory '" + dir + "'");
    std::vector<fs::path> written;
    for (const auto& f : files) {
        const fs::path target = fs::path(dir) / f.name;
        const fs::path tmp = fs::path(dir) / (f.name + ".tmp");
        std::ofstream out(tmp, std::ios::binary);
        out << f.content;
        out.close();
        if (!out) {
            fs::remove(tmp, ec);
            for (const auto& p : written) fs::remove(p, ec);
            throw Error("failed to write '" + target.string() + "'");
        }
        fs::rename(tmp, target);
        written.push_back(target);
    }
}

int cmd_xi_sweep(const json& cfg, std::ostream& out) {
    const int n = get<int>(cfg, "N");
    std::vector<double> grid;
    if (!cfg.at("chi_t_values").is_null()) {
        grid = get<std::vector<double>>(cfg, "chi_t_values");
    } else {
        const int points = get<int>(cfg, "points");
        if (points < 1) throw InvalidArgument("chi_t grid is empty (points=" + std::to_string(points) + ")");
        grid = linspace(0.0, get<double>(cfg, "chi_t_max"), points);
    }
    if (grid.empty()) throw InvalidArgument("chi_t grid is empty");

    SweepResult sweep = xi_sweep(n, grid);
    const double search_max = std::max(*std::max_element(grid.begin(), grid.end()), 1e-3);
    const XiMinimum best = find_min_xi(n, search_max, get<int>(cfg, "min_search_points"));

    json meta = header("xi-sweep", cfg);
    meta["argmin_chi_t"] = best.chi_t;
    meta["min_xi"] = best.xi;
    meta["columns"] = sweep.columns;
    meta["rows"] = sweep.rows.size();
    sweep.metadata.update(meta);

    std::vector<OutputFile> files;
    if (format_of(cfg) == "csv") {
        files.push_back({"xi_sweep.csv", to_csv(sweep)});
        files.push_back({"xi_sweep.json", dump(meta)});
    } else {
        files.push_back({"xi_sweep.json", dump(to_json(sweep))});
    }
    write_outputs(get<std::string>(cfg, "out"), files);
    out << "argmin_chi_t " << format_double(best.chi_t) << "\nmin_xi " << format_double(best.xi)
        << "\n";
    return 0;
}

int cmd_husimi(const json& cfg, std::ostream& out) {
    const int n = get<int>(cfg, "N");
    const auto chis = get<std::vector<double>>(cfg, "chi_t_values");
    const int grid = get<int>(cfg, "grid");
    if (chis.empty()) throw InvalidArgument("chi_t_values is empty");
    if (grid < 1) throw InvalidArgument("grid must be >= 1");
    const auto thetas = linspace(-get<double>(cfg, "theta_max"), get<double>(cfg, "theta_max"), grid);
    const auto phis = linspace(-get<double>(cfg, "phi_max"), get<double>(cfg, "phi_max"), grid);
    const std::string format = format_of(cfg);

    const SpinState cs = coherent_state(n);
    json meta = header("husimi", cfg);
    meta["files"] = json::array();
    std::vector<OutputFile> files;
    for (double chi : chis) {
        const OverlapGrid g = overlap_grid(oat_evolve(cs, chi), thetas, phis);
        SweepResult table;
        table.columns = {"theta", "phi", "probability"};
        for (std::size_t i = 0; i < thetas.size(); ++i)
            for (std::size_t j = 0; j < phis.size(); ++j)
                table.add_row({thetas[i], phis[j], g.at(i, j)});
        const std::string stem = "husimi_chi_t_" + short_number(chi);
        const double peak = *std::max_element(g.probabilities.begin(), g.probabilities.end());
        json entry = {{"chi_t", chi}, {"rows", table.rows.size()}, {"max_probability", peak}};
        if (format == "csv") {
            entry["file"] = stem + ".csv";
            files.push_back({stem + ".csv", to_csv(table)});
        } else {
            entry["file"] = stem + ".json";
            table.metadata = entry;
            files.push_back({stem + ".json", dump(to_json(table))});
        }
        meta["files"].push_back(entry);
        out << entry["file"].get<std::string>() << " max_probability " << format_double(peak) << "\n";
    }
    files.push_back({"husimi.json", dump(meta)});
    write_outputs(get<std::string>(cfg, "out"), files);
    return 0;
}

int cmd_phase_gate(const json& cfg, std::ostream& out, std::ostream& err) {
    const int n = get<int>(cfg, "N");
    std::optional<int> override_n;
    if (!cfg.at("n_max_override").is_null()) override_n = get<int>(cfg, "n_max_override");
    const GateParams params = make_gate_params(get<double>(cfg, "lambda_over_delta"), n,
                                               get<int>(cfg, "loops"), override_n, 1.0,
                                               get<double>(cfg, "eta"));
    if (!lamb_dicke_ok(params))
        err << "warning: eta=" << params.eta << " is outside the Lamb-Dicke regime\n";

    const DickeBasis basis(n);
    const double trace_max = get<double>(cfg, "trace_m_max");
    CMatrix amps = CMatrix::Zero(params.n_max + 1, basis.dim());
    std::vector<int> traced;
    for (int i = 0; i < basis.dim(); ++i)
        if (basis.m(i) >= 0.0 && basis.m(i) <= trace_max) traced.push_back(i);
    if (traced.empty()) throw InvalidArgument("no M_J values in [0, trace_m_max]");
    for (int i : traced) amps(0, i) = 1.0 / std::sqrt(static_cast<double>(traced.size()));

    EvolveOptions opts;
    opts.convergence_check = get<bool>(cfg, "convergence_check");
    opts.sample_count = params.loops * samples_per_loop_for(params, basis.m(traced.front()));
    const GateEvolution ev = evolve_numeric(params, JointState(params.n_max, basis, amps),
                                            params.gate_time(), opts);
    const GateTrace& tr = ev.trace;
    const PhaseFit fit = phase_vs_m(params, opts);

    SweepResult analytic;
    analytic.columns = {"t", "m", "nbar_analytic", "phase_analytic", "nbar_deviation",
                        "phase_deviation"};
    double max_nbar_dev = 0.0, max_phase_dev = 0.0;
    for (std::size_t s = 0; s < tr.sector_m.size(); ++s) {
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            const AnalyticSector a = evolve_analytic(params, tr.sector_m[s], tr.times[k]);
            const double nbar_a = std::norm(a.alpha);
            const double dn = tr.nbar[s][k] - nbar_a;
            const double dp = tr.phase[s][k] - a.phase;
            max_nbar_dev = std::max(max_nbar_dev, std::abs(dn));
            max_phase_dev = std::max(max_phase_dev, std::abs(dp));
            analytic.add_row({tr.times[k], tr.sector_m[s], nbar_a, a.phase, dn, dp});
        }
    }

    double closure_nbar = 0.0, closure_fid = 1.0;
    for (std::size_t s = 0; s < tr.sector_m.size(); ++s) {
        for (std::size_t c = 0; c < tr.closure_times.size(); ++c) {
            const auto k = static_cast<std::size_t>(
                std::find(tr.times.begin(), tr.times.end(), tr.closure_times[c]) - tr.times.begin());
            closure_nbar = std::max(closure_nbar, tr.nbar[s][k]);
            closure_fid = std::min(closure_fid, tr.closure_fidelity[s][c]);
        }
    }

    json meta = header("phase-gate", cfg);
    meta["params"] = {{"lambda_c", params.lambda_c},   {"delta_p", params.delta_p},
                      {"lambda_over_delta", params.ratio()}, {"n_max", params.n_max},
                      {"N", params.particle_count},     {"loops", params.loops},
                      {"eta", params.eta},              {"lamb_dicke_ok", lamb_dicke_ok(params)},
                      {"units", "time in 1/delta', frequencies in delta'"},
                      {"defaults_note", "drive strength, loop count and N are demo choices"}};
    meta["cutoff"] = {{"n_max", params.n_max},
                      {"rule_n_max", cutoff_for(params.ratio(), basis.total_spin())},
                      {"max_top_population", tr.max_top_population}};
    meta["integrator"] = {{"method", "rk4-fixed-step"},
                          {"step", tr.step},
                          {"steps_per_sample", tr.steps_per_sample},
                          {"samples", tr.times.size() - 1},
                          {"max_norm_drift", tr.max_norm_drift},
                          {"max_sector_norm_drift", tr.max_sector_norm_drift},
                          {"convergence_check", opts.convergence_check},
                          {"convergence_deviation", tr.convergence_deviation}};
    meta["loop_closure"] = {{"times", tr.closure_times},
                            {"max_nbar", closure_nbar},
                            {"min_return_fidelity", closure_fid}};
    meta["analytic_comparison"] = {{"max_nbar_deviation", max_nbar_dev},
                                   {"max_phase_deviation", max_phase_dev}};
    const double rel = std::abs(fit.coefficient - fit.expected_coefficient) / fit.expected_coefficient;
    meta["fit"] = {{"coefficient", fit.coefficient},
                   {"expected_coefficient", fit.expected_coefficient},
                   {"relative_error", rel},
                   {"max_abs_residual", fit.max_abs_residual},
                   {"max_odd_component", fit.max_odd_component},
                   {"quoted_curve_coefficient", fit.quoted_curve_coefficient},
                   {"quoted_over_fitted", fit.quoted_curve_coefficient / fit.coefficient},
                   {"quoted_curve_note",
                    "loops*4*pi*lambda_c^2/delta' carries frequency units; compared, not asserted"}};
    meta["chi_t_eff"] = effective_chi_t(params);

    std::vector<OutputFile> files;
    if (format_of(cfg) == "csv") {
        files.push_back({"gate_trace.csv", to_csv(tr.to_table())});
        files.push_back({"gate_analytic.csv", to_csv(analytic)});
        files.push_back({"phase_vs_m.csv", to_csv(fit.table)});
        files.push_back({"phase_gate.json", dump(meta)});
    } else {
        json all = meta;
        all["gate_trace"] = to_json(tr.to_table());
        all["gate_analytic"] = to_json(analytic);
        all["phase_vs_m"] = to_json(fit.table);
        files.push_back({"phase_gate.json", dump(all)});
    }
    write_outputs(get<std::string>(cfg, "out"), files);

    out << "n_max " << params.n_max << "\ncoefficient " << format_double(fit.coefficient)
        << "\nexpected_coefficient " << format_double(fit.expected_coefficient)
        << "\nmax_abs_residual " << format_double(fit.max_abs_residual)
        << "\nmax_closure_nbar " << format_double(closure_nbar) << "\n";
    return 0;
}

int cmd_oracle_check(const json& cfg, std::ostream& out) {
    const int n_max = get<int>(cfg, "N");
    const auto thetas = get<std::vector<double>>(cfg, "thetas");
    if (n_max < 1) throw InvalidArgument("N must be >= 1");
    if (n_max > oracle::max_particles) {
        throw ResourceError("oracle-check is limited to N <= " +
                            std::to_string(oracle::max_particles));
    }
    json report = header("oracle-check", cfg);
    report["entries"] = json::array();
    bool ok = true;
    double worst = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const oracle::SubspaceReport r = oracle::verify_subspace(n, thetas);
        for (const auto& c : r.checks) {
            report["entries"].push_back({{"N", n},
                                         {"check", c.name},
                                         {"max_deviation", c.max_deviation},
                                         {"threshold", c.threshold},
                                         {"passed", c.passed}});
        }
        ok = ok && r.passed();
        worst = std::max(worst, r.max_deviation());
    }
    report["passed"] = ok;
    report["max_deviation"] = worst;
    write_outputs(get<std::string>(cfg, "out"), {{"oracle_check.json", dump(report)}});
    out << (ok ? "PASS" : "FAIL") << " max_deviation " << format_double(worst) << "\n";
    return ok ? 0 : 3;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Collective spin squeezing and geometric phase gate simulations", "squeezesim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SQUEEZE_VERSION);

    auto add_common = [](CLI::App* sub, CommonFlags& c) {
        sub->add_option("--config", c.config, "JSON config file (flags override it)");
        sub->add_option("--out", c.out, "output directory");
        sub->add_option("--format", c.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    CommonFlags xi_c, hu_c, pg_c, oc_c;
    std::optional<int> xi_n, xi_grid, hu_n, hu_grid, pg_n, pg_loops, pg_nmax, oc_n;
    std::optional<double> xi_chi_max, pg_ratio;
    std::vector<double> hu_chis;

    auto* xi = app.add_subcommand("xi-sweep", "squeezing parameter versus twisting strength");
    add_common(xi, xi_c);
    xi->add_option("--n", xi_n, "particle count");
    xi->add_option("--chi-t-max", xi_chi_max, "largest chi*t in the scan");
    xi->add_option("--grid", xi_grid, "number of chi*t points");

    auto* hu = app.add_subcommand("husimi", "overlap maps with rotated coherent states");
    add_common(hu, hu_c);
    hu->add_option("--n", hu_n, "particle count");
    hu->add_option("--grid", hu_grid, "points per angle axis");
    hu->add_option("--chi-t", hu_chis, "twisting strengths (repeatable)");

    auto* pg = app.add_subcommand("phase-gate", "spin-motion geometric phase gate dynamics");
    add_common(pg, pg_c);
    pg->add_option("--n", pg_n, "particle count");
    pg->add_option("--lambda-over-delta", pg_ratio, "coupling over gate detuning");
    pg->add_option("--loops", pg_loops, "number of phase-space loops");
    pg->add_option("--n-max-override", pg_nmax, "Fock cutoff instead of the automatic rule");

    auto* oc = app.add_subcommand("oracle-check", "product-space checks of the Dicke subspace");
    add_common(oc, oc_c);
    oc->add_option("--n", oc_n, "largest particle count to check");

    double var_sq = 0.0, var_ref = 0.0;
    auto* db = app.add_subcommand("squeeze-db", "10 log10 of a variance ratio");
    db->add_option("var_squeezed", var_sq)->required();
    db->add_option("var_unsqueezed", var_ref)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << SQUEEZE_VERSION << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (xi->parsed()) {
            json flags = json::object();
            apply_common(flags, xi_c);
            if (xi_n) flags["N"] = *xi_n;
            if (xi_chi_max) flags["chi_t_max"] = *xi_chi_max;
            if (xi_grid) flags["points"] = *xi_grid;
            json defaults = common_defaults();
            defaults.update({{"N", 50}, {"chi_t_max", 0.3}, {"points", 301},
                             {"chi_t_values", nullptr}, {"min_search_points", 2000}});
            return cmd_xi_sweep(resolve(defaults, read_config(xi_c.config), flags), out);
        }
        if (hu->parsed()) {
            json flags = json::object();
            apply_common(flags, hu_c);
            if (hu_n) flags["N"] = *hu_n;
            if (hu_grid) flags["grid"] = *hu_grid;
            if (!hu_chis.empty()) flags["chi_t_values"] = hu_chis;
            json defaults = common_defaults();
            defaults.update({{"N", 50}, {"chi_t_values", {0.0, 0.05, 0.1}}, {"grid", 81},
                             {"theta_max", 0.8}, {"phi_max", 0.8}});
            return cmd_husimi(resolve(defaults, read_config(hu_c.config), flags), out);
        }
        if (pg->parsed()) {
            json flags = json::object();
            apply_common(flags, pg_c);
            if (pg_n) flags["N"] = *pg_n;
            if (pg_ratio) flags["lambda_over_delta"] = *pg_ratio;
            if (pg_loops) flags["loops"] = *pg_loops;
            if (pg_nmax) flags["n_max_override"] = *pg_nmax;
            json defaults = common_defaults();
            defaults.update({{"N", 10}, {"lambda_over_delta", 0.05}, {"loops", 5},
                             {"n_max_override", nullptr}, {"eta", 0.1}, {"trace_m_max", 5.0},
                             {"convergence_check", true}});
            return cmd_phase_gate(resolve(defaults, read_config(pg_c.config), flags), out, err);
        }
        if (oc->parsed()) {
            json flags = json::object();
            apply_common(flags, oc_c);
            if (oc_n) flags["N"] = *oc_n;
            json defaults = common_defaults();
            defaults.update({{"N", 8}, {"thetas", {0.3, 0.7, 1.9}}});
            return cmd_oracle_check(resolve(defaults, read_config(oc_c.config), flags), out);
        }
        if (db->parsed()) {
            out << format_double(squeezing_db(var_sq, var_ref)) << "\n";
            return 0;
        }
    } catch (const CutoffOverflow& e) {
        err << "error: " << e.what() << " (suggested n_max " << e.required_n_max() << ")\n";
        return e.exit_code();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace squeeze::cli
