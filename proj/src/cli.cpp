#include "orbitq/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbitq/oracle.hpp"

namespace orbitq::cli {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 5> kRateNames{"lambda1", "lambda2", "mu", "mu1", "mu2"};

double& rate_ref(SystemParams& p, std::string_view name) {
    if (name == "lambda1") return p.lambda1;
    if (name == "lambda2") return p.lambda2;
    if (name == "mu") return p.mu;
    if (name == "mu1") return p.mu1;
    if (name == "mu2") return p.mu2;
    throw InvalidParams("unknown rate '" + std::string(name) + "'");
}

std::string fmt(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json params_json(const SystemParams& p) {
    return {{"lambda1", p.lambda1}, {"lambda2", p.lambda2}, {"mu", p.mu}, {"mu1", p.mu1}, {"mu2", p.mu2}};
}

json stability_json(const StabilityReport& r) {
    return {{"rho1", r.rho1}, {"rho2", r.rho2}, {"verdict", std::string(to_string(r.verdict))}, {"swapped", r.swapped}};
}

json measures_json(const PerformanceMeasures& m) {
    json j = json::object();
    for (const auto& [name, value] : m.fields()) j[std::string(name)] = value;
    return j;
}

json comparison_json(const ComparisonReport& rep) {
    json fields = json::array();
    for (const auto& f : rep.fields) {
        fields.push_back({{"field", f.name},
                          {"analytic", f.analytic},
                          {"oracle", f.oracle},
                          {"deviation", f.deviation},
                          {"pass", f.pass}});
    }
    return {{"rel_tol", rep.rel_tol},
            {"pass", rep.pass},
            {"worst_field", rep.worst_field},
            {"worst_deviation", rep.worst_deviation},
            {"boundary_mass", rep.boundary_mass},
            {"elevated_uncertainty", rep.elevated_uncertainty},
            {"fields", fields}};
}

int verdict_exit(const StabilityReport& r) {
    switch (r.verdict) {
        case Verdict::Stable: return kOk;
        case Verdict::Boundary: return kBoundary;
        case Verdict::Unstable: return kUnstable;
    }
    return kUnstable;
}

// Rate flags shared by every subcommand.
struct ParamFlags {
    std::array<std::optional<double>, 5> rates;
    std::string config;

    void attach(CLI::App* app) {
        for (std::size_t i = 0; i < kRateNames.size(); ++i) {
            app->add_option("--" + std::string(kRateNames[i]), rates[i], "rate " + std::string(kRateNames[i]));
        }
        app->add_option("--config", config, "key = value parameter file (flags override it)");
    }

    [[nodiscard]] SystemParams resolve() const {
        std::array<std::optional<double>, 5> v{};
        if (!config.empty()) {
            const SystemParams c = load_config(config);
            v = {c.lambda1, c.lambda2, c.mu, c.mu1, c.mu2};
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (rates[i]) v[i] = rates[i];
            if (!v[i]) throw InvalidParams("missing --" + std::string(kRateNames[i]) + " (or --config)");
        }
        SystemParams p{*v[0], *v[1], *v[2], *v[3], *v[4]};
        validate(p);
        return p;
    }
};

struct NumericFlags {
    std::optional<std::size_t> nodes;
    TruncationSpec truncation;

    void attach(CLI::App* app, bool with_nodes = true) {
        if (with_nodes) app->add_option("--nodes", nodes, "contour nodes (even, >= 256); overrides ORBITQ_NODES");
        app->add_option("--mmax", truncation.m_max, "initial oracle truncation in Q1")->capture_default_str();
        app->add_option("--nmax", truncation.n_max, "initial oracle truncation in Q2")->capture_default_str();
        app->add_option("--tol", truncation.tol, "oracle rim-mass tolerance")->capture_default_str();
        app->add_option("--max-level", truncation.max_level, "oracle truncation cap")->capture_default_str();
    }

    [[nodiscard]] MeasureOptions measure_options() const {
        MeasureOptions opt;
        if (nodes) {
            if (*nodes < contour::kMinNodes || *nodes % 2 != 0) {
                throw InvalidParams("--nodes must be even and >= " + std::to_string(contour::kMinNodes));
            }
            opt.bvp.node_count = *nodes;
            opt.bvp.max_nodes = std::max(opt.bvp.max_nodes, *nodes);
        }
        return opt;
    }

    [[nodiscard]] TruncationSpec spec() const {
        TruncationSpec s = truncation;
        s.max_level = std::max({s.max_level, s.m_max, s.n_max});
        s.validate();
        return s;
    }
};

struct OracleRun {
    StationarySolution solution;
    bool converged = true;
    std::string diagnostic;
};

OracleRun run_oracle(const SystemParams& p, const TruncationSpec& spec) {
    OracleRun run;
    try {
        run.solution = solve_stationary(p, spec);
    } catch (const TruncationError& e) {
        run.solution = e.last();
        run.converged = false;
        run.diagnostic = e.what();
    }
    return run;
}

int cmd_stability(const SystemParams& p, std::ostream& out) {
    const StabilityReport r = check_stability(p);
    json j = {{"params", params_json(p)}};
    j.update(stability_json(r));
    out << j.dump(2) << '\n';
    return verdict_exit(r);
}

int refuse(const StabilityReport& r, const SystemParams& p, std::ostream& out, std::ostream& err) {
    json j = {{"params", params_json(p)}, {"stability", stability_json(r)}, {"refused", true}};
    out << j.dump(2) << '\n';
    err << "error: parameters are " << to_string(r.verdict)
        << "; the analytic solution needs rho1 < 1 and rho2 < 1\n";
    return verdict_exit(r);
}

int cmd_measures(const SystemParams& p, const NumericFlags& nf, bool verify, double rel_tol, std::ostream& out,
                 std::ostream& err) {
    const StabilityReport r = check_stability(p);
    if (!r.stable()) return refuse(r, p, out, err);
    const MeasureReport rep = compute_measures(p, nf.measure_options());
    json j = {{"params", params_json(p)},
              {"stability", stability_json(r)},
              {"node_count", rep.node_count},
              {"swapped", rep.swapped},
              {"measures", measures_json(rep.values)},
              {"flags", {{"eq1_fallback", rep.eq1_fallback}, {"eq2_fallback", rep.eq2_fallback}}}};
    PerformanceMeasures error = rep.error;
    if (verify) {
        const OracleRun oracle = run_oracle(p, nf.spec());
        const PerformanceMeasures om = oracle_measures(oracle.solution);
        const ComparisonReport cmp =
            compare(rep.values, om, rel_tol, oracle.solution.boundary_mass, oracle.converged);
        json v = comparison_json(cmp);
        v["truncation"] = {{"m_max", oracle.solution.m_max},
                           {"n_max", oracle.solution.n_max},
                           {"converged", oracle.converged},
                           {"residual", oracle.solution.residual}};
        if (!oracle.converged) v["truncation"]["diagnostic"] = oracle.diagnostic;
        j["verification"] = v;
        const auto q = rep.error.fields();
        const auto a = rep.values.fields();
        const auto o = om.fields();
        std::array<double, PerformanceMeasures::kFieldCount> e{};
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::max(q[i].second, std::abs(a[i].second - o[i].second));
        error = {e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8]};
    }
    j["error_estimate"] = measures_json(error);
    out << j.dump(2) << '\n';
    return kOk;
}

int cmd_verify(const SystemParams& p, const NumericFlags& nf, double rel_tol, std::ostream& out,
               std::ostream& err) {
    const StabilityReport r = check_stability(p);
    if (!r.stable()) return refuse(r, p, out, err);
    const MeasureReport rep = compute_measures(p, nf.measure_options());
    const OracleRun oracle = run_oracle(p, nf.spec());
    const ComparisonReport cmp =
        compare(rep.values, oracle_measures(oracle.solution), rel_tol, oracle.solution.boundary_mass, oracle.converged);
    json j = {{"params", params_json(p)}, {"stability", stability_json(r)}, {"comparison", comparison_json(cmp)}};
    j["truncation"] = {{"m_max", oracle.solution.m_max},
                       {"n_max", oracle.solution.n_max},
                       {"converged", oracle.converged},
                       {"residual", oracle.solution.residual}};
    out << j.dump(2) << '\n';
    if (!cmp.pass) {
        err << "verify: " << cmp.worst_field << " deviates by " << cmp.worst_deviation << " > " << rel_tol << '\n';
        return kToleranceFailed;
    }
    return kOk;
}

int cmd_dump(const SystemParams& p, const NumericFlags& nf, const std::string& path, std::ostream& out,
             std::ostream& err) {
    const OracleRun oracle = run_oracle(p, nf.spec());
    if (path.empty() || path == "-") {
        write_distribution_csv(out, oracle.solution);
    } else {
        std::ofstream file(path);
        if (!file) throw InvalidParams("cannot open '" + path + "' for writing");
        write_distribution_csv(file, oracle.solution);
    }
    if (!oracle.converged) {
        err << "warning: " << oracle.diagnostic << '\n';
        return kNumerical;
    }
    return kOk;
}

}  // namespace

const std::vector<std::string>& measure_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, value] : PerformanceMeasures{}.fields()) v.emplace_back(name);
        return v;
    }();
    return names;
}

void SweepSpec::validate() const {
    if (std::find(kRateNames.begin(), kRateNames.end(), varying) == kRateNames.end()) {
        throw InvalidParams("sweep: unknown varying parameter '" + varying + "'");
    }
    if (!(from < to)) throw InvalidParams("sweep: need from < to");
    if (steps < 2) throw InvalidParams("sweep: need steps >= 2");
    for (const auto& name : outputs) {
        if (std::find(measure_names().begin(), measure_names().end(), name) == measure_names().end()) {
            throw InvalidParams("sweep: unknown output '" + name + "'");
        }
    }
    for (const SystemParams& p : grid()) orbitq::validate(p);
}

std::vector<SystemParams> SweepSpec::grid() const {
    std::vector<SystemParams> out;
    out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
    for (int i = 0; i < steps; ++i) {
        SystemParams p = fixed;
        rate_ref(p, varying) = (from * (steps - 1 - i) + to * i) / (steps - 1);
        out.push_back(p);
    }
    return out;
}

std::vector<SweepSpec> preset(const std::string& name) {
    const auto make = [](std::string varying, double from, double to, int steps, SystemParams fixed,
                         std::vector<std::string> outputs) {
        return SweepSpec{std::move(varying), from, to, steps, fixed, std::move(outputs)};
    };
    if (name == "fig3") {
        std::vector<SweepSpec> v;
        for (double l1 : {0.1, 1.0}) {
            v.push_back(make("lambda2", 0.2, 1.9, 18, {l1, 0.2, 4.0, 2.0, 2.0}, {"p_empty", "p_q2_empty_idle"}));
        }
        return v;
    }
    if (name == "fig4") {
        std::vector<SweepSpec> v;
        for (double l1 : {0.01, 0.1, 1.0}) v.push_back(make("lambda2", 0.2, 1.9, 18, {l1, 0.2, 4.0, 2.0, 2.0}, {"eq2"}));
        return v;
    }
    if (name == "fig5") return {make("mu2", 2.0, 2.15, 16, {1.2, 1.2, 4.0, 2.0, 2.0}, {"eq1", "eq2"})};
    if (name == "fig6") return {make("lambda2", 0.2, 1.34, 20, {1.0, 0.2, 4.0, 2.0, 2.0}, {"eq1", "eq2"})};
    throw InvalidParams("unknown preset '" + name + "' (fig3, fig4, fig5, fig6)");
}

int write_sweep_csv(std::ostream& out, const std::vector<SweepSpec>& specs, const SweepOptions& options) {
    struct Point {
        std::string varying;
        double value = 0.0;
        SystemParams p;
        const std::vector<std::string>* outputs = nullptr;
    };
    std::vector<Point> points;
    std::vector<std::string> columns;
    for (const SweepSpec& s : specs) {
        s.validate();
        const auto& outs = s.outputs.empty() ? measure_names() : s.outputs;
        for (const auto& name : outs) {
            if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
        }
        for (const SystemParams& p : s.grid()) {
            SystemParams copy = p;
            points.push_back({s.varying, rate_ref(copy, s.varying), p, &outs});
        }
    }

    MeasureOptions mopt = options.measures;
    mopt.bvp.exec = contour::Exec::Serial;
    std::vector<std::string> rows(points.size());
    int failures = 0;
    const auto npoints = static_cast<long long>(points.size());
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : failures)
    for (long long i = 0; i < npoints; ++i) {
        const Point& pt = points[static_cast<std::size_t>(i)];
        const StabilityReport r = check_stability(pt.p);
        std::string row = pt.varying + ',' + fmt(pt.value);
        for (double v : {pt.p.lambda1, pt.p.lambda2, pt.p.mu, pt.p.mu1, pt.p.mu2, r.rho1, r.rho2}) row += ',' + fmt(v);
        row += ',' + std::string(to_string(r.verdict));
        std::string status = "ok";
        std::string cells;
        std::string errs;
        std::string refs;
        std::optional<MeasureReport> rep;
        if (r.stable()) {
            try {
                rep = compute_measures(pt.p, mopt);
            } catch (const std::exception& e) {
                status = std::string("error: ") + e.what();
                ++failures;
            }
        } else {
            status = "refused";
        }
        for (const auto& col : columns) {
            const bool selected = std::find(pt.outputs->begin(), pt.outputs->end(), col) != pt.outputs->end();
            std::string v, e;
            if (rep && selected) {
                for (const auto& [name, value] : rep->values.fields()) {
                    if (name == col) v = fmt(value);
                }
                for (const auto& [name, value] : rep->error.fields()) {
                    if (name == col) e = fmt(value);
                }
            }
            cells += ',' + v;
            errs += ',' + e;
        }
        if (options.reference_columns) {
            const double den = pt.p.mu * pt.p.mu2 - pt.p.lambda2 * pt.p.lambda2 - pt.p.lambda2 * pt.p.mu2;
            refs += ',' + (den > 0.0 ? fmt(single_orbit_EQ(pt.p.lambda2, pt.p.mu, pt.p.mu2)) : std::string());
            refs += ',' + (rep ? fmt(rep->values.p_empty - rep->values.p_q2_empty_idle) : std::string());
        }
        std::string flags = rep ? (rep->eq1_fallback || rep->eq2_fallback ? "eq_fallback" : "") : "";
        rows[static_cast<std::size_t>(i)] = row + cells + errs + refs + ',' + flags + ',' + csv_quote(status);
    }

    out << "varying,value,lambda1,lambda2,mu,mu1,mu2,rho1,rho2,verdict";
    for (const auto& c : columns) out << ',' << c;
    for (const auto& c : columns) out << ',' << c << "_err";
    if (options.reference_columns) out << ",single_orbit_eq,empty_gap";
    out << ",flags,status\r\n";
    for (const auto& row : rows) out << row << "\r\n";
    return failures;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-class retrial queue with constant-rate orbits: stability, measures, sweeps, verification"};
    app.require_subcommand(1);

    ParamFlags pf_stab, pf_meas, pf_ver, pf_dump;
    NumericFlags nf_meas, nf_ver, nf_dump, nf_sweep;

    CLI::App* stab = app.add_subcommand("stability", "classify the parameters (exit 0 stable, 2 boundary, 3 unstable)");
    pf_stab.attach(stab);

    CLI::App* meas = app.add_subcommand("measures", "performance measures as JSON");
    pf_meas.attach(meas);
    nf_meas.attach(meas);
    bool meas_verify = false;
    double meas_tol = 1e-3;
    meas->add_flag("--verify", meas_verify, "compare against the truncated-chain oracle");
    meas->add_option("--rel-tol", meas_tol, "relative tolerance for --verify")->capture_default_str();

    CLI::App* sweep = app.add_subcommand("sweep", "CSV sweep over one parameter");
    std::string preset_name, varying, outputs;
    double from = 0.0, to = 0.0;
    int steps = 0;
    ParamFlags pf_sweep;
    pf_sweep.attach(sweep);
    nf_sweep.attach(sweep);
    sweep->add_option("--preset", preset_name, "fig3, fig4, fig5 or fig6");
    sweep->add_option("--vary", varying, "parameter to vary");
    sweep->add_option("--from", from);
    sweep->add_option("--to", to);
    sweep->add_option("--steps", steps);
    sweep->add_option("--outputs", outputs, "comma-separated measure names");

    CLI::App* ver = app.add_subcommand("verify", "analytic vs oracle (exit 0 pass, 4 tolerance failure)");
    pf_ver.attach(ver);
    nf_ver.attach(ver);
    double ver_tol = 1e-3;
    ver->add_option("--rel-tol", ver_tol, "relative tolerance")->capture_default_str();

    CLI::App* dump = app.add_subcommand("dump-distribution", "oracle stationary distribution as CSV");
    pf_dump.attach(dump);
    nf_dump.attach(dump, false);
    std::string dump_path;
    dump->add_option("--output,-o", dump_path, "file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    try {
        if (stab->parsed()) return cmd_stability(pf_stab.resolve(), out);
        if (meas->parsed()) return cmd_measures(pf_meas.resolve(), nf_meas, meas_verify, meas_tol, out, err);
        if (ver->parsed()) return cmd_verify(pf_ver.resolve(), nf_ver, ver_tol, out, err);
        if (dump->parsed()) return cmd_dump(pf_dump.resolve(), nf_dump, dump_path, out, err);
        if (sweep->parsed()) {
            std::vector<SweepSpec> specs;
            if (!preset_name.empty()) {
                specs = preset(preset_name);
            } else {
                SweepSpec s;
                s.varying = varying;
                s.from = from;
                s.to = to;
                s.steps = steps;
                // The varying rate needs no value of its own.
                ParamFlags fixed = pf_sweep;
                for (std::size_t i = 0; i < kRateNames.size(); ++i) {
                    if (kRateNames[i] == varying && !fixed.rates[i]) fixed.rates[i] = from;
                }
                s.fixed = fixed.resolve();
                std::stringstream ss(outputs);
                for (std::string item; std::getline(ss, item, ',');) {
                    if (!item.empty()) s.outputs.push_back(item);
                }
                specs.push_back(std::move(s));
            }
            SweepOptions so;
            so.measures = nf_sweep.measure_options();
            write_sweep_csv(out, specs, so);
            return kOk;
        }
    } catch (const InvalidParams& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NotStable& e) {
        err << "error: " << e.what() << '\n';
        return verdict_exit(e.report());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}

}  // namespace orbitq::cli
