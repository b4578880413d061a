#include "gcsync/cli.hpp"

#include <cmath>
#include <fstream>

#include "gcsync_bundled.hpp"

namespace gcsync::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_json(const std::optional<T>& v) {
    if (!v) return nullptr;
    if constexpr (std::is_floating_point_v<T>) return finite_or_null(*v);
    else return *v;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::InvalidConfig, "cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

fs::path prepare_dir(const fs::path& dir) {
    fs::create_directories(dir);
    return dir;
}

// Runs body, turning structured failures into a report status.
template <class Body>
RunReport guarded(const std::string& command, const fs::path& out_dir, const char* report_name, Body body) {
    RunReport r;
    r.command = command;
    try {
        body(r);
    } catch (const Error& e) {
        r.status = status_for(e.code());
        r.reason = e.what();
    } catch (const std::exception& e) {
        r.status = "invalid_config";
        r.reason = e.what();
    }
    try {
        prepare_dir(out_dir);
        const fs::path path = out_dir / report_name;
        r.files["report"] = path.string();
        write_json(path, to_json(r));
    } catch (const std::exception&) {
        r.files.erase("report");
    }
    return r;
}

ScenarioConfig load_with(const std::string& path, const Overrides& o) {
    ScenarioConfig c = load_config(path);
    o.apply(c);
    return c;
}

void fill_design(RunReport& r, const ScenarioConfig& c) {
    const DesignReport d = design(c.model, c.topology, c.weights, c.initial_states, c.budget, c.solver.options());
    r.gains = d.gains;
    r.budget = c.budget;
    r.gamma = d.gamma;
    r.budget_coefficient = d.budget_coefficient;
    r.cost_bound = d.certificate.cost_bound;
    r.solver_iterations = d.iterations;
    r.feasible = d.certified;
    r.margins = d.certificate.margins;
    r.history = d.history;
}

void fill_analyze(RunReport& r, const ScenarioConfig& c, const ProtocolGains& gains) {
    const AnalysisCertificate a =
        analyze(c.model, c.topology, c.weights, gains, c.initial_states, c.budget, c.solver.options());
    r.gains = gains;
    r.budget = c.budget;
    r.gamma = a.gamma;
    r.budget_coefficient = a.budget_coefficient;
    r.feasible = a.feasible;
    r.margins = a.margins;
    if (a.feasible) r.cost_bound = a.cost_bound;
    else {
        r.status = "infeasible";
        r.reason = "no analysis certificate found for the given gains and budget";
    }
}

sim::Trajectory fill_simulate(RunReport& r, const ScenarioConfig& c, const ProtocolGains& gains,
                              const fs::path& out_dir) {
    r.gains = gains;
    r.budget = c.budget;
    const sim::Scenario s = c.scenario(gains);
    sim::Trajectory tr = sim::integrate(s);
    const auto metric = sim::error_metrics(tr);
    r.final_cost = tr.cost_running.back();
    r.initial_error_metric = metric.front();
    r.final_error_metric = metric.back();
    r.budget_void = tr.budget_void;

    prepare_dir(out_dir);
    const fs::path traj = out_dir / "trajectory.csv";
    std::ofstream os(traj);
    if (!os) throw Error(Errc::InvalidConfig, "cannot write '" + traj.string() + "'");
    sim::write_csv(os, tr);
    r.files["trajectory"] = traj.string();
    if (tr.kind == TopologyKind::Leaderless) {
        const fs::path sync = out_dir / "sync_function.csv";
        std::ofstream ss(sync);
        if (!ss) throw Error(Errc::InvalidConfig, "cannot write '" + sync.string() + "'");
        sim::write_sync_csv(ss, tr, c.model.A, c.initial_states);
        r.files["sync_function"] = sync.string();
    }
    return tr;
}

double round_to(double v, int digits) {
    const double scale = std::pow(10.0, digits);
    return std::round(v * scale) / scale;
}

} // namespace

void Overrides::apply(ScenarioConfig& c) const {
    if (dt) c.sim.dt = *dt;
    if (horizon) c.sim.horizon = *horizon;
    if (budget) c.budget = *budget;
    if (!(c.sim.dt > 0.0) || !(c.sim.horizon >= c.sim.dt)) throw Error(Errc::InvalidConfig, "need dt > 0, horizon >= dt");
    if (!(c.budget > 0.0)) throw Error(Errc::InvalidConfig, "budget must be positive");
}

int exit_code(std::string_view status) {
    if (status == "ok") return 0;
    if (status == "infeasible" || status == "budget_too_small") return 2;
    if (status == "diverged") return 4;
    return 3;
}

int RunReport::exit_code() const { return cli::exit_code(status); }

std::string status_for(Errc code) {
    switch (code) {
    case Errc::BudgetTooSmall: return "budget_too_small";
    case Errc::Infeasible:
    case Errc::NotConverged:
    case Errc::Step1Infeasible:
    case Errc::NoFeasibleStart:
    case Errc::Singular: return "infeasible";
    case Errc::NumericalBlowup:
    case Errc::Overflow: return "diverged";
    default: return "invalid_config";
    }
}

json to_json(const RunReport& r) {
    json margins = json::array();
    for (const auto& m : r.margins)
        margins.push_back({{"block", m.label},
                           {"extreme_eigenvalue", finite_or_null(m.extreme_eigenvalue)},
                           {"satisfied", m.satisfied}});
    json history = json::array();
    for (const auto& h : r.history)
        history.push_back({{"k", h.k},
                           {"objective", finite_or_null(h.objective)},
                           {"coupling_trace", finite_or_null(h.coupling_trace)},
                           {"residual", finite_or_null(h.residual)}});
    json doc = {
        {"command", r.command},
        {"status", r.status},
        {"exit_code", r.exit_code()},
        {"reason", r.reason},
        {"gains", r.gains ? to_json(*r.gains) : json(nullptr)},
        {"budget", optional_json(r.budget)},
        {"gamma", optional_json(r.gamma)},
        {"budget_coefficient", optional_json(r.budget_coefficient)},
        {"cost_bound", optional_json(r.cost_bound)},
        {"final_cost", optional_json(r.final_cost)},
        {"initial_error_metric", optional_json(r.initial_error_metric)},
        {"final_error_metric", optional_json(r.final_error_metric)},
        {"solver_iterations", optional_json(r.solver_iterations)},
        {"feasible", optional_json(r.feasible)},
        {"budget_void", optional_json(r.budget_void)},
        {"margins", margins},
        {"history", history},
        {"files", r.files},
    };
    if (!r.summary.is_null()) doc["summary"] = r.summary;
    return doc;
}

RunReport run_design(const ScenarioConfig& c, const fs::path& out_dir) {
    return guarded("design", out_dir, "gains.json", [&](RunReport& r) { fill_design(r, c); });
}

RunReport run_analyze(const ScenarioConfig& c, const ProtocolGains& gains, const fs::path& out_dir) {
    return guarded("analyze", out_dir, "analysis.json", [&](RunReport& r) { fill_analyze(r, c, gains); });
}

RunReport run_simulate(const ScenarioConfig& c, const ProtocolGains& gains, const fs::path& out_dir) {
    return guarded("simulate", out_dir, "simulation.json",
                   [&](RunReport& r) { fill_simulate(r, c, gains, out_dir); });
}

RunReport cmd_design(const std::string& config_path, const fs::path& out_dir, const Overrides& o) {
    return guarded("design", out_dir, "gains.json", [&](RunReport& r) { fill_design(r, load_with(config_path, o)); });
}

RunReport cmd_analyze(const std::string& config_path, const std::string& gains_path, const fs::path& out_dir,
                      const Overrides& o) {
    return guarded("analyze", out_dir, "analysis.json", [&](RunReport& r) {
        const ScenarioConfig c = load_with(config_path, o);
        fill_analyze(r, c, load_gains(gains_path, c.model));
    });
}

RunReport cmd_simulate(const std::string& config_path, const std::string& gains_path, const fs::path& out_dir,
                       const Overrides& o) {
    return guarded("simulate", out_dir, "simulation.json", [&](RunReport& r) {
        const ScenarioConfig c = load_with(config_path, o);
        fill_simulate(r, c, load_gains(gains_path, c.model), out_dir);
    });
}

std::optional<std::string> bundled_scenario(std::string_view id) {
    if (id == "example1") return std::string(bundled::example1);
    if (id == "example2") return std::string(bundled::example2);
    return std::nullopt;
}

RunReport cmd_reproduce(const std::string& example_id, const fs::path& out_dir, const Overrides& o) {
    return guarded("reproduce", out_dir, "reproduce.json", [&](RunReport& r) {
        const auto text = bundled_scenario(example_id);
        if (!text) throw Error(Errc::InvalidConfig, "unknown example '" + example_id + "'");
        ScenarioConfig c = parse_config(*text);
        o.apply(c);
        prepare_dir(out_dir);
        write_json(out_dir / "scenario.json", to_json(c));
        r.files["scenario"] = (out_dir / "scenario.json").string();

        const RunReport d = run_design(c, out_dir);
        r.files["design"] = d.files.count("report") ? d.files.at("report") : "";
        if (d.status != "ok") {
            r.status = d.status;
            r.reason = "design: " + d.reason;
            return;
        }
        const RunReport a = run_analyze(c, *d.gains, out_dir);
        r.files["analysis"] = a.files.count("report") ? a.files.at("report") : "";
        if (a.status != "ok") {
            r.status = a.status;
            r.reason = "analyze: " + a.reason;
            return;
        }

        RunReport s;
        s.command = "simulate";
        const sim::Trajectory tr = fill_simulate(s, c, *d.gains, out_dir);
        write_json(out_dir / "simulation.json", to_json(s));
        r.files["simulation"] = (out_dir / "simulation.json").string();
        for (const auto& [k, v] : s.files) r.files[k] = v;

        r.gains = d.gains;
        r.budget = c.budget;
        r.gamma = d.gamma;
        r.budget_coefficient = d.budget_coefficient;
        r.cost_bound = a.cost_bound;
        r.final_cost = s.final_cost;
        r.initial_error_metric = s.initial_error_metric;
        r.final_error_metric = s.final_error_metric;
        r.solver_iterations = d.solver_iterations;
        r.feasible = a.feasible;
        r.budget_void = s.budget_void;
        r.margins = a.margins;
        r.history = d.history;

        json summary = {
            {"example", example_id},
            {"topology", std::string(to_string(c.topology.kind()))},
            {"budget", c.budget},
            {"cost_bound", finite_or_null(*a.cost_bound)},
            {"final_cost", finite_or_null(*s.final_cost)},
            {"final_cost_within_budget", *s.final_cost <= c.budget},
            {"error_ratio", finite_or_null(*s.final_error_metric / *s.initial_error_metric)},
        };
        if (c.topology.kind() == TopologyKind::Leaderless) {
            json c0 = json::array();
            for (double v : sim::sync_function(c.model.A, c.initial_states, c.topology.agent_count(), 0.0))
                c0.push_back(round_to(v, 4));
            summary["sync_function_at_0"] = c0;
            summary["sync_function_reference"] = {2.3333, 3.8333, 4.8333};
            summary["sync_function_matches"] = c0 == json({2.3333, 3.8333, 4.8333});
        } else {
            const std::size_t n = c.model.n();
            bool zero = true;
            for (const auto& phi : tr.protocol_states)
                for (std::size_t k = 0; k < n; ++k) zero = zero && phi[k] == 0.0;
            summary["leader_protocol_state_zero"] = zero;
        }
        r.summary = summary;
    });
}

} // namespace gcsync::cli
