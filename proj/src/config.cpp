#include "gcsync/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gcsync {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

const json& member(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) invalid(where + " must be an object");
    const auto it = obj.find(key);
    if (it == obj.end()) invalid(where + "." + key + " is missing");
    return *it;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) invalid(where + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(where + " must be finite");
    return d;
}

std::size_t count(const json& v, const std::string& where) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) invalid(where + " must be an integer");
    const auto k = v.get<long long>();
    if (k < 1) invalid(where + " must be positive");
    return static_cast<std::size_t>(k);
}

Vec numbers(const json& v, const std::string& where) {
    if (!v.is_array()) invalid(where + " must be an array");
    Vec out;
    out.reserve(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

Mat matrix(const json& v, std::size_t rows, std::size_t cols, const std::string& where) {
    Vec data = numbers(v, where);
    if (data.size() != rows * cols)
        invalid(where + " has " + std::to_string(data.size()) + " entries, expected " + std::to_string(rows) + "x" +
                std::to_string(cols));
    return Mat(rows, cols, std::move(data));
}

Vec stacked_states(const json& v, std::size_t N, std::size_t n, const std::string& where) {
    if (!v.is_array() || v.size() != N) invalid(where + " must hold N arrays");
    Vec out;
    out.reserve(N * n);
    for (std::size_t j = 0; j < N; ++j) {
        const Vec row = numbers(v[j], where + "[" + std::to_string(j) + "]");
        if (row.size() != n) invalid(where + "[" + std::to_string(j) + "] must have n entries");
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

json states_json(const Vec& stacked, std::size_t N) {
    json out = json::array();
    const std::size_t n = stacked.size() / N;
    for (std::size_t j = 0; j < N; ++j)
        out.push_back(Vec(stacked.begin() + static_cast<long>(j * n), stacked.begin() + static_cast<long>((j + 1) * n)));
    return out;
}

} // namespace

json matrix_json(const Mat& m) { return Vec(m.entries().begin(), m.entries().end()); }

lmi::SolverOptions SolverSettings::options() const {
    lmi::SolverOptions o;
    o.margin = margin;
    o.delta = delta;
    o.max_iters = max_iters;
    return o;
}

sim::Scenario ScenarioConfig::scenario(const ProtocolGains& gains) const {
    return {model, topology, weights, gains, initial_states, protocol_initial_states, sim.dt, sim.horizon};
}

ScenarioConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        invalid(std::string("malformed document: ") + e.what());
    }
    ScenarioConfig c;

    const json& model = member(doc, "model", "config");
    const std::size_t n = count(member(model, "n", "model"), "model.n");
    const std::size_t m = count(member(model, "m", "model"), "model.m");
    const std::size_t d = count(member(model, "d", "model"), "model.d");
    c.model.A = matrix(member(model, "A", "model"), n, n, "model.A");
    c.model.B = matrix(member(model, "B", "model"), n, m, "model.B");
    c.model.C = matrix(member(model, "C", "model"), d, n, "model.C");

    const json& topo = member(doc, "topology", "config");
    const json& kind = member(topo, "kind", "topology");
    if (!kind.is_string()) invalid("topology.kind must be a string");
    const std::size_t N = count(member(topo, "N", "topology"), "topology.N");
    const json& edges = member(topo, "edges", "topology");
    if (!edges.is_array()) invalid("topology.edges must be an array");
    std::vector<Edge> list;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string where = "topology.edges[" + std::to_string(k) + "]";
        if (!edges[k].is_array() || edges[k].size() != 3) invalid(where + " must be [i, j, w]");
        list.push_back({count(edges[k][0], where), count(edges[k][1], where), number(edges[k][2], where)});
    }
    c.topology = Topology(parse_topology_kind(kind.get<std::string>()), N, std::move(list));

    const json& weights = member(doc, "weights", "config");
    c.weights.Q = matrix(member(weights, "Q", "weights"), n, n, "weights.Q");
    c.weights.R = matrix(member(weights, "R", "weights"), m, m, "weights.R");

    c.budget = number(member(doc, "budget", "config"), "budget");
    if (!(c.budget > 0.0)) invalid("budget must be positive");
    c.initial_states = stacked_states(member(doc, "initial_states", "config"), N, n, "initial_states");
    if (const auto it = doc.find("protocol_initial_states"); it != doc.end() && !it->is_null())
        c.protocol_initial_states = stacked_states(*it, N, n, "protocol_initial_states");

    if (const auto it = doc.find("sim"); it != doc.end()) {
        if (it->contains("dt")) c.sim.dt = number((*it)["dt"], "sim.dt");
        if (it->contains("horizon")) c.sim.horizon = number((*it)["horizon"], "sim.horizon");
    }
    if (!(c.sim.dt > 0.0) || !(c.sim.horizon >= c.sim.dt)) invalid("sim needs dt > 0 and horizon >= dt");
    if (const auto it = doc.find("solver"); it != doc.end()) {
        if (it->contains("margin")) c.solver.margin = number((*it)["margin"], "solver.margin");
        if (it->contains("delta")) c.solver.delta = number((*it)["delta"], "solver.delta");
        if (it->contains("max_iters")) c.solver.max_iters = static_cast<int>(count((*it)["max_iters"], "solver.max_iters"));
    }
    if (!(c.solver.margin > 0.0) || !(c.solver.delta > 0.0)) invalid("solver margin and delta must be positive");

    c.model.validate();
    c.weights.validate(c.model);
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) invalid("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json to_json(const ScenarioConfig& c) {
    json edges = json::array();
    for (const auto& e : c.topology.edges()) edges.push_back({e.from, e.to, e.weight});
    const std::size_t N = c.topology.agent_count();
    json doc = {
        {"model",
         {{"n", c.model.n()},
          {"m", c.model.m()},
          {"d", c.model.d()},
          {"A", matrix_json(c.model.A)},
          {"B", matrix_json(c.model.B)},
          {"C", matrix_json(c.model.C)}}},
        {"topology", {{"kind", std::string(to_string(c.topology.kind()))}, {"N", N}, {"edges", edges}}},
        {"weights", {{"Q", matrix_json(c.weights.Q)}, {"R", matrix_json(c.weights.R)}}},
        {"budget", c.budget},
        {"initial_states", states_json(c.initial_states, N)},
        {"sim", {{"dt", c.sim.dt}, {"horizon", c.sim.horizon}}},
        {"solver", {{"margin", c.solver.margin}, {"delta", c.solver.delta}, {"max_iters", c.solver.max_iters}}},
    };
    if (!c.protocol_initial_states.empty())
        doc["protocol_initial_states"] = states_json(c.protocol_initial_states, N);
    return doc;
}

ProtocolGains parse_gains(const json& doc, const AgentModel& model) {
    const json& g = doc.contains("gains") ? doc["gains"] : doc;
    ProtocolGains out;
    out.Ku = matrix(member(g, "Ku", "gains"), model.m(), model.n(), "gains.Ku");
    out.Kphi = matrix(member(g, "Kphi", "gains"), model.n(), model.d(), "gains.Kphi");
    return out;
}

ProtocolGains load_gains(const std::string& path, const AgentModel& model) {
    std::ifstream in(path);
    if (!in) invalid("cannot read gains '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_gains(json::parse(ss.str(), nullptr, true, true), model);
    } catch (const json::exception& e) {
        invalid(std::string("malformed gains document: ") + e.what());
    }
}

json to_json(const ProtocolGains& g) {
    return {{"n", g.Ku.cols()}, {"m", g.Ku.rows()}, {"d", g.Kphi.cols()}, {"Ku", matrix_json(g.Ku)},
            {"Kphi", matrix_json(g.Kphi)}};
}

} // namespace gcsync
