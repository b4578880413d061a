#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "gcsync/cli.hpp"

using namespace gcsync;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const std::string source_dir = GCSYNC_SOURCE_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "gcsync_acceptance" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Run {
    ScenarioConfig config;
    cli::RunReport report;
    double seconds = 0.0;
};

Run& reproduced(const std::string& id) {
    static std::map<std::string, Run> cache;
    if (auto it = cache.find(id); it != cache.end()) return it->second;
    Run r;
    r.config = parse_config(*cli::bundled_scenario(id));
    const auto t0 = std::chrono::steady_clock::now();
    r.report = cli::cmd_reproduce(id, scratch(id));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cache.emplace(id, std::move(r)).first->second;
}

sim::Trajectory simulate(const Run& r, double dt) {
    auto s = r.config.scenario(*r.report.gains);
    s.dt = dt;
    return sim::integrate(s);
}

Outcome end_to_end(const std::string& id, double budget) {
    const Run& r = reproduced(id);
    if (r.report.status != "ok") return {false, "status " + r.report.status + ": " + r.report.reason};
    const double cost = *r.report.final_cost;
    const double ratio = *r.report.final_error_metric / *r.report.initial_error_metric;
    const bool ok = cost <= budget && ratio <= 1e-3 && r.seconds < 60.0;
    return {ok, fmt("status ok, Js(T)=%.3f <= %.0f, error ratio %.3g <= 1e-3, %.2fs < 60s", cost, budget, ratio,
                    r.seconds)};
}

Outcome criterion1() { return end_to_end("example1", 6000.0); }
Outcome criterion2() { return end_to_end("example2", 10000.0); }

Outcome criterion3() {
    const Run& r = reproduced("example1");
    const Vec c0 = sim::sync_function(r.config.model.A, r.config.initial_states, 6, 0.0);
    const Vec expected{2.3333, 3.8333, 4.8333};
    bool match = true;
    for (std::size_t k = 0; k < 3; ++k) match = match && std::round(c0[k] * 1e4) == std::round(expected[k] * 1e4);
    if (r.report.status != "ok") return {false, "example1 design failed"};
    const auto tr = simulate(r, r.config.sim.dt);
    const double T = tr.times.back();
    const Vec cT = expm(r.config.model.A, T) * sim::mean_state(r.config.initial_states, 6);
    double worst = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 3; ++k) s += std::pow(tr.states.back()[j * 3 + k] - cT[k], 2);
        worst = std::max(worst, std::sqrt(s));
    }
    const double tol = 1e-3 * (1.0 + norm2(cT));
    return {match && worst <= tol,
            fmt("c(0)=[%.4f, %.4f, %.4f]; max_j|x_j(T)-c(T)|=%.3g <= %.3g at T=%.0f", c0[0], c0[1], c0[2], worst, tol,
                T)};
}

Outcome criterion4() {
    const ScenarioConfig c = parse_config(*cli::bundled_scenario("example1"));
    const double a = budget_coefficient(c.initial_states, TopologyKind::Leaderless, 6);
    const double b = budget_coefficient(c.initial_states, TopologyKind::LeaderFollowing, 6);
    const bool ok = std::abs(a - 3369.0) <= 1e-9 * 3369.0 && std::abs(b - 6716.0) <= 1e-9 * 6716.0;
    return {ok, fmt("leaderless %.12g (3369), leader-following %.12g (6716)", a, b)};
}

Outcome criterion5() {
    std::string detail;
    bool ok = true;
    for (const char* id : {"example1", "example2"}) {
        const Run& r = reproduced(id);
        if (r.report.status != "ok" || !r.report.feasible || !*r.report.feasible) return {false, std::string(id) + " not certified"};
        const auto tr = simulate(r, r.config.sim.dt);
        bool monotone = true;
        for (std::size_t k = 1; k < tr.cost_running.size(); ++k) monotone = monotone && tr.cost_running[k] >= tr.cost_running[k - 1];
        const double js = tr.cost_running.back(), bound = *r.report.cost_bound, budget = r.config.budget;
        const double fine = simulate(r, r.config.sim.dt / 2).cost_running.back();
        const double rel = std::abs(fine - js) / fine;
        ok = ok && js <= bound && bound <= budget && monotone && rel <= 1e-6;
        detail += fmt("%s: Js=%.2f <= bound=%.2f <= %.0f, monotone=%d, dt-halving %.2g; ", id, js, bound, budget,
                      monotone, rel);
    }
    return {ok, detail};
}

Outcome criterion6() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-10.0, 10.0), w(0.2, 2.0);
    const ScenarioConfig c = parse_config(*cli::bundled_scenario("example1"));
    const ProtocolGains g = load_gains(source_dir + "/scenarios/reference_gains_example1.json", c.model);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        // alternate the 6-cycle with a weighted complete graph
        std::vector<Edge> edges;
        if (trial % 2 == 0) edges = c.topology.edges();
        else
            for (std::size_t i = 1; i <= 6; ++i)
                for (std::size_t j = i + 1; j <= 6; ++j) edges.push_back({i, j, w(rng)});
        const Topology t(TopologyKind::Leaderless, 6, edges);
        Vec x(18), phi(18);
        for (auto& v : x) v = u(rng);
        for (auto& v : phi) v = u(rng);
        const double pair = sim::cost_terms(t, x, phi, c.weights, g).second;
        const double quad = sim::disagreement_cost_quadratic(t, x, phi, c.weights.Q);
        worst = std::max(worst, std::abs(pair - quad) / std::abs(quad));
    }
    return {worst <= 1e-10, fmt("max relative gap %.3g over 1000 evaluations (<= 1e-10)", worst)};
}

Outcome criterion7() {
    double worst = 0.0;
    for (std::size_t N = 2; N <= 8; ++N) {
        const auto a = sym_eig(relationship_matrix(TopologyKind::Leaderless, N)).values;
        worst = std::max(worst, std::abs(a[0]));
        for (std::size_t k = 1; k < N; ++k) worst = std::max(worst, std::abs(a[k] - 1.0));
        const auto b = sym_eig(relationship_matrix(TopologyKind::LeaderFollowing, N)).values;
        worst = std::max(worst, std::abs(b[0]));
        for (std::size_t k = 1; k + 1 < N; ++k) worst = std::max(worst, std::abs(b[k] - 1.0));
        worst = std::max(worst, std::abs(b[N - 1] - static_cast<double>(N)));
    }
    const Spectrum s = spectrum(Topology::cycle(6));
    const double gap = std::max(std::abs(s.lambda2 - 1.0), std::abs(s.lambdaN - 4.0));
    return {worst <= 1e-9 && gap <= 1e-9,
            fmt("relationship spectra max deviation %.3g; 6-cycle lambda2=%.12g lambdaN=%.12g", worst, s.lambda2,
                s.lambdaN)};
}

Outcome criterion8() {
    bool ok = true;
    std::string detail;
    for (const char* id : {"example1", "example2"}) {
        const Run& r = reproduced(id);
        const auto& h = r.report.history;
        double rise = 0.0, min_trace = 1e300;
        for (std::size_t k = 0; k < h.size(); ++k) {
            if (k > 0) rise = std::max(rise, h[k].objective - h[k - 1].objective);
            min_trace = std::min(min_trace, h[k].coupling_trace);
        }
        ok = ok && !h.empty() && rise <= 1e-8 && min_trace >= 3.0 - 1e-9;
        detail += fmt("%s: %zu iterations, max objective rise %.2g, min tr(Px Phat_x) %.9g; ", id, h.size(), rise,
                      min_trace);
    }
    const ScenarioConfig c = parse_config(*cli::bundled_scenario("example1"));
    std::string small;
    try {
        static_cast<void>(design(c.model, c.topology, c.weights, c.initial_states, 1e-3, c.solver.options()));
        small = "succeeded";
    } catch (const Error& e) {
        small = std::string(to_string(e.code()));
    }
    ok = ok && small == "BudgetTooSmall";
    return {ok, detail + "budget 1e-3 -> " + small};
}

Outcome criterion9() {
    const Run& lead = reproduced("example2");
    const Run& flat = reproduced("example1");
    if (lead.report.status != "ok" || flat.report.status != "ok") return {false, "design failed"};
    const auto tl = simulate(lead, lead.config.sim.dt);
    bool zero = true;
    for (const auto& phi : tl.protocol_states) {
        for (std::size_t k = 0; k < 3; ++k) zero = zero && phi[k] == 0.0 && !std::signbit(phi[k]);
        for (double v : lead.report.gains->Ku * std::span<const double>(phi.data(), 3)) zero = zero && v == 0.0;
    }
    const auto tf = simulate(flat, flat.config.sim.dt);
    double worst = 0.0;
    for (const auto& phi : tf.protocol_states) {
        Vec mode(3, 0.0);
        for (std::size_t j = 0; j < 6; ++j)
            for (std::size_t k = 0; k < 3; ++k) mode[k] += phi[j * 3 + k] / std::sqrt(6.0);
        worst = std::max(worst, norm2(mode));
    }
    return {zero && worst <= 1e-9,
            fmt("leader phi_1 and u_1 bitwise zero: %s; leaderless max |phihat_1| = %.3g <= 1e-9", zero ? "yes" : "no",
                worst)};
}

Outcome criterion10() {
    std::string detail;
    bool ok = true;
    for (int ex = 1; ex <= 2; ++ex) {
        const fs::path fixture = source_dir + fmt("/tests/fixtures/reference_gains_example%d_analysis.json", ex);
        if (!fs::exists(fixture)) return {false, "missing fixture " + fixture.string()};
        std::ifstream in(fixture);
        const json recorded = json::parse(in);
        const ScenarioConfig c = parse_config(*cli::bundled_scenario(fmt("example%d", ex)));
        const ProtocolGains g = load_gains(source_dir + fmt("/scenarios/reference_gains_example%d.json", ex), c.model);
        const auto now = cli::run_analyze(c, g, scratch(fmt("reference%d", ex)));
        const json fresh = cli::to_json(now);
        bool same = fresh["status"] == recorded["status"] && fresh["feasible"] == recorded["feasible"];
        if (same && recorded["cost_bound"].is_number())
            same = std::abs(fresh["cost_bound"].get<double>() - recorded["cost_bound"].get<double>()) <=
                   1e-6 * recorded["cost_bound"].get<double>();
        ok = ok && same;
        detail += fmt("example%d reference gains: recorded status %s, feasible %s, cost_bound %s, rerun %s; ", ex,
                      recorded["status"].get<std::string>().c_str(), recorded["feasible"].dump().c_str(),
                      recorded["cost_bound"].dump().c_str(), same ? "matches" : "differs");
    }
    return {ok, detail + "digit-for-digit gain match excluded"};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"C1 example1 end-to-end", criterion1},
        {"C2 example2 end-to-end", criterion2},
        {"C3 synchronization function", criterion3},
        {"C4 budget coefficients", criterion4},
        {"C5 cost-bound chain", criterion5},
        {"C6 cost-term identity", criterion6},
        {"C7 spectral facts", criterion7},
        {"C8 cone complementarity behavior", criterion8},
        {"C9 structural exactness", criterion9},
        {"C10 reference gains fixtures", criterion10},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
