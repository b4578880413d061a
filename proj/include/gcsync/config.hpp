#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "gcsync/lmi.hpp"
#include "gcsync/sim.hpp"
#include "gcsync/synthesis.hpp"
#include "gcsync/topology.hpp"

namespace gcsync {

struct SimSettings {
    double dt = 1e-3;
    double horizon = 10.0;
    friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

struct SolverSettings {
    double margin = 1e-7;
    double delta = 1e-4;
    int max_iters = 200;
    friend bool operator==(const SolverSettings&, const SolverSettings&) = default;

    [[nodiscard]] lmi::SolverOptions options() const;
};

/// One scenario document: model, network, weights, budget, initial states.
struct ScenarioConfig {
    AgentModel model;
    Topology topology{TopologyKind::Leaderless, 2, {{1, 2, 1.0}}};
    CostWeights weights;
    double budget = 0.0;
    Vec initial_states;          // N·n, agent-major
    Vec protocol_initial_states; // empty means zeros
    SimSettings sim;
    SolverSettings solver;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

    [[nodiscard]] sim::Scenario scenario(const ProtocolGains& gains) const;
};

/// Parses a scenario document (comments allowed). Throws Error(InvalidConfig) or the
/// structural error raised while validating it.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& c);

/// Gains documents: {"n", "m", "d", "Ku": [m·n], "Kphi": [n·d]}; a design report
/// carrying a "gains" member is accepted too.
ProtocolGains parse_gains(const nlohmann::json& doc, const AgentModel& model);
ProtocolGains load_gains(const std::string& path, const AgentModel& model);
nlohmann::json to_json(const ProtocolGains& g);

nlohmann::json matrix_json(const Mat& m);

} // namespace gcsync
