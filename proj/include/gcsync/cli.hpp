#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsync/config.hpp"

namespace gcsync::cli {

/// Flag values that override config fields.
struct Overrides {
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<double> budget;

    void apply(ScenarioConfig& c) const;
};

struct RunReport {
    std::string command;
    std::string status = "ok"; // ok, infeasible, budget_too_small, diverged, invalid_config
    std::string reason;
    std::optional<ProtocolGains> gains;
    std::optional<double> budget;
    std::optional<double> gamma;
    std::optional<double> budget_coefficient;
    std::optional<double> cost_bound;
    std::optional<double> final_cost;
    std::optional<double> initial_error_metric;
    std::optional<double> final_error_metric;
    std::optional<int> solver_iterations;
    std::optional<bool> feasible;
    std::optional<bool> budget_void;
    std::vector<lmi::BlockMargin> margins;
    std::vector<lmi::CclIteration> history;
    std::map<std::string, std::string> files;
    nlohmann::json summary; // reproduce only

    [[nodiscard]] int exit_code() const;
};

int exit_code(std::string_view status);
/// Maps a structured error onto a report status.
std::string status_for(Errc code);
nlohmann::json to_json(const RunReport& r);

RunReport cmd_design(const std::string& config_path, const std::filesystem::path& out_dir, const Overrides& o = {});
RunReport cmd_analyze(const std::string& config_path, const std::string& gains_path,
                      const std::filesystem::path& out_dir, const Overrides& o = {});
RunReport cmd_simulate(const std::string& config_path, const std::string& gains_path,
                       const std::filesystem::path& out_dir, const Overrides& o = {});
RunReport cmd_reproduce(const std::string& example_id, const std::filesystem::path& out_dir, const Overrides& o = {});

/// Same workflows on an already parsed config.
RunReport run_design(const ScenarioConfig& c, const std::filesystem::path& out_dir);
RunReport run_analyze(const ScenarioConfig& c, const ProtocolGains& gains, const std::filesystem::path& out_dir);
RunReport run_simulate(const ScenarioConfig& c, const ProtocolGains& gains, const std::filesystem::path& out_dir);

/// Bundled scenario documents by id ("example1", "example2").
std::optional<std::string> bundled_scenario(std::string_view id);

} // namespace gcsync::cli
