#include <iostream>

#include <CLI11.hpp>

#include "gcsync/cli.hpp"

int main(int argc, char** argv) {
    namespace cli = gcsync::cli;
    CLI::App app{"Guaranteed-cost synchronization protocol design, analysis and simulation"};
    app.require_subcommand(1);

    std::string config, gains, out = "out", example;
    cli::Overrides o;
    auto common = [&](CLI::App* sub, bool needs_config, bool needs_gains) {
        if (needs_config) sub->add_option("--config", config, "scenario document")->required();
        if (needs_gains) sub->add_option("--gains", gains, "gains document")->required();
        sub->add_option("--out", out, "output directory");
        sub->add_option("--dt", o.dt, "integration step override");
        sub->add_option("--horizon", o.horizon, "simulation horizon override");
        sub->add_option("--budget", o.budget, "cost budget override");
    };
    auto* design = app.add_subcommand("design", "synthesize protocol gains under the cost budget");
    common(design, true, false);
    auto* analyze = app.add_subcommand("analyze", "certify given gains against the cost budget");
    common(analyze, true, true);
    auto* simulate = app.add_subcommand("simulate", "integrate the closed-loop network");
    common(simulate, true, true);
    auto* reproduce = app.add_subcommand("reproduce", "run a bundled example end to end");
    reproduce->add_option("example", example, "example1 or example2")->required();
    common(reproduce, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::exit_code("invalid_config");
    }

    cli::RunReport report;
    if (*design) report = cli::cmd_design(config, out, o);
    else if (*analyze) report = cli::cmd_analyze(config, gains, out, o);
    else if (*simulate) report = cli::cmd_simulate(config, gains, out, o);
    else report = cli::cmd_reproduce(example, out, o);

    std::cout << cli::to_json(report).dump(2) << '\n';
    if (report.status != "ok") std::cerr << "gcsync: " << report.status << ": " << report.reason << '\n';
    return report.exit_code();
}
