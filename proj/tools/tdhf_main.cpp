#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "tdhf/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tdhf: pseudospectral mean-field density-matrix propagator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "propagate a scenario and audit it");
    std::string config_path, out_dir, scheme;
    bool deterministic = false, no_interaction = false;
    run->add_option("--config", config_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_flag("--deterministic", deterministic,
                  "pin the deterministic configuration (also the default)");
    run->add_option("--scheme", scheme, "override scheme: strang|picard");
    run->add_flag("--no-interaction", no_interaction,
                  "disable the mean-field coupling");

    CLI11_PARSE(app, argc, argv);

    try {
        tdhf::Scenario sc = tdhf::load_scenario(config_path);
        if (deterministic) sc.deterministic = true;
        if (no_interaction) sc.interactions = false;
        if (!scheme.empty()) {
            if (scheme == "strang")
                sc.propagator.scheme = tdhf::Scheme::strang_orbital;
            else if (scheme == "picard")
                sc.propagator.scheme = tdhf::Scheme::picard_operator;
            else {
                std::fprintf(stderr, "unknown --scheme value: %s\n",
                             scheme.c_str());
                return 1;
            }
        }
        const tdhf::RunResult res = tdhf::run_scenario(sc, out_dir);
        if (res.exit_code == 0) {
            std::printf("ok: all audits passed (%s)\n", res.audit_path.c_str());
        } else {
            for (const auto& f : res.audit.failures)
                std::fprintf(stderr, "audit failure: %s\n", f.c_str());
        }
        return res.exit_code;
    } catch (const tdhf::ScenarioError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
