#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taoi/cli/commands.hpp"
#include "taoi/cli/experiment.hpp"

namespace {

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Common {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "key = value config file");
    cmd->add_option("--preset", c.preset, "fig2 | fig3a | fig3b | fig4a | fig4b");
    cmd->add_option("--set", c.overrides, "override one key, e.g. --set t2u=12");
    cmd->add_option("--out", c.out, "output path");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace taoi::cli;

    CLI::App app{"Timeliness-aware inference scheduling: solve, sweep, simulate, verify"};
    app.require_subcommand(1);

    Common common;
    bool verify_flag = false;
    unsigned jobs = 0;
    std::string policy_path;

    auto* solve = app.add_subcommand("solve", "solve for the optimal policy");
    add_common(solve, common);
    solve->add_flag("--verify", verify_flag, "cross-check against RVI and exhaustive PI");

    auto* sweep = app.add_subcommand("sweep", "solve and evaluate every sweep point");
    add_common(sweep, common);
    sweep->add_option("--jobs", jobs, "concurrent sweep points (0 = hardware threads)");

    auto* simulate = app.add_subcommand("simulate", "simulate each policy at the base point");
    add_common(simulate, common);

    auto* verify = app.add_subcommand("verify", "check value and policy structure");
    add_common(verify, common);
    verify->add_option("--policy", policy_path, "policy table to check instead of solving");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    ExperimentConfig config;
    try {
        std::optional<std::string> text;
        if (!common.config_path.empty()) {
            text = slurp(common.config_path);
            if (!text) {
                std::cerr << "cannot read " << common.config_path << '\n';
                return kExitUsage;
            }
        }
        if (!text && common.preset.empty()) {
            std::cerr << "one of --config or --preset is required\n";
            return kExitUsage;
        }
        const auto preset_name =
            common.preset.empty() ? std::nullopt : std::optional<std::string>(common.preset);
        auto overrides = common.overrides;
        if (!common.out.empty()) {
            overrides.push_back("out=" + common.out);
        }
        config = build_experiment(text, common.config_path, preset_name, overrides);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*solve) {
            return run_solve(config, SolveOptions{verify_flag}, std::cout, std::cerr);
        }
        if (*sweep) {
            return run_sweep(config, jobs, std::cout, std::cerr);
        }
        if (*simulate) {
            return run_simulate(config, std::cout, std::cerr);
        }
        std::optional<std::string> policy_text;
        if (!policy_path.empty()) {
            policy_text = slurp(policy_path);
            if (!policy_text) {
                std::cerr << "cannot read " << policy_path << '\n';
                return kExitUsage;
            }
        }
        return run_verify(config, policy_text, policy_path, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
