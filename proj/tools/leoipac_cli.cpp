// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: one subcommand per experiment.
//
//   leoipac crb-sweep --scenario my.cfg --out results/ --seed 7
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <leoipac/experiments.hpp>

namespace {

struct Options {
    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    unsigned workers = 1;
    bool print_scenario = false;
};

int run(const std::string& name, const Options& opt) {
    using namespace leoipac;
    Scenario sc = opt.scenario_path.empty() ? Scenario{} : load_scenario(opt.scenario_path);
    if (opt.seed)
        sc.seed = *opt.seed;
    if (opt.trials) {
        if (name == "se-sweep")
            sc.se_trials = *opt.trials;
        else if (name == "rmse-sweep")
            sc.rmse_trials = *opt.trials;
    }
    validate(sc);
    if (opt.print_scenario)
        std::cout << serialize(sc);
    for (const auto& p : run_experiment(name, sc, opt.out_dir, opt.workers))
        std::cout << p.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LEO integrated positioning and communication simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", leoipac::kToolVersion);

    Options opt;
    std::string chosen;
    for (const auto& name : leoipac::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--scenario", opt.scenario_path, "key = value scenario file")->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "master seed (overrides the scenario)");
        sub->add_option("--trials", opt.trials, "Monte Carlo trials per grid point (overrides the scenario)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--workers", opt.workers, "worker threads; results do not depend on it")
            ->check(CLI::Range(1u, 1024u));
        sub->add_flag("--print-scenario", opt.print_scenario, "echo the effective scenario");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run(chosen, opt);
    } catch (const leoipac::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
