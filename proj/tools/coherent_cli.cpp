// coherent: run belief-distortion scenarios from JSON files.
//
//   coherent run --scenario s.json [--out report.json] [--seed N] [--trials N] [--tol X] [--quiet]
//   coherent <kind> --scenario s.json ...     (kind checked against the file)

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coherent/scenario.hpp"

namespace {

void add_common(CLI::App* sub, coherent::cli::RunOptions& opts, std::uint64_t& seed, std::size_t& trials,
                double& tol) {
    sub->add_option("--scenario", opts.scenario_path, "scenario JSON file")->required();
    sub->add_option("--out", opts.out_path, "report path (CSV for curve scenarios); stdout if omitted");
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_option("--trials", trials, "override the number of sampled trials")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "override the tolerance")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", opts.quiet, "suppress the summary line");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coherent belief distortions: scenario runner"};
    app.set_version_flag("--version", std::string(coherent::cli::kVersion));
    app.require_subcommand(1);

    coherent::cli::RunOptions opts;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    double tol = 0.0;

    std::vector<std::pair<CLI::App*, std::string>> subs;
    subs.emplace_back(app.add_subcommand("run", "run any scenario"), "");
    for (const auto& kind : coherent::cli::scenario_kinds()) {
        subs.emplace_back(app.add_subcommand(kind, "run a '" + kind + "' scenario"), kind);
    }
    for (auto& [sub, kind] : subs) add_common(sub, opts, seed, trials, tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : coherent::cli::kExitInputError;
    }

    for (auto& [sub, kind] : subs) {
        if (!sub->parsed()) continue;
        if (!kind.empty()) opts.kind = kind;
        if (sub->count("--seed") > 0) opts.overrides.seed = seed;
        if (sub->count("--trials") > 0) opts.overrides.trials = trials;
        if (sub->count("--tol") > 0) opts.overrides.tolerance = tol;
    }
    return coherent::cli::run(opts, std::cout, std::cerr);
}
