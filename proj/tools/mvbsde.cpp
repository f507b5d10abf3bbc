#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mvbsde/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium mean-variance policies under CKLS stochastic volatility"};
    app.set_version_flag("--version", MVBSDE_VERSION);
    std::string kind, config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    app.add_option("kind", kind, "experiment kind")
        ->required()
        ->check(CLI::IsMember(mvbsde::experiment_kinds()));
    app.add_option("--config", config, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "output root directory (overrides output_dir)");
    app.add_option("--seed", seed, "seed override");
    app.add_option("--threads", threads, "worker threads, 0 for all cores");
    CLI11_PARSE(app, argc, argv);

    mvbsde::RunOptions opts{out, seed, threads};
    mvbsde::RunResult res = mvbsde::run_experiment(kind, config, opts);
    if (!res.message.empty()) (res.exit_code == 0 ? std::cout : std::cerr) << res.message << (res.message.back() == '\n' ? "" : "\n");
    if (!res.output_dir.empty()) std::cout << res.output_dir << '\n';
    return res.exit_code;
}
