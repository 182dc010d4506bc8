#include <iostream>

#include "CLI11.hpp"
#include "nsk41/cli/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nsk41: forced Navier-Stokes experiments on a periodic box"};
    app.set_version_flag("--version", std::string(nsk41::cli::kVersion));
    app.require_subcommand(1);

    nsk41::cli::RunOptions opt;
    std::string config;
    std::string out;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "experiment configuration (YAML)")->required();
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "override the configured seed");
    };
    CLI::App* run = app.add_subcommand("run", "run a single experiment");
    add_common(run);
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    add_common(sweep);
    sweep->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nsk41::cli::kConfigError;
    }
    if (!out.empty()) opt.out = out;
    if (app.got_subcommand(run) ? run->count("--seed") : sweep->count("--seed")) opt.seed = seed;

    return nsk41::cli::run(config, opt, app.got_subcommand(sweep), std::cerr);
}
