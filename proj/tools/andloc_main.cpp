// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: andloc <subcommand> --config run.json [--out dir]
// [--seed n] [--threads n] [--plot]

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "andloc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Localization computations for the matrix-valued Anderson-Bernoulli operator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool plot = false;
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
    app.add_flag("--plot", plot, "also write a matplotlib script for the tables");
    app.fallthrough();

    const std::pair<const char*, const char*> commands[] = {
        {"interval", "spectral bounds and the energy interval I"},
        {"certify", "density certificates over an energy grid"},
        {"critical", "scan I for energies with a deficient Lie closure"},
        {"lyapunov", "Lyapunov spectrum over an energy grid"},
        {"ids", "integrated density of states of finite restrictions"},
        {"localize", "eigenfunction decay rates in an energy window"},
        {"report", "all of the above plus a cross-referenced summary"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : andloc::cli::kExitInput;
    }

    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read " << config_path << "\n";
        return andloc::cli::kExitInput;
    }
    std::stringstream text;
    text << in.rdbuf();

    andloc::cli::RunConfig cfg;
    try {
        cfg = andloc::cli::parse_config(text.str());
    } catch (const andloc::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return andloc::cli::kExitInput;
    }
    if (*seed_opt) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    andloc::set_thread_count(threads);

    const auto command = app.get_subcommands().front()->get_name();
    return andloc::cli::run(cfg, command, cfg.out_dir, std::cout, std::cerr, plot);
}
