// semiclass <command> --config <path.toml> --out <dir> [--threads N] [--seed S]

#include <chrono>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "semiclass/config.hpp"
#include "semiclass/errors.hpp"
#include "semiclass/experiments.hpp"
#include "semiclass/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Semiclassical Schroedinger dynamics on flat tori"};
    app.require_subcommand(1, 1);
    std::string config, out;
    int threads = -1;
    long long seed = -1;
    for (const auto& name : semiclass::command_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " sweep");
        sub->add_option("--config", config, "TOML experiment file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "seed for random draws")->check(CLI::NonNegativeNumber);
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        auto cfg = semiclass::load_config(config);
        if (!cfg.command.empty() && cfg.command != command)
            throw semiclass::ConfigError("config is for '" + cfg.command + "', not '" + command + "'");
        if (threads >= 0) cfg.threads = threads;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        semiclass::set_thread_count(cfg.threads);
        const auto t0 = std::chrono::steady_clock::now();
        const auto report = semiclass::run_command(cfg, command);
        semiclass::write_report(report, out);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, "%s: %zu rows written to %s in %.1f s\n", command.c_str(), report.rows.size(),
                     out.c_str(), secs);
    } catch (const semiclass::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
