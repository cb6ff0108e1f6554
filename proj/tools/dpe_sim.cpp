#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "dpe/config.hpp"
#include "dpe/error.hpp"
#include "dpe/io.hpp"

// Exit codes: 0 all scenarios converged, 1 runtime failure, 2 bad usage or
// config, 3 a solve did not converge.
int main(int argc, char** argv) {
    CLI::App app{"Dot-product engine circuit and network simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, out_dir = ".";
    long long seed = -1;
    int threads = 0;
    app.add_option("--config", config_path, "experiment config (JSON)")->envname("DPE_CONFIG");
    app.add_option("--out", out_dir, "output directory")->envname("DPE_OUT");
    app.add_option("--seed", seed, "override the config seed")->envname("DPE_SEED")->check(CLI::NonNegativeNumber);
    app.add_option("--threads", threads, "worker threads (0 = runtime default, 1 = serial)")
        ->envname("DPE_THREADS")
        ->check(CLI::NonNegativeNumber);
    for (const auto& name : dpe::cli::command_names()) app.add_subcommand(name, "run the " + name + " experiment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        dpe::cli::RunContext ctx;
        ctx.config = config_path.empty() ? dpe::ExperimentConfig{} : dpe::load_config(config_path);
        if (seed >= 0) ctx.config.seed = static_cast<std::uint64_t>(seed);
        ctx.config.validate();
        ctx.config_hash = dpe::hex64(dpe::fnv1a64(dpe::resolved_config_json(ctx.config)));
        ctx.out_dir = out_dir;
        std::filesystem::create_directories(out_dir);
        if (threads == 1) ctx.exec = dpe::Exec::Serial;
        if (threads > 1) dpe::set_thread_count(threads);
        return dpe::cli::run_command(command, ctx);
    } catch (const dpe::InvalidConfig& e) {
        std::fprintf(stderr, "dpe-sim %s: config error: %s\n", command.c_str(), e.what());
        return 2;
    } catch (const dpe::InvalidInput& e) {
        std::fprintf(stderr, "dpe-sim %s: invalid input: %s\n", command.c_str(), e.what());
        return 2;
    } catch (const dpe::SolverError& e) {
        std::fprintf(stderr, "dpe-sim %s: did not converge: %s\n", command.c_str(), e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dpe-sim %s: %s\n", command.c_str(), e.what());
        return 1;
    }
}
