#pragma once

#include <string>
#include <vector>

#include "dpe/config.hpp"
#include "dpe/parallel.hpp"

namespace dpe::cli {

struct RunContext {
    ExperimentConfig config;
    std::string out_dir = ".";
    std::string config_hash;
    Exec exec = Exec::Parallel;
};

/// Names accepted by run_command, in help order.
const std::vector<std::string>& command_names();

/// Runs one experiment, writes its CSVs, manifest and resolved config into
/// ctx.out_dir. Returns the process exit code.
int run_command(const std::string& name, const RunContext& ctx);

}  // namespace dpe::cli
