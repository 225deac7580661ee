#pragma once

#include <CLI11.hpp>

#include <functional>

namespace havok::cli {

// Each registrar adds a subcommand and returns the action to run once it was parsed.
using Action = std::function<int()>;

Action add_detect(CLI::App& app);
Action add_synth(CLI::App& app);
Action add_bench(CLI::App& app);

void setup_logging();

}  // namespace havok::cli
