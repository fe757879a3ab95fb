#pragma once

#include "config.hpp"
#include "output.hpp"

namespace autores::cli {

// Runs the configured subcommand and writes its files into `out` (the
// manifest is left to the caller). Library errors propagate unchanged.
void run(const RunConfig& cfg, OutputSet& out);

}  // namespace autores::cli
