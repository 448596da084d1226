#pragma once

#include "hybridsim/cli_config.hpp"

namespace hybridsim {

// Executes one configured run, writing manifest.json, report.json, state or
// trajectory series and summary.json under cfg.out_dir.
// Exit codes: 0 success, 2 admissibility, 3 numerical, 4 I/O.
int run(const RunConfig& cfg);

// Fixed-order parallel map over trajectory indices; thread count capped by
// HYBRIDSIM_THREADS.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace hybridsim
