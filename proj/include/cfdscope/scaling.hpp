#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cfdscope/sim.hpp"

namespace cfdscope::bench {

struct ScalingRow {
    int threads = 1;
    std::string region;
    double seconds = 0.0;
};

/// Runs the same problem once per thread count and collects the inclusive
/// time of every profiled region. Row count is threads x regions; regions
/// missing from one run are reported with 0 s. Restores the previous worker
/// count afterwards.
std::vector<ScalingRow> scaling_sweep(const SimConfig& cfg, std::span<const int> thread_counts);

/// CSV with header `threads,region,seconds`.
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);

}  // namespace cfdscope::bench
