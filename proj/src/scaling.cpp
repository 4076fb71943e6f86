#include "cfdscope/scaling.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <stdexcept>

#include "cfdscope/parallel.hpp"

namespace cfdscope::bench {

std::vector<ScalingRow> scaling_sweep(const SimConfig& cfg, std::span<const int> thread_counts) {
    for (int t : thread_counts)
        if (t < 1) throw std::invalid_argument(fmt::format("thread count must be >= 1 (got {})", t));

    const int previous = thread_count();
    std::vector<std::vector<RegionStats>> per_run;
    try {
        for (int t : thread_counts) {
            set_thread_count(t);
            Profiler profiler;
            spdlog::info("scaling sweep: {} thread(s), n={}, variant={}", t, cfg.n, to_string(cfg.variant));
            per_run.push_back(run(cfg, &profiler).regions);
        }
    } catch (...) {
        set_thread_count(previous);
        throw;
    }
    set_thread_count(previous);

    // Region list in first-seen tree order across all runs.
    std::vector<std::string> regions;
    for (const auto& stats : per_run)
        for (const auto& s : stats)
            if (std::find(regions.begin(), regions.end(), s.name) == regions.end()) regions.push_back(s.name);

    std::vector<ScalingRow> rows;
    for (std::size_t r = 0; r < per_run.size(); ++r) {
        for (const auto& name : regions) {
            double seconds = 0.0;
            for (const auto& s : per_run[r])
                if (s.name == name) seconds += s.inclusive_seconds;
            rows.push_back({thread_counts[r], name, seconds});
        }
    }
    return rows;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
    out << "threads,region,seconds\n";
    for (const auto& r : rows) out << r.threads << ',' << r.region << ',' << fmt::format("{:.9g}", r.seconds) << '\n';
}

}  // namespace cfdscope::bench
