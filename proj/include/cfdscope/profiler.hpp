#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cfdscope::bench {

/// One row of a hotspot report.
struct RegionStats {
    std::string name;
    std::string parent;  // empty for top-level regions
    int depth = 0;
    std::uint64_t calls = 0;
    double inclusive_seconds = 0.0;
    double fraction = 0.0;  // inclusive_seconds / total of top-level regions
};

/// Accumulates call counts and inclusive wall time per region. Regions are
/// identified by (parent, name), so the same label nested under different
/// parents yields distinct rows. Single writer: only the driver thread
/// enters and exits regions.
class Profiler {
public:
    using Clock = std::chrono::steady_clock;

    Profiler();

    void enter(std::string_view name);
    /// Throws std::logic_error when `name` is not the innermost open region.
    void exit(std::string_view name);

    [[nodiscard]] bool idle() const { return stack_.size() == 1; }

    /// Regions in depth-first (tree) order, children in first-entry order.
    [[nodiscard]] std::vector<RegionStats> stats() const;

    void reset();

private:
    struct Node {
        std::string name;
        std::size_t parent = 0;
        std::uint64_t calls = 0;
        Clock::duration total{};
        Clock::time_point started{};
        std::vector<std::size_t> children;
        std::map<std::string, std::size_t, std::less<>> by_name;
    };

    std::vector<Node> nodes_;
    std::vector<std::size_t> stack_;
};

/// Profiler that instrumented regions on the calling thread report into;
/// nullptr when profiling is off.
Profiler* active_profiler();

/// Installs a profiler as the calling thread's active profiler for the
/// lifetime of the guard.
class ProfilerInstall {
public:
    explicit ProfilerInstall(Profiler* profiler);
    ~ProfilerInstall();
    ProfilerInstall(const ProfilerInstall&) = delete;
    ProfilerInstall& operator=(const ProfilerInstall&) = delete;

private:
    Profiler* previous_;
};

/// RAII region timer; a no-op when no profiler is active on this thread.
class ScopedRegion {
public:
    explicit ScopedRegion(std::string_view name) : profiler_(active_profiler()), name_(name) {
        if (profiler_) profiler_->enter(name_);
    }
    ~ScopedRegion() noexcept(false) {
        if (profiler_) profiler_->exit(name_);
    }
    ScopedRegion(const ScopedRegion&) = delete;
    ScopedRegion& operator=(const ScopedRegion&) = delete;

private:
    Profiler* profiler_;
    std::string_view name_;
};

// ---------------------------------------------------------------------------
// Reports

/// Tree-drawn table with columns Name, Calls, InclusiveSeconds, Fraction.
void print_report(std::ostream& out, const std::vector<RegionStats>& stats);

/// CSV with header `name,parent,calls,inclusive_seconds,fraction`.
void write_report_csv(std::ostream& out, const std::vector<RegionStats>& stats);
void write_report_csv(const std::filesystem::path& path, const std::vector<RegionStats>& stats);
std::vector<RegionStats> read_report_csv(const std::filesystem::path& path);

struct RegionChange {
    std::string name;
    std::string parent;
    int depth = 0;
    std::optional<RegionStats> before;
    std::optional<RegionStats> after;
    /// Percent change of total inclusive time; empty when a side is missing.
    std::optional<double> total_change_pct;
    std::optional<double> per_call_change_pct;
};

/// Matches regions by (parent, name). Order follows `before`; regions only
/// present in `after` go to the end of their parent's subtree.
std::vector<RegionChange> compare_reports(const std::vector<RegionStats>& before,
                                          const std::vector<RegionStats>& after);

void print_comparison(std::ostream& out, const std::vector<RegionChange>& changes);

}  // namespace cfdscope::bench
