#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "cfdscope/parallel.hpp"
#include "cfdscope/profiler.hpp"
#include "cfdscope/scaling.hpp"
#include "cfdscope/sim.hpp"
#include "cfdscope/sparse.hpp"

using namespace cfdscope;
using namespace cfdscope::bench;
namespace fs = std::filesystem;

namespace {

const RegionStats* find(const std::vector<RegionStats>& stats, std::string_view name, std::string_view parent) {
    for (const auto& s : stats)
        if (s.name == name && s.parent == parent) return &s;
    return nullptr;
}

SimConfig tiny(int steps) {
    SimConfig cfg;
    cfg.n = 6;
    cfg.t_end = cfg.dt * steps;
    return cfg;
}

}  // namespace

TEST_CASE("a timed region records its call and at least the slept time") {
    Profiler p;
    p.enter("sleep");
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    p.exit("sleep");
    const auto stats = p.stats();
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].calls == 1);
    CHECK(stats[0].inclusive_seconds >= 0.010);
    CHECK(stats[0].fraction == 1.0);
    CHECK(stats[0].parent.empty());
}

TEST_CASE("repeated and nested regions") {
    Profiler p;
    ProfilerInstall install(&p);
    for (int i = 0; i < 2; ++i) {
        ScopedRegion outer("outer");
        {
            ScopedRegion inner("inner");
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
        ScopedRegion again("inner");
    }
    {
        ScopedRegion other("other");
        ScopedRegion inner("inner");
    }
    const auto stats = p.stats();
    const auto* outer = find(stats, "outer", "");
    const auto* inner = find(stats, "inner", "outer");
    const auto* inner_other = find(stats, "inner", "other");
    REQUIRE(outer);
    REQUIRE(inner);
    REQUIRE(inner_other);
    CHECK(outer->calls == 2);
    CHECK(inner->calls == 4);
    CHECK(inner_other->calls == 1);
    CHECK(inner->inclusive_seconds <= outer->inclusive_seconds);
    CHECK(inner->depth == 1);
    CHECK(p.idle());
}

TEST_CASE("unbalanced exits are diagnosed") {
    Profiler p;
    CHECK_THROWS_AS(p.exit("nothing"), std::logic_error);
    p.enter("a");
    p.enter("b");
    CHECK_THROWS_AS(p.exit("a"), std::logic_error);
}

TEST_CASE("regions are no-ops without an installed profiler") {
    REQUIRE(active_profiler() == nullptr);
    { ScopedRegion r("ignored"); }
    Profiler p;
    {
        ProfilerInstall install(&p);
        CHECK(active_profiler() == &p);
    }
    CHECK(active_profiler() == nullptr);
    CHECK(p.stats().empty());
}

TEST_CASE("run profile mirrors the hotspot tree") {
    Profiler p;
    const auto res = run(tiny(3), &p);
    const auto& stats = res.regions;

    const auto* root = find(stats, "cfdscope", "");
    REQUIRE(root);
    CHECK(root->fraction == 1.0);
    CHECK(root->calls == 1);
    CHECK(find(stats, "applyForces", "cfdscope")->calls == 3);
    CHECK(find(stats, "solveAdvection", "cfdscope")->calls == 3);
    CHECK(find(stats, "solvePressureCorrection", "cfdscope")->calls == 3);
    CHECK(find(stats, "applyPressureCorrection", "cfdscope")->calls == 3);
    CHECK(find(stats, "pcg", "solvePressureCorrection")->calls == 3);
    for (const char* kernel : {"precondition", "spmv", "dot", "operator+", "operator*"})
        CHECK_MESSAGE(find(stats, kernel, "pcg") != nullptr, kernel);
    CHECK(find(stats, "multiply_add_inplace", "pcg") == nullptr);

    SimConfig opt = tiny(3);
    opt.variant = Variant::optimized;
    Profiler q;
    const auto ores = run(opt, &q);
    CHECK(find(ores.regions, "multiply_add_inplace", "pcg") != nullptr);
    CHECK(find(ores.regions, "operator+", "pcg") == nullptr);

    // Every child is bounded by its parent; top-level fractions sum to <= 1.
    double top = 0.0;
    for (const auto& s : stats) {
        if (s.parent.empty()) {
            top += s.fraction;
            continue;
        }
        CHECK(s.calls >= 1);
        for (const auto& parent : stats)
            if (parent.name == s.parent && parent.depth == s.depth - 1)
                CHECK(s.inclusive_seconds <= parent.inclusive_seconds + 1e-9);
    }
    CHECK(top <= 1.0 + 1e-9);
}

TEST_CASE("an empty run reports the root and one snapshot write") {
    const fs::path dir = fs::temp_directory_path() / "cfdscope_test_bench_empty";
    fs::remove_all(dir);
    SimConfig cfg = tiny(0);
    cfg.output_dir = dir;
    Profiler p;
    const auto res = run(cfg, &p);
    REQUIRE(res.regions.size() == 2);
    CHECK(res.regions[0].name == "cfdscope");
    CHECK(res.regions[1].name == "write_to_file");
    CHECK(res.regions[1].calls == 1);
    fs::remove_all(dir);
}

TEST_CASE("call counts are reproducible between identical runs") {
    const int saved = thread_count();
    set_thread_count(1);
    Profiler a, b;
    const auto ra = run(tiny(4), &a).regions;
    const auto rb = run(tiny(4), &b).regions;
    set_thread_count(saved);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].name == rb[i].name);
        CHECK(ra[i].parent == rb[i].parent);
        CHECK(ra[i].calls == rb[i].calls);
    }
}

TEST_CASE("report table and CSV") {
    Profiler p;
    const auto stats = run(tiny(2), &p).regions;

    std::ostringstream table;
    print_report(table, stats);
    const std::string text = table.str();
    for (const char* col : {"Name", "Calls", "InclusiveSeconds", "Fraction"}) CHECK(text.find(col) != std::string::npos);
    CHECK(text.find("solvePressureCorrection") != std::string::npos);
    CHECK(text.find("└─") != std::string::npos);

    std::ostringstream csv;
    write_report_csv(csv, stats);
    CHECK(csv.str().rfind("name,parent,calls,inclusive_seconds,fraction\n", 0) == 0);

    const fs::path path = fs::temp_directory_path() / "cfdscope_test_report.csv";
    write_report_csv(path, stats);
    const auto back = read_report_csv(path);
    REQUIRE(back.size() == stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) {
        CHECK(back[i].name == stats[i].name);
        CHECK(back[i].parent == stats[i].parent);
        CHECK(back[i].depth == stats[i].depth);
        CHECK(back[i].calls == stats[i].calls);
        CHECK(back[i].inclusive_seconds == doctest::Approx(stats[i].inclusive_seconds).epsilon(1e-8));
    }
    fs::remove(path);

    CHECK_THROWS_AS(read_report_csv(fs::temp_directory_path() / "cfdscope_no_such_report.csv"), std::runtime_error);
}

TEST_CASE("comparing a report with itself shows no change") {
    Profiler p;
    const auto stats = run(tiny(2), &p).regions;
    const auto changes = compare_reports(stats, stats);
    REQUIRE(changes.size() == stats.size());
    for (const auto& c : changes) {
        REQUIRE(c.total_change_pct.has_value());
        CHECK(*c.total_change_pct == 0.0);
        REQUIRE(c.per_call_change_pct.has_value());
        CHECK(*c.per_call_change_pct == 0.0);
    }
    std::ostringstream out;
    print_comparison(out, changes);
    CHECK(out.str().find("pcg") != std::string::npos);
}

TEST_CASE("comparison matches regions by parent and name") {
    std::vector<RegionStats> before{{"root", "", 0, 1, 2.0, 1.0}, {"a", "root", 1, 4, 1.0, 0.5}};
    std::vector<RegionStats> after{{"root", "", 0, 1, 1.0, 1.0}, {"a", "root", 1, 2, 0.25, 0.25},
                                   {"b", "root", 1, 1, 0.5, 0.5}};
    const auto changes = compare_reports(before, after);
    REQUIRE(changes.size() == 3);
    CHECK(changes[0].name == "root");
    CHECK(*changes[0].total_change_pct == doctest::Approx(-50.0));
    CHECK(*changes[1].total_change_pct == doctest::Approx(-75.0));
    CHECK(*changes[1].per_call_change_pct == doctest::Approx(-50.0));
    CHECK(changes[2].name == "b");
    CHECK_FALSE(changes[2].before.has_value());
    CHECK_FALSE(changes[2].total_change_pct.has_value());
}

TEST_CASE("regions new in the second report stay inside their parent's subtree") {
    std::vector<RegionStats> before{{"root", "", 0, 1, 2.0, 1.0},
                                    {"pcg", "root", 1, 1, 1.0, 0.5},
                                    {"dot", "pcg", 2, 3, 0.5, 0.25},
                                    {"tail", "root", 1, 1, 0.5, 0.25}};
    auto after = before;
    after.push_back({"fused", "pcg", 2, 3, 0.1, 0.05});
    const auto changes = compare_reports(before, after);
    REQUIRE(changes.size() == 5);
    CHECK(changes[3].name == "fused");
    CHECK(changes[4].name == "tail");
}

TEST_CASE("scaling sweep shape") {
    const SimConfig cfg = tiny(2);
    const int saved = thread_count();

    const int one[] = {1};
    const auto single = scaling_sweep(cfg, one);
    std::set<std::string> regions;
    for (const auto& r : single) {
        CHECK(r.threads == 1);
        regions.insert(r.region);
    }
    CHECK(regions.size() == single.size());
    CHECK(regions.count("pcg") == 1);

    const int several[] = {1, 2, 3};
    const auto rows = scaling_sweep(cfg, several);
    CHECK(rows.size() == 3 * regions.size());
    CHECK(thread_count() == saved);

    std::ostringstream csv;
    write_scaling_csv(csv, rows);
    const std::string text = csv.str();
    CHECK(text.rfind("threads,region,seconds\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(rows.size()) + 1);

    const int bad[] = {2, 0};
    CHECK_THROWS_AS(scaling_sweep(cfg, bad), std::invalid_argument);
}

TEST_CASE("parallel dot gets faster with more threads" * doctest::skip(hardware_threads() < 8)) {
    const std::vector<double> x(1 << 24, 1.0), y(1 << 24, 0.5);
    auto time_dot = [&](int threads) {
        set_thread_count(threads);
        const auto t0 = std::chrono::steady_clock::now();
        double s = 0.0;
        for (int r = 0; r < 5; ++r) s += dot(x, y);
        const auto t1 = std::chrono::steady_clock::now();
        CHECK(s > 0.0);
        return std::chrono::duration<double>(t1 - t0).count();
    };
    const int saved = thread_count();
    const double t1 = time_dot(1);
    const double t8 = time_dot(8);
    set_thread_count(saved);
    CHECK(t8 < t1);
}

TEST_CASE("instrumenting a no-op region is cheap") {
    Profiler p;
    ProfilerInstall install(&p);
    const int calls = 100000;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < calls; ++i) ScopedRegion r("noop");
    const double per_call = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / calls;
    MESSAGE("profiler overhead per region: " << per_call * 1e9 << " ns");
    CHECK(p.stats().front().calls == static_cast<std::uint64_t>(calls));
}
