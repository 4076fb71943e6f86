#include "cfdscope/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>

#include "cfdscope/parallel.hpp"
#include "cfdscope/profiler.hpp"
#include "cfdscope/scaling.hpp"

namespace cfdscope::cli {

namespace {

int parse_thread_env(const char* text) {
    try {
        std::size_t used = 0;
        const int value = std::stoi(text, &used);
        if (used != std::string(text).size() || value < 1) throw std::invalid_argument("range");
        return value;
    } catch (const std::exception&) {
        throw UsageError(fmt::format("{} must be a positive integer (got '{}')", threads_env_var, text));
    }
}

void install_stderr_logger() {
    static const bool installed = [] {
        auto logger = spdlog::stderr_color_mt("cfdscope");
        spdlog::set_default_logger(logger);
        return true;
    }();
    (void)installed;
}

}  // namespace

CliArgs parse_args(const std::vector<std::string>& argv) {
    CliArgs args;
    SimConfig& sim = args.sim;
    std::string preconditioner = "dic";
    std::string variant = "baseline";
    std::string pressure_bc = std::string(to_string(sim.pressure_bc));
    int threads = 0;

    CLI::App app{"Lid-driven cavity flow mini-app with baseline and optimized code paths"};
    app.name(argv.empty() ? "cfdscope" : argv.front());
    app.add_option("-n,--size", sim.n, "Cells per side of the cubic domain")->capture_default_str();
    app.add_option("--dt", sim.dt, "Time step [s]")->capture_default_str();
    app.add_option("--end-time", sim.t_end, "Simulated time [s]")->capture_default_str();
    app.add_option("--lid-accel", sim.lid_accel, "Lid acceleration g added to top-layer u faces")->capture_default_str();
    app.add_option("--density", sim.density, "Fluid density")->capture_default_str();
    app.add_option("--tol", sim.tol, "PCG relative residual tolerance")->capture_default_str();
    app.add_option("--max-iters", sim.max_iter, "PCG iteration limit")->capture_default_str();
    app.add_option("--preconditioner", preconditioner, "dic | jacobi")->capture_default_str();
    app.add_option("--variant", variant, "baseline | optimized")->capture_default_str();
    app.add_option("--pressure-bc", pressure_bc, "zero-gradient | ghost-zero")->capture_default_str();
    app.add_flag("--warm-start", sim.warm_start, "Start pressure solves from the previous pressure (optimized only)");
    app.add_option("--advection-tile", sim.advection_tile, "Tile edge for blocked advection (optimized only)")
        ->capture_default_str();
    auto* threads_opt = app.add_option("--threads", threads, fmt::format("Worker threads (overrides {})", threads_env_var));
    app.add_option("-o,--output-dir", args.output_dir, "Snapshot directory")->capture_default_str();
    app.add_flag("--no-output", args.no_output, "Do not write snapshots");
    app.add_flag("--profile", args.profile, "Print the hotspot report after the run");
    app.add_option("--report-out", args.report_out, "Write the hotspot report as CSV");
    app.add_option("--compare-report", args.compare_report, "Compare this run's report against a saved report CSV");
    app.add_option("--scaling-sweep", args.scaling_sweep, "Comma-separated thread counts for a strong-scaling sweep")
        ->delimiter(',');
    app.add_option("--scaling-out", args.scaling_out, "Scaling CSV destination (default: stdout)");
    app.add_option("--log-level", args.log_level, "trace | debug | info | warn | error | off")->capture_default_str();

    std::vector<const char*> raw;
    raw.reserve(argv.size());
    for (const auto& a : argv) raw.push_back(a.c_str());
    if (raw.empty()) raw.push_back("cfdscope");
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested(app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    try {
        sim.preconditioner = parse_preconditioner(preconditioner);
        sim.variant = parse_variant(variant);
        sim.pressure_bc = parse_pressure_boundary(pressure_bc);
        sim.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (spdlog::level::from_str(args.log_level) == spdlog::level::off && args.log_level != "off")
        throw UsageError(fmt::format("unknown log level '{}'", args.log_level));

    if (threads_opt->count() > 0) {
        if (threads < 1) throw UsageError(fmt::format("--threads must be >= 1 (got {})", threads));
        args.threads = threads;
    } else if (const char* env = std::getenv(threads_env_var); env && *env) {
        args.threads = parse_thread_env(env);
    }
    for (int t : args.scaling_sweep)
        if (t < 1) throw UsageError(fmt::format("--scaling-sweep thread counts must be >= 1 (got {})", t));

    if (!args.no_output) sim.output_dir = args.output_dir;
    return args;
}

int run_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CliArgs args;
    try {
        args = parse_args(argv);
    } catch (const HelpRequested& help) {
        out << help.what();
        return 0;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    try {
        install_stderr_logger();
        spdlog::set_level(spdlog::level::from_str(args.log_level));
        if (args.threads) set_thread_count(*args.threads);

        const SimConfig& cfg = args.sim;
        if (!args.scaling_sweep.empty()) {
            const auto rows = bench::scaling_sweep(cfg, args.scaling_sweep);
            if (args.scaling_out) {
                std::ofstream file(*args.scaling_out);
                if (!file) throw std::runtime_error(fmt::format("cannot write '{}'", args.scaling_out->string()));
                bench::write_scaling_csv(file, rows);
            } else {
                bench::write_scaling_csv(out, rows);
            }
            return 0;
        }

        spdlog::info("n={} dt={} t_end={} steps={} variant={} preconditioner={} threads={}", cfg.n, cfg.dt, cfg.t_end,
                     cfg.step_count(), to_string(cfg.variant), to_string(cfg.preconditioner), thread_count());

        const bool profiling = args.profile || args.report_out || args.compare_report;
        bench::Profiler profiler;
        const RunResult result = run(cfg, profiling ? &profiler : nullptr);

        long total_iterations = 0;
        for (const auto& rec : result.history) total_iterations += rec.solve.iterations;
        out << fmt::format("completed {} steps (t = {:g} s), {} PCG iterations, {} snapshots written\n",
                           result.state.step, result.state.t, total_iterations, result.snapshots_written);

        if (args.profile) bench::print_report(out, result.regions);
        if (args.report_out) bench::write_report_csv(*args.report_out, result.regions);
        if (args.compare_report) {
            const auto before = bench::read_report_csv(*args.compare_report);
            bench::print_comparison(out, bench::compare_reports(before, result.regions));
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace cfdscope::cli
