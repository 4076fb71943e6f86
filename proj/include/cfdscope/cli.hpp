#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cfdscope/sim.hpp"

namespace cfdscope::cli {

inline constexpr const char* threads_env_var = "CFDSCOPE_THREADS";

struct CliArgs {
    SimConfig sim;  // output_dir already resolved against --no-output
    std::optional<int> threads;
    std::filesystem::path output_dir = "output";
    bool no_output = false;
    bool profile = false;
    std::optional<std::filesystem::path> report_out;
    std::optional<std::filesystem::path> compare_report;
    std::vector<int> scaling_sweep;
    std::optional<std::filesystem::path> scaling_out;
    std::string log_level = "info";
};

/// Thrown for invalid command lines; carries the message to print.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when `--help` is requested; carries the usage text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// argv[0] is the program name. Throws UsageError or HelpRequested.
CliArgs parse_args(const std::vector<std::string>& argv);

/// Full program: 0 on success, 2 on usage errors, 1 on any other failure.
int run_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace cfdscope::cli
