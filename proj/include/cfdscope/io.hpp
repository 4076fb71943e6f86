#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cfdscope/grid.hpp"

namespace cfdscope {

struct SimState;

enum class WriteMode { serial, buffered_parallel };

/// Per-cell row: center position, face-averaged velocity, pressure.
struct SnapshotRow {
    double x, y, z, u, v, w, p;
};

struct Snapshot {
    GridSpec spec;
    std::vector<SnapshotRow> rows;  // cell_index order

    static constexpr std::string_view header = "x,y,z,u,v,w,p";
    static constexpr std::size_t column_count = 7;
    static constexpr std::string_view column_names[column_count] = {"x", "y", "z", "u", "v", "w", "p"};

    static Snapshot from_state(const SimState& state);
};

/// Thrown by read_snapshot; carries the 1-based line number (0 when the
/// error is about the file as a whole).
class SnapshotFormatError : public std::runtime_error {
public:
    SnapshotFormatError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// Full CSV file contents. Both modes return identical bytes; the buffered
/// mode formats contiguous row chunks in thread-local buffers and joins them
/// in chunk order.
std::string format_snapshot(const SimState& state, WriteMode mode);

/// Throws std::runtime_error naming the path when the file cannot be
/// written. Serial mode streams row by row; buffered mode issues one write.
void write_snapshot(const SimState& state, const std::filesystem::path& path, WriteMode mode);

Snapshot parse_snapshot(std::string_view text);
Snapshot read_snapshot(const std::filesystem::path& path);

struct SnapshotComparison {
    double max_abs_diff[Snapshot::column_count] = {};
    bool pass = true;
    double tolerance = 0.0;
    /// Columns whose max diff exceeds the tolerance.
    std::vector<std::string> failing_columns;
};

/// Throws std::invalid_argument when the grids differ.
SnapshotComparison compare_snapshots(const Snapshot& a, const Snapshot& b, double abs_tol);

}  // namespace cfdscope
