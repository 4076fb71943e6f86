#include "cfdscope/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cfdscope/parallel.hpp"
#include "cfdscope/sim.hpp"

namespace cfdscope {

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

inline void append_double(std::string& out, double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, res.ptr);
}

SnapshotRow row_of(const SimState& state, int i, int j, int k) {
    const VelocityField& vel = state.vel;
    const Vec3 c = vel.spec().cell_center(i, j, k);
    return {c[0],
            c[1],
            c[2],
            0.5 * (vel.at(Axis::x, i, j, k) + vel.at(Axis::x, i + 1, j, k)),
            0.5 * (vel.at(Axis::y, i, j, k) + vel.at(Axis::y, i, j + 1, k)),
            0.5 * (vel.at(Axis::z, i, j, k) + vel.at(Axis::z, i, j, k + 1)),
            state.p.at(i, j, k)};
}

void append_row(std::string& out, const SnapshotRow& r) {
    append_double(out, r.x);
    out += ',';
    append_double(out, r.y);
    out += ',';
    append_double(out, r.z);
    out += ',';
    append_double(out, r.u);
    out += ',';
    append_double(out, r.v);
    out += ',';
    append_double(out, r.w);
    out += ',';
    append_double(out, r.p);
    out += '\n';
}

void append_cell(std::string& out, const SimState& state, std::size_t cell) {
    const int n = state.vel.spec().n;
    const auto nn = static_cast<std::size_t>(n);
    const int i = static_cast<int>(cell % nn);
    const int j = static_cast<int>((cell / nn) % nn);
    const int k = static_cast<int>(cell / (nn * nn));
    append_row(out, row_of(state, i, j, k));
}

std::string format_buffered(const SimState& state) {
    const std::size_t cells = state.vel.spec().cell_count();
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(cells, 4 * thread_count()));
    std::vector<std::string> buffers(chunks);
    const auto chunk_count = static_cast<std::ptrdiff_t>(chunks);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < chunk_count; ++c) {
        const std::size_t begin = cells * static_cast<std::size_t>(c) / chunks;
        const std::size_t end = cells * static_cast<std::size_t>(c + 1) / chunks;
        std::string& buf = buffers[c];
        buf.reserve((end - begin) * 64);
        for (std::size_t cell = begin; cell < end; ++cell) append_cell(buf, state, cell);
    }

    std::size_t total = Snapshot::header.size() + 1;
    for (const auto& b : buffers) total += b.size();
    std::string out;
    out.reserve(total);
    out.append(Snapshot::header);
    out += '\n';
    for (const auto& b : buffers) out += b;
    return out;
}

}  // namespace

Snapshot Snapshot::from_state(const SimState& state) {
    Snapshot s;
    s.spec = state.vel.spec();
    const int n = s.spec.n;
    s.rows.reserve(s.spec.cell_count());
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) s.rows.push_back(row_of(state, i, j, k));
    return s;
}

std::string format_snapshot(const SimState& state, WriteMode mode) {
    if (mode == WriteMode::buffered_parallel) return format_buffered(state);
    std::string out(Snapshot::header);
    out += '\n';
    const std::size_t cells = state.vel.spec().cell_count();
    for (std::size_t cell = 0; cell < cells; ++cell) append_cell(out, state, cell);
    return out;
}

void write_snapshot(const SimState& state, const std::filesystem::path& path, WriteMode mode) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error(fmt::format("cannot open snapshot file '{}' for writing", path.string()));

    if (mode == WriteMode::buffered_parallel) {
        const std::string text = format_buffered(state);
        file.write(text.data(), static_cast<std::streamsize>(text.size()));
    } else {
        file << Snapshot::header << '\n';
        const std::size_t cells = state.vel.spec().cell_count();
        std::string line;
        for (std::size_t cell = 0; cell < cells; ++cell) {
            line.clear();
            append_cell(line, state, cell);
            file << line;
        }
    }
    file.flush();
    if (!file) throw std::runtime_error(fmt::format("failed writing snapshot file '{}'", path.string()));
}

Snapshot parse_snapshot(std::string_view text) {
    std::size_t pos = 0;
    std::size_t lineno = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++lineno;
        return true;
    };

    std::string_view line;
    if (!next_line(line)) throw SnapshotFormatError("snapshot is empty", 1);
    if (line != Snapshot::header)
        throw SnapshotFormatError(
            fmt::format("line 1: expected header '{}', found '{}'", Snapshot::header, std::string(line)), 1);

    Snapshot snap;
    while (next_line(line)) {
        if (line.empty() && pos >= text.size()) break;
        double vals[Snapshot::column_count];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t c = 0; c < Snapshot::column_count; ++c) {
            const auto res = std::from_chars(p, end, vals[c]);
            if (res.ec != std::errc{})
                throw SnapshotFormatError(
                    fmt::format("line {}: cannot parse column '{}'", lineno, Snapshot::column_names[c]), lineno);
            p = res.ptr;
            if (c + 1 < Snapshot::column_count) {
                if (p == end || *p != ',')
                    throw SnapshotFormatError(fmt::format("line {}: expected {} columns", lineno, Snapshot::column_count),
                                              lineno);
                ++p;
            }
        }
        if (p != end)
            throw SnapshotFormatError(fmt::format("line {}: trailing characters after column 'p'", lineno), lineno);
        snap.rows.push_back({vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6]});
    }

    const std::size_t rows = snap.rows.size();
    if (rows == 0) throw SnapshotFormatError("snapshot has no data rows", 0);
    const auto n = static_cast<int>(std::lround(std::cbrt(static_cast<double>(rows))));
    if (static_cast<std::size_t>(n) * n * n != rows)
        throw SnapshotFormatError(fmt::format("snapshot has {} data rows, which is not a cube", rows), 0);
    const double h = 2.0 * snap.rows.front().x;
    if (!(h > 0.0)) throw SnapshotFormatError("line 2: first cell center must be positive", 2);
    snap.spec = GridSpec(n, h);
    return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error(fmt::format("cannot open snapshot file '{}'", path.string()));
    std::ostringstream ss;
    ss << file.rdbuf();
    try {
        return parse_snapshot(ss.str());
    } catch (const SnapshotFormatError& e) {
        throw SnapshotFormatError(fmt::format("{}: {}", path.string(), e.what()), e.line());
    }
}

SnapshotComparison compare_snapshots(const Snapshot& a, const Snapshot& b, double abs_tol) {
    if (!(a.spec == b.spec) || a.rows.size() != b.rows.size())
        throw std::invalid_argument(fmt::format("cannot compare snapshots of different grids (n={}, h={} vs n={}, h={})",
                                                a.spec.n, a.spec.h, b.spec.n, b.spec.h));
    SnapshotComparison cmp;
    cmp.tolerance = abs_tol;
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        const double da[] = {a.rows[r].x, a.rows[r].y, a.rows[r].z, a.rows[r].u, a.rows[r].v, a.rows[r].w, a.rows[r].p};
        const double db[] = {b.rows[r].x, b.rows[r].y, b.rows[r].z, b.rows[r].u, b.rows[r].v, b.rows[r].w, b.rows[r].p};
        for (std::size_t c = 0; c < Snapshot::column_count; ++c) {
            double d = std::abs(da[c] - db[c]);
            if (std::isnan(d)) d = std::numeric_limits<double>::infinity();
            cmp.max_abs_diff[c] = std::max(cmp.max_abs_diff[c], d);
        }
    }
    for (std::size_t c = 0; c < Snapshot::column_count; ++c) {
        if (!(cmp.max_abs_diff[c] <= abs_tol)) {
            cmp.pass = false;
            cmp.failing_columns.emplace_back(Snapshot::column_names[c]);
        }
    }
    return cmp;
}

}  // namespace cfdscope
