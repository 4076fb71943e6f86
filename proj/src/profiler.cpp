#include "cfdscope/profiler.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace cfdscope::bench {

namespace {
thread_local Profiler* current_profiler = nullptr;
}

Profiler* active_profiler() { return current_profiler; }

ProfilerInstall::ProfilerInstall(Profiler* profiler) : previous_(current_profiler) {
    current_profiler = profiler;
}

ProfilerInstall::~ProfilerInstall() { current_profiler = previous_; }

Profiler::Profiler() { reset(); }

void Profiler::reset() {
    nodes_.clear();
    nodes_.emplace_back();  // sentinel root, never reported
    stack_.assign(1, 0);
}

void Profiler::enter(std::string_view name) {
    const std::size_t parent = stack_.back();
    std::size_t id;
    auto& siblings = nodes_[parent].by_name;
    if (auto it = siblings.find(name); it != siblings.end()) {
        id = it->second;
    } else {
        id = nodes_.size();
        Node node;
        node.name = std::string(name);
        node.parent = parent;
        nodes_.push_back(std::move(node));
        nodes_[parent].children.push_back(id);
        nodes_[parent].by_name.emplace(std::string(name), id);
    }
    stack_.push_back(id);
    nodes_[id].started = Clock::now();
}

void Profiler::exit(std::string_view name) {
    const auto now = Clock::now();
    if (stack_.size() <= 1)
        throw std::logic_error(fmt::format("profiler: exit of '{}' without matching enter", name));
    Node& node = nodes_[stack_.back()];
    if (node.name != name)
        throw std::logic_error(
            fmt::format("profiler: exit of '{}' while '{}' is the innermost open region", name, node.name));
    node.total += now - node.started;
    ++node.calls;
    stack_.pop_back();
}

std::vector<RegionStats> Profiler::stats() const {
    std::vector<RegionStats> out;
    double top_total = 0.0;
    for (std::size_t id : nodes_[0].children)
        top_total += std::chrono::duration<double>(nodes_[id].total).count();

    auto visit = [&](auto&& self, std::size_t id, int depth) -> void {
        const Node& node = nodes_[id];
        RegionStats row;
        row.name = node.name;
        row.parent = node.parent == 0 ? std::string{} : nodes_[node.parent].name;
        row.depth = depth;
        row.calls = node.calls;
        row.inclusive_seconds = std::chrono::duration<double>(node.total).count();
        row.fraction = top_total > 0.0 ? row.inclusive_seconds / top_total : 0.0;
        out.push_back(std::move(row));
        for (std::size_t child : node.children) self(self, child, depth + 1);
    };
    for (std::size_t id : nodes_[0].children) visit(visit, id, 0);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Box-drawing prefix for row `idx`, derived from depths alone.
std::string tree_prefix(const std::vector<int>& depths, std::size_t idx) {
    const int depth = depths[idx];
    if (depth == 0) return {};
    auto has_later_sibling = [&](std::size_t row, int d) {
        for (std::size_t k = row + 1; k < depths.size(); ++k) {
            if (depths[k] < d) return false;
            if (depths[k] == d) return true;
        }
        return false;
    };
    std::string prefix;
    for (int d = 1; d < depth; ++d) {
        // Ancestor at depth d of this row: walk back to the last row of that depth.
        std::size_t anc = idx;
        while (depths[anc] != d) --anc;
        prefix += has_later_sibling(anc, d) ? "│  " : "   ";
    }
    prefix += has_later_sibling(idx, depth) ? "├─ " : "└─ ";
    return prefix;
}

std::vector<int> depths_of(const std::vector<RegionStats>& stats) {
    std::vector<int> d;
    d.reserve(stats.size());
    for (const auto& s : stats) d.push_back(s.depth);
    return d;
}

// Display width of a UTF-8 string (box drawing characters are one column).
std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++w;
    return w;
}

std::string pad_right(const std::string& s, std::size_t width) {
    const std::size_t w = display_width(s);
    return w >= width ? s : s + std::string(width - w, ' ');
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string fmt_pct(const std::optional<double>& v) { return v ? fmt::format("{:+.2f}", *v) : "-"; }

}  // namespace

void print_report(std::ostream& out, const std::vector<RegionStats>& stats) {
    const auto depths = depths_of(stats);
    std::vector<std::string> labels;
    std::size_t width = 4;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        labels.push_back(tree_prefix(depths, i) + stats[i].name);
        width = std::max(width, display_width(labels.back()));
    }
    out << pad_right("Name", width) << fmt::format(" {:>10} {:>16} {:>10}\n", "Calls", "InclusiveSeconds", "Fraction");
    for (std::size_t i = 0; i < stats.size(); ++i) {
        out << pad_right(labels[i], width)
            << fmt::format(" {:>10} {:>16.6f} {:>9.2f}%\n", stats[i].calls, stats[i].inclusive_seconds,
                           100.0 * stats[i].fraction);
    }
}

void write_report_csv(std::ostream& out, const std::vector<RegionStats>& stats) {
    out << "name,parent,calls,inclusive_seconds,fraction\n";
    for (const auto& s : stats) {
        out << csv_field(s.name) << ',' << csv_field(s.parent) << ',' << s.calls << ','
            << fmt::format("{:.9g},{:.9g}", s.inclusive_seconds, s.fraction) << '\n';
    }
}

void write_report_csv(const std::filesystem::path& path, const std::vector<RegionStats>& stats) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error(fmt::format("cannot open report file '{}' for writing", path.string()));
    write_report_csv(file, stats);
    if (!file) throw std::runtime_error(fmt::format("failed writing report file '{}'", path.string()));
}

std::vector<RegionStats> read_report_csv(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error(fmt::format("cannot open report file '{}'", path.string()));
    std::string line;
    if (!std::getline(file, line) || line != "name,parent,calls,inclusive_seconds,fraction")
        throw std::runtime_error(fmt::format("'{}': not a region report (bad header)", path.string()));

    std::vector<RegionStats> stats;
    // Depth is reconstructed from the parent chain: the parent is the most
    // recent open row with that name.
    std::vector<std::pair<std::string, int>> open;
    std::size_t lineno = 1;
    while (std::getline(file, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5)
            throw std::runtime_error(fmt::format("'{}' line {}: expected 5 fields", path.string(), lineno));
        RegionStats s;
        s.name = f[0];
        s.parent = f[1];
        try {
            s.calls = std::stoull(f[2]);
            s.inclusive_seconds = std::stod(f[3]);
            s.fraction = std::stod(f[4]);
        } catch (const std::exception&) {
            throw std::runtime_error(fmt::format("'{}' line {}: unparsable number", path.string(), lineno));
        }
        if (s.parent.empty()) {
            open.clear();
            s.depth = 0;
        } else {
            while (!open.empty() && open.back().first != s.parent) open.pop_back();
            s.depth = open.empty() ? 0 : open.back().second + 1;
        }
        open.emplace_back(s.name, s.depth);
        stats.push_back(std::move(s));
    }
    return stats;
}

std::vector<RegionChange> compare_reports(const std::vector<RegionStats>& before,
                                          const std::vector<RegionStats>& after) {
    auto key = [](const RegionStats& s) { return s.parent + '\x1f' + s.name; };
    std::map<std::string, const RegionStats*> after_by_key;
    for (const auto& s : after) after_by_key.emplace(key(s), &s);

    std::vector<RegionChange> changes;
    std::map<std::string, bool> seen;
    auto finish = [](RegionChange& c) {
        if (c.before && c.after && c.before->inclusive_seconds > 0.0) {
            c.total_change_pct = 100.0 * (c.after->inclusive_seconds / c.before->inclusive_seconds - 1.0);
            if (c.before->calls > 0 && c.after->calls > 0) {
                const double per_before = c.before->inclusive_seconds / static_cast<double>(c.before->calls);
                const double per_after = c.after->inclusive_seconds / static_cast<double>(c.after->calls);
                c.per_call_change_pct = 100.0 * (per_after / per_before - 1.0);
            }
        }
    };
    for (const auto& s : before) {
        RegionChange c{s.name, s.parent, s.depth, s, std::nullopt, std::nullopt, std::nullopt};
        if (auto it = after_by_key.find(key(s)); it != after_by_key.end()) {
            c.after = *it->second;
            seen[key(s)] = true;
        }
        finish(c);
        changes.push_back(std::move(c));
    }
    for (const auto& s : after) {
        if (seen.count(key(s))) continue;
        // Last row of the parent's subtree, or the end for unknown parents.
        auto pos = changes.end();
        if (!s.parent.empty()) {
            for (auto it = changes.begin(); it != changes.end(); ++it) {
                if (it->name != s.parent || it->depth != s.depth - 1) continue;
                pos = std::next(it);
                while (pos != changes.end() && pos->depth > it->depth) ++pos;
            }
        }
        changes.insert(pos, {s.name, s.parent, s.depth, std::nullopt, s, std::nullopt, std::nullopt});
    }
    return changes;
}

void print_comparison(std::ostream& out, const std::vector<RegionChange>& changes) {
    std::vector<int> depths;
    for (const auto& c : changes) depths.push_back(c.depth);
    std::vector<std::string> labels;
    std::size_t width = 4;
    for (std::size_t i = 0; i < changes.size(); ++i) {
        labels.push_back(tree_prefix(depths, i) + changes[i].name);
        width = std::max(width, display_width(labels.back()));
    }
    auto side = [](const std::optional<RegionStats>& s) {
        return s ? fmt::format("{:>10} {:>12.4f}", s->calls, s->inclusive_seconds) : fmt::format("{:>10} {:>12}", "-", "-");
    };
    out << pad_right("Name", width)
        << fmt::format(" {:>10} {:>12} {:>10} {:>12} {:>9} {:>9}\n", "Calls(A)", "Incl(A)[s]", "Calls(B)",
                       "Incl(B)[s]", "Ttl[%]", "Call[%]");
    for (std::size_t i = 0; i < changes.size(); ++i) {
        const auto& c = changes[i];
        out << pad_right(labels[i], width) << ' ' << side(c.before) << ' ' << side(c.after)
            << fmt::format(" {:>9} {:>9}\n", fmt_pct(c.total_change_pct), fmt_pct(c.per_call_change_pct));
    }
}

}  // namespace cfdscope::bench
