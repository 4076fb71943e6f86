#include "cfdscope/sim.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "cfdscope/io.hpp"

namespace cfdscope {

using bench::ScopedRegion;

std::string_view to_string(Variant variant) { return variant == Variant::baseline ? "baseline" : "optimized"; }

Variant parse_variant(std::string_view text) {
    if (text == "baseline") return Variant::baseline;
    if (text == "optimized") return Variant::optimized;
    throw std::invalid_argument(fmt::format("unknown variant '{}' (expected baseline or optimized)", text));
}

std::string_view to_string(PressureBoundary bc) {
    return bc == PressureBoundary::ghost_zero ? "ghost-zero" : "zero-gradient";
}

PressureBoundary parse_pressure_boundary(std::string_view text) {
    if (text == "ghost-zero") return PressureBoundary::ghost_zero;
    if (text == "zero-gradient") return PressureBoundary::zero_gradient;
    throw std::invalid_argument(
        fmt::format("unknown pressure boundary '{}' (expected ghost-zero or zero-gradient)", text));
}

void SimConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (n < 2) fail(fmt::format("grid size must be at least 2 (got {})", n));
    if (!(h > 0.0) || !std::isfinite(h)) fail("cell size must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(fmt::format("time step must be positive (got {})", dt));
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail(fmt::format("end time must be >= 0 (got {})", t_end));
    if (!(density > 0.0) || !std::isfinite(density)) fail(fmt::format("density must be positive (got {})", density));
    if (!std::isfinite(lid_accel)) fail("lid acceleration must be finite");
    if (!(tol > 0.0)) fail(fmt::format("solver tolerance must be positive (got {})", tol));
    if (max_iter < 1) fail(fmt::format("solver iteration limit must be >= 1 (got {})", max_iter));
    if (advection_tile < 1) fail("advection tile size must be >= 1");
    if (t_end / dt > 1e9) fail("too many time steps");
}

int SimConfig::step_count() const { return static_cast<int>(std::lround(t_end / dt)); }

SimState SimState::initial(const GridSpec& spec) {
    SimState s;
    s.vel = VelocityField(spec);
    s.p = ScalarField(spec, 1.0);
    return s;
}

void apply_forces(VelocityField& vel, const SimConfig& cfg) {
    ScopedRegion region("applyForces");
    const int n = vel.spec().n;
    const double offset = cfg.lid_accel * cfg.dt;
    const int j = n - 1;
    for (int k = 0; k < n; ++k)
        for (int i = 1; i < n; ++i) vel.at(Axis::x, i, j, k) += offset;
}

void enforce_boundaries(VelocityField& vel) {
    const int n = vel.spec().n;
    for (int b = 0; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
            vel.at(Axis::x, 0, a, b) = 0.0;
            vel.at(Axis::x, n, a, b) = 0.0;
            vel.at(Axis::y, a, 0, b) = 0.0;
            vel.at(Axis::y, a, n, b) = 0.0;
            vel.at(Axis::z, a, b, 0) = 0.0;
            vel.at(Axis::z, a, b, n) = 0.0;
        }
    }
}

namespace {

inline bool finite3(const Vec3& v) { return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]); }

// One face of the semi-Lagrangian update. Returns false on a non-finite
// backtrace so the caller can report it outside the parallel region.
inline bool advect_face(const VelocityField& vel, VelocityField& out, Axis a, int i, int j, int k, double dt,
                        double length, bool full_sample) {
    const int ax = static_cast<int>(a);
    const int idx[3] = {i, j, k};
    const int n = vel.spec().n;
    double& target = out.at(a, i, j, k);
    if (idx[ax] == 0 || idx[ax] == n) {
        target = 0.0;
        return true;
    }
    const Vec3 xf = vel.face_position(a, i, j, k);
    const Vec3 vf{sample_component(vel, Axis::x, xf), sample_component(vel, Axis::y, xf),
                  sample_component(vel, Axis::z, xf)};
    Vec3 xb;
    for (int d = 0; d < 3; ++d) xb[d] = std::clamp(xf[d] - dt * vf[d], 0.0, length);
    if (!finite3(vf) || !finite3(xb)) return false;
    target = full_sample ? sample_velocity(vel, xb)[ax] : sample_component(vel, a, xb);
    return true;
}

}  // namespace

VelocityField solve_advection(const VelocityField& vel, double dt, Variant variant, int tile) {
    ScopedRegion region("solveAdvection");
    const GridSpec& spec = vel.spec();
    const double length = spec.length();
    VelocityField out(spec);
    std::atomic<bool> corrupted{false};

    for (int a = 0; a < 3; ++a) {
        const Axis axis = static_cast<Axis>(a);
        const auto ext = face_extents(spec, axis);

        if (variant == Variant::baseline) {
#pragma omp parallel for schedule(static)
            for (int k = 0; k < ext[2]; ++k)
                for (int j = 0; j < ext[1]; ++j)
                    for (int i = 0; i < ext[0]; ++i)
                        if (!advect_face(vel, out, axis, i, j, k, dt, length, true)) corrupted = true;
        } else {
            const int t = std::max(1, tile);
            const int tiles_x = (ext[0] + t - 1) / t;
            const int tiles_y = (ext[1] + t - 1) / t;
            const int tiles_z = (ext[2] + t - 1) / t;
#pragma omp parallel for collapse(3) schedule(dynamic)
            for (int tz = 0; tz < tiles_z; ++tz)
                for (int ty = 0; ty < tiles_y; ++ty)
                    for (int tx = 0; tx < tiles_x; ++tx) {
                        const int k_end = std::min(ext[2], (tz + 1) * t);
                        const int j_end = std::min(ext[1], (ty + 1) * t);
                        const int i_end = std::min(ext[0], (tx + 1) * t);
                        for (int k = tz * t; k < k_end; ++k)
                            for (int j = ty * t; j < j_end; ++j)
                                for (int i = tx * t; i < i_end; ++i)
                                    if (!advect_face(vel, out, axis, i, j, k, dt, length, false)) corrupted = true;
                    }
        }
    }
    if (corrupted) throw std::domain_error("non-finite velocity during advection; the simulation has diverged");
    return out;
}

double lid_circulation(const VelocityField& vel, int lo, int hi) {
    const int n = vel.spec().n;
    if (lo < 0 || hi >= n || lo >= hi) throw std::invalid_argument("circulation loop must satisfy 0 <= lo < hi < n");
    const int k = n / 2;
    auto uc = [&](int i, int j) { return 0.5 * (vel.at(Axis::x, i, j, k) + vel.at(Axis::x, i + 1, j, k)); };
    auto vc = [&](int i, int j) { return 0.5 * (vel.at(Axis::y, i, j, k) + vel.at(Axis::y, i, j + 1, k)); };
    double sum = 0.0;
    for (int i = lo; i < hi; ++i) {
        sum += 0.5 * (uc(i, hi) + uc(i + 1, hi));  // top, +x
        sum -= 0.5 * (uc(i, lo) + uc(i + 1, lo));  // bottom, -x
    }
    for (int j = lo; j < hi; ++j) {
        sum -= 0.5 * (vc(hi, j) + vc(hi, j + 1));  // right, -y
        sum += 0.5 * (vc(lo, j) + vc(lo, j + 1));  // left, +y
    }
    return sum * vel.spec().h;
}

double lid_circulation(const VelocityField& vel) {
    return lid_circulation(vel, 0, vel.spec().n - 1);
}

// ---------------------------------------------------------------------------

Simulation::Simulation(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    state_ = SimState::initial(cfg_.grid());
}

void Simulation::step() {
    StepRecord rec;
    rec.step = state_.step + 1;

    apply_forces(state_.vel, cfg_);
    enforce_boundaries(state_.vel);

    state_.vel = solve_advection(state_.vel, cfg_.dt, cfg_.variant, cfg_.advection_tile);
    enforce_boundaries(state_.vel);

    if (cfg_.record_divergence) rec.div_before = max_abs(divergence(state_.vel));
    const ScalarField& p = solve_pressure_correction(state_, cfg_, system_, &rec.solve);
    apply_pressure_correction(state_.vel, p, cfg_);
    if (cfg_.record_divergence) rec.div_after = max_abs(divergence(state_.vel));

    state_.t += cfg_.dt;
    state_.step += 1;
    spdlog::debug("step {} t={:.3f}: pcg {} iterations, residual {:.3e}", state_.step, state_.t, rec.solve.iterations,
                  rec.solve.final_residual_rel);
    history_.push_back(rec);
}

std::filesystem::path snapshot_path(const std::filesystem::path& dir, int step) {
    return dir / fmt::format("snapshot_{:04d}.csv", step);
}

namespace {

void write_step(const SimState& state, const SimConfig& cfg, int& written) {
    if (!cfg.output_dir) return;
    ScopedRegion region("write_to_file");
    const WriteMode mode = cfg.variant == Variant::baseline ? WriteMode::serial : WriteMode::buffered_parallel;
    write_snapshot(state, snapshot_path(*cfg.output_dir, state.step), mode);
    ++written;
}

}  // namespace

RunResult run(const SimConfig& cfg, bench::Profiler* profiler) {
    cfg.validate();
    if (cfg.output_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*cfg.output_dir, ec);
        if (ec || !std::filesystem::is_directory(*cfg.output_dir))
            throw std::runtime_error(fmt::format("cannot create output directory '{}': {}", cfg.output_dir->string(),
                                                 ec ? ec.message() : "not a directory"));
    }

    bench::ProfilerInstall install(profiler ? profiler : bench::active_profiler());
    RunResult result;
    {
        ScopedRegion root("cfdscope");
        Simulation sim(cfg);
        write_step(sim.state(), cfg, result.snapshots_written);
        const int steps = cfg.step_count();
        for (int s = 0; s < steps; ++s) {
            sim.step();
            write_step(sim.state(), cfg, result.snapshots_written);
        }
        result.state = sim.state();
        result.history = sim.history();
    }
    if (profiler) result.regions = profiler->stats();
    return result;
}

}  // namespace cfdscope
