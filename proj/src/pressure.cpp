#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <numeric>

#include "cfdscope/sim.hpp"

namespace cfdscope {

using bench::ScopedRegion;

namespace {

double diagonal_value(const GridSpec& spec, PressureBoundary bc, int i, int j, int k) {
    const double inv_h2 = 1.0 / (spec.h * spec.h);
    if (bc == PressureBoundary::ghost_zero) return 6.0 * inv_h2;
    const int n = spec.n;
    const int neighbours = (i > 0) + (i < n - 1) + (j > 0) + (j < n - 1) + (k > 0) + (k < n - 1);
    return neighbours * inv_h2;
}

}  // namespace

CsrMatrix assemble_laplacian(const GridSpec& spec, PressureBoundary bc) {
    const int n = spec.n;
    const std::size_t cells = spec.cell_count();
    const double off = -1.0 / (spec.h * spec.h);
    const auto nn = static_cast<std::size_t>(n);

    CsrMatrix a;
    a.n_rows = a.n_cols = cells;
    a.row_ptr.clear();
    a.row_ptr.push_back(0);
    // Entries appended per row; the baseline grows the arrays as it goes.
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const std::size_t c = cell_index(spec, i, j, k);
                auto push = [&](std::size_t col, double v) {
                    a.col_idx.push_back(col);
                    a.values.push_back(v);
                };
                if (k > 0) push(c - nn * nn, off);
                if (j > 0) push(c - nn, off);
                if (i > 0) push(c - 1, off);
                push(c, diagonal_value(spec, bc, i, j, k));
                if (i < n - 1) push(c + 1, off);
                if (j < n - 1) push(c + nn, off);
                if (k < n - 1) push(c + nn * nn, off);
                a.row_ptr.push_back(a.values.size());
            }
        }
    }
    return a;
}

SymCsrMatrix assemble_laplacian_symmetric(const GridSpec& spec, PressureBoundary bc) {
    const int n = spec.n;
    const std::size_t cells = spec.cell_count();
    const auto nn = static_cast<std::size_t>(n);

    SymCsrMatrix a;
    a.n = cells;
    a.diag.assign(cells, 0.0);
    a.row_ptr.assign(cells + 1, 0);
    // Upper neighbours only: +x, +y, +z.
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t c = cell_index(spec, i, j, k);
                a.row_ptr[c + 1] = a.row_ptr[c] + (i < n - 1) + (j < n - 1) + (k < n - 1);
            }
    a.col_idx.resize(a.row_ptr[cells]);
    a.values.resize(a.row_ptr[cells]);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t c = cell_index(spec, i, j, k);
                std::size_t p = a.row_ptr[c];
                if (i < n - 1) a.col_idx[p++] = c + 1;
                if (j < n - 1) a.col_idx[p++] = c + nn;
                if (k < n - 1) a.col_idx[p++] = c + nn * nn;
            }
    refresh_laplacian_values(a, spec, bc);
    return a;
}

void refresh_laplacian_values(SymCsrMatrix& a, const GridSpec& spec, PressureBoundary bc) {
    const int n = spec.n;
    const double off = -1.0 / (spec.h * spec.h);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t c = cell_index(spec, i, j, k);
                a.diag[c] = diagonal_value(spec, bc, i, j, k);
                for (std::size_t p = a.row_ptr[c]; p < a.row_ptr[c + 1]; ++p) a.values[p] = off;
            }
}

DenseVector pressure_rhs(const VelocityField& vel, double dt, double density) {
    ScalarField div = divergence(vel);
    DenseVector b = std::move(div.data());
    const double factor = -density / dt;
    for (double& x : b) x *= factor;
    return b;
}

void PressureSystem::assemble(const SimState& state, const SimConfig& cfg) {
    const GridSpec spec = state.vel.spec();
    variant_ = cfg.variant;
    if (variant_ == Variant::baseline) {
        full_ = assemble_laplacian(spec, cfg.pressure_bc);
        ++pattern_builds_;
    } else if (!has_pattern_ || !(spec_ == spec) || bc_ != cfg.pressure_bc) {
        sym_ = assemble_laplacian_symmetric(spec, cfg.pressure_bc);
        has_pattern_ = true;
        ++pattern_builds_;
    } else {
        refresh_laplacian_values(sym_, spec, cfg.pressure_bc);
    }
    spec_ = spec;
    bc_ = cfg.pressure_bc;

    rhs_ = pressure_rhs(state.vel, cfg.dt, cfg.density);
    if (bc_ == PressureBoundary::zero_gradient) {
        // The operator annihilates constants, so only zero-mean right-hand
        // sides are consistent. Walls carry no flux, which makes the exact
        // mean 0; this strips the rounding residue.
        const double mean = std::accumulate(rhs_.begin(), rhs_.end(), 0.0) / static_cast<double>(rhs_.size());
        for (double& x : rhs_) x -= mean;
    }
}

LinearOperator PressureSystem::op() const {
    if (variant_ == Variant::baseline) return as_operator(full_);
    return as_operator(sym_);
}

Preconditioner PressureSystem::make_preconditioner(PreconditionerKind kind) const {
    if (variant_ == Variant::baseline)
        return kind == PreconditionerKind::dic ? Preconditioner::dic(full_) : Preconditioner::jacobi(full_);
    return Preconditioner::make(kind, sym_);
}

ScalarField solve_pressure_correction(SimState& state, const SimConfig& cfg, PressureSystem& system,
                                      SolveStats* stats) {
    ScopedRegion region("solvePressureCorrection");
    system.assemble(state, cfg);
    const Preconditioner precond = system.make_preconditioner(cfg.preconditioner);

    const std::size_t cells = system.rhs().size();
    DenseVector x0(cells, 0.0);
    if (cfg.warm_start && cfg.variant == Variant::optimized) x0 = state.p.data();

    PcgOptions opt;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.kernels = cfg.variant == Variant::baseline ? KernelSet::allocating : KernelSet::fused;

    SolveResult res = pcg(system.op(), system.rhs(), x0, precond, opt);
    if (!res.stats.converged)
        spdlog::warn("pressure solve did not converge in {} iterations (relative residual {:.3e}); keeping last iterate",
                     res.stats.iterations, res.stats.final_residual_rel);
    if (stats) *stats = res.stats;
    state.p.data() = std::move(res.x);
    return state.p;
}

void apply_pressure_correction(VelocityField& vel, const ScalarField& p, const SimConfig& cfg) {
    ScopedRegion region("applyPressureCorrection");
    const GridSpec& spec = vel.spec();
    const int n = spec.n;
    const double factor = cfg.dt / (cfg.density * spec.h);
    const auto& pd = p.data();
    const auto nn = static_cast<std::size_t>(n);

#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const std::size_t c = cell_index(spec, i, j, k);
                // Lower faces of cell c; the wall faces (index 0) are reset below.
                if (i > 0) vel.at(Axis::x, i, j, k) -= factor * (pd[c] - pd[c - 1]);
                if (j > 0) vel.at(Axis::y, i, j, k) -= factor * (pd[c] - pd[c - nn]);
                if (k > 0) vel.at(Axis::z, i, j, k) -= factor * (pd[c] - pd[c - nn * nn]);
            }
        }
    }
    enforce_boundaries(vel);
}

}  // namespace cfdscope
