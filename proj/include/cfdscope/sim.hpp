#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "cfdscope/grid.hpp"
#include "cfdscope/precond.hpp"
#include "cfdscope/profiler.hpp"
#include "cfdscope/solver.hpp"
#include "cfdscope/sparse.hpp"

namespace cfdscope {

enum class Variant { baseline, optimized };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view text);

/// How the pressure Poisson operator treats the missing neighbour of a
/// wall-adjacent cell.
enum class PressureBoundary {
    /// Ghost pressure 0 outside the wall: the diagonal stays 6/h^2 and the
    /// operator is SPD.
    ghost_zero,
    /// Zero normal pressure gradient: the diagonal counts only existing
    /// neighbours. Consistent with no-penetration walls, so the projection
    /// removes the divergence of wall-adjacent cells as well. The operator
    /// is semi-definite with the constant vector as its null space.
    zero_gradient,
};

std::string_view to_string(PressureBoundary bc);
PressureBoundary parse_pressure_boundary(std::string_view text);

struct SimConfig {
    int n = 100;
    double h = 1.0;
    double dt = 0.4;
    double t_end = 6.0;
    double lid_accel = 1.0;
    double density = 1.0;
    double tol = 1e-6;
    int max_iter = 1000;
    PreconditionerKind preconditioner = PreconditionerKind::dic;
    Variant variant = Variant::baseline;
    PressureBoundary pressure_bc = PressureBoundary::zero_gradient;
    /// Start each pressure solve from the previous solution (optimized only).
    bool warm_start = false;
    /// Edge length, in faces, of the optimized advection tiles.
    int advection_tile = 8;
    /// Snapshot directory; empty disables output.
    std::optional<std::filesystem::path> output_dir;
    /// Record max |div| before and after every projection.
    bool record_divergence = false;

    /// Throws std::invalid_argument on the first invalid field.
    void validate() const;
    [[nodiscard]] int step_count() const;
    [[nodiscard]] GridSpec grid() const { return {n, h}; }
};

struct SimState {
    VelocityField vel;
    ScalarField p;
    double t = 0.0;
    int step = 0;

    /// Stationary medium under equal pressure: v = 0, p = 1.
    static SimState initial(const GridSpec& spec);
};

// ---------------------------------------------------------------------------
// Substeps

/// Moving lid: u faces in the top cell layer (j = n-1), excluding the
/// x-wall faces, receive u += g dt.
void apply_forces(VelocityField& vel, const SimConfig& cfg);

/// Zeroes every wall-normal face on the six walls.
void enforce_boundaries(VelocityField& vel);

/// Semi-Lagrangian advection with a single explicit Euler backtrace from
/// every face. Wall-normal wall faces stay 0. The optimized variant visits
/// faces in cubic tiles and produces bitwise-identical values.
VelocityField solve_advection(const VelocityField& vel, double dt, Variant variant = Variant::baseline,
                              int tile = 8);

/// 7-point negative Laplacian over the cell grid, i-fastest row order.
CsrMatrix assemble_laplacian(const GridSpec& spec, PressureBoundary bc);
/// Same operator as diagonal + strict upper triangle, built directly.
SymCsrMatrix assemble_laplacian_symmetric(const GridSpec& spec, PressureBoundary bc);
/// Rewrites the values of a pattern produced by assemble_laplacian_symmetric.
void refresh_laplacian_values(SymCsrMatrix& a, const GridSpec& spec, PressureBoundary bc);

/// b = -(rho/dt) div(vel).
DenseVector pressure_rhs(const VelocityField& vel, double dt, double density);

/// Pressure Poisson system for one step. The baseline rebuilds the full CSR
/// matrix every call; the optimized variant assembles the symmetric pattern
/// once and only refreshes values afterwards.
class PressureSystem {
public:
    void assemble(const SimState& state, const SimConfig& cfg);

    [[nodiscard]] Variant variant() const { return variant_; }
    [[nodiscard]] const CsrMatrix& full() const { return full_; }
    [[nodiscard]] const SymCsrMatrix& symmetric() const { return sym_; }
    [[nodiscard]] const DenseVector& rhs() const { return rhs_; }
    [[nodiscard]] LinearOperator op() const;
    [[nodiscard]] Preconditioner make_preconditioner(PreconditionerKind kind) const;
    [[nodiscard]] int pattern_builds() const { return pattern_builds_; }

private:
    Variant variant_ = Variant::baseline;
    GridSpec spec_{};
    PressureBoundary bc_ = PressureBoundary::zero_gradient;
    bool has_pattern_ = false;
    int pattern_builds_ = 0;
    CsrMatrix full_;
    SymCsrMatrix sym_;
    DenseVector rhs_;
};

/// Assembles and solves the pressure system, overwrites state.p with the
/// solution and returns it. Non-convergence is logged; the last iterate is
/// kept.
ScalarField solve_pressure_correction(SimState& state, const SimConfig& cfg, PressureSystem& system,
                                      SolveStats* stats = nullptr);

/// u -= (dt/rho) dp/dx on interior faces (likewise v, w), then walls are
/// re-zeroed.
void apply_pressure_correction(VelocityField& vel, const ScalarField& p, const SimConfig& cfg);

/// Circulation of the cell-centered (u, v) around the square loop of cell
/// centers [lo, hi]^2 in the mid-z slice (k = n/2), traversed clockwise so
/// that the top edge runs in +x.
double lid_circulation(const VelocityField& vel, int lo, int hi);
/// Outermost centered loop (lo = 0, hi = n-1). It encloses the shear layer
/// under the lid, so its sign follows the lid direction from the first step
/// on; smaller loops only turn positive once the vortex has spun up.
double lid_circulation(const VelocityField& vel);

// ---------------------------------------------------------------------------
// Time loop

struct StepRecord {
    int step = 0;
    SolveStats solve;
    double div_before = 0.0;  // only filled with record_divergence
    double div_after = 0.0;
};

class Simulation {
public:
    explicit Simulation(SimConfig cfg);

    /// forces -> walls -> advection -> walls -> projection -> walls.
    void step();

    [[nodiscard]] const SimConfig& config() const { return cfg_; }
    [[nodiscard]] const SimState& state() const { return state_; }
    [[nodiscard]] SimState& state() { return state_; }
    [[nodiscard]] const std::vector<StepRecord>& history() const { return history_; }
    [[nodiscard]] const PressureSystem& pressure_system() const { return system_; }

private:
    SimConfig cfg_;
    SimState state_;
    PressureSystem system_;
    std::vector<StepRecord> history_;
};

struct RunResult {
    SimState state;
    std::vector<StepRecord> history;
    int snapshots_written = 0;
    std::vector<bench::RegionStats> regions;  // empty unless profiled
};

std::filesystem::path snapshot_path(const std::filesystem::path& dir, int step);

/// Initial state, snapshot 0, then round(t_end/dt) steps with a snapshot
/// after each. With a profiler the whole run is timed under the root region
/// "cfdscope".
RunResult run(const SimConfig& cfg, bench::Profiler* profiler = nullptr);

}  // namespace cfdscope
