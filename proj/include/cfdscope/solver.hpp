#pragma once

#include <functional>
#include <span>

#include "cfdscope/precond.hpp"
#include "cfdscope/sparse.hpp"

namespace cfdscope {

/// y <- A x for an SPD operator A. y is fully overwritten.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

LinearOperator as_operator(const CsrMatrix& a);
LinearOperator as_operator(const SymCsrMatrix& a);

/// Which vector kernels the solver loop uses.
enum class KernelSet {
    allocating,  // add/scale into fresh vectors, serial dot
    fused,       // preallocated work vectors, multiply_add_inplace, parallel dot
};

struct PcgOptions {
    double tol = 1e-6;  // on ||r||_2 / ||b||_2
    int max_iter = 1000;
    KernelSet kernels = KernelSet::fused;
};

struct SolveStats {
    int iterations = 0;
    double final_residual_rel = 0.0;
    bool converged = false;
};

struct SolveResult {
    DenseVector x;
    SolveStats stats;
};

/// Thrown when p^T A p <= 0, i.e. the operator is not positive definite.
class SolverBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Preconditioned conjugate gradient. The residual is updated by the
/// recurrence, never re-evaluated from A x. Hitting max_iter is reported
/// through stats.converged, not thrown.
SolveResult pcg(const LinearOperator& apply_a, std::span<const double> b, std::span<const double> x0,
                const Preconditioner& precond, const PcgOptions& options = {});

}  // namespace cfdscope
