#include "cfdscope/solver.hpp"

#include <fmt/format.h>

#include <cmath>
#include <utility>

#include "cfdscope/profiler.hpp"

namespace cfdscope {

LinearOperator as_operator(const CsrMatrix& a) {
    return [&a](std::span<const double> x, std::span<double> y) { spmv(a, x, y); };
}

LinearOperator as_operator(const SymCsrMatrix& a) {
    return [&a](std::span<const double> x, std::span<double> y) { spmv_sym(a, x, y); };
}

namespace {

void check_curvature(double pap, int iteration) {
    if (!(pap > 0.0) || !std::isfinite(pap))
        throw SolverBreakdown(
            fmt::format("PCG breakdown at iteration {}: p^T A p = {} (operator not positive definite)", iteration, pap));
}

// Baseline loop: every update goes through the allocating add/scale kernels
// and dot products run on one thread.
SolveResult pcg_allocating(const LinearOperator& apply_a, std::span<const double> b, std::span<const double> x0,
                           const Preconditioner& precond, const PcgOptions& opt, double b_norm) {
    const std::size_t n = b.size();
    SolveResult result;
    DenseVector x(x0.begin(), x0.end());

    DenseVector ax(n);
    apply_a(x, ax);
    DenseVector r = add(b, scale(-1.0, ax));
    double r_norm = std::sqrt(dot_serial(r, r));
    result.stats.final_residual_rel = r_norm / b_norm;
    if (r_norm <= opt.tol * b_norm) {
        result.stats.converged = true;
        result.x = std::move(x);
        return result;
    }

    DenseVector z = precond.apply(r);
    DenseVector p = z;
    double rz = dot_serial(r, z);

    for (int it = 1; it <= opt.max_iter; ++it) {
        DenseVector ap(n);
        apply_a(p, ap);
        const double pap = dot_serial(p, ap);
        check_curvature(pap, it);
        const double alpha = rz / pap;

        x = add(x, scale(alpha, p));
        r = add(r, scale(-alpha, ap));
        r_norm = std::sqrt(dot_serial(r, r));
        result.stats.iterations = it;
        result.stats.final_residual_rel = r_norm / b_norm;
        if (r_norm <= opt.tol * b_norm) {
            result.stats.converged = true;
            break;
        }

        z = precond.apply(r);
        const double rz_next = dot_serial(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        p = add(z, scale(beta, p));
    }
    result.x = std::move(x);
    return result;
}

// Optimized loop: work vectors are allocated once, updates are fused
// multiply-adds in place and dot products are parallel reductions.
SolveResult pcg_fused(const LinearOperator& apply_a, std::span<const double> b, std::span<const double> x0,
                      const Preconditioner& precond, const PcgOptions& opt, double b_norm) {
    const std::size_t n = b.size();
    SolveResult result;
    DenseVector x(x0.begin(), x0.end());
    DenseVector r(b.begin(), b.end());
    DenseVector ap(n), z(n), p(n), next(n);

    apply_a(x, ap);
    multiply_add_inplace(r, -1.0, ap);
    double r_norm = std::sqrt(dot(r, r));
    result.stats.final_residual_rel = r_norm / b_norm;
    if (r_norm <= opt.tol * b_norm) {
        result.stats.converged = true;
        result.x = std::move(x);
        return result;
    }

    precond.apply(r, z);
    p = z;
    double rz = dot(r, z);

    for (int it = 1; it <= opt.max_iter; ++it) {
        apply_a(p, ap);
        const double pap = dot(p, ap);
        check_curvature(pap, it);
        const double alpha = rz / pap;

        multiply_add_inplace(x, alpha, p);
        multiply_add_inplace(r, -alpha, ap);
        r_norm = std::sqrt(dot(r, r));
        result.stats.iterations = it;
        result.stats.final_residual_rel = r_norm / b_norm;
        if (r_norm <= opt.tol * b_norm) {
            result.stats.converged = true;
            break;
        }

        precond.apply(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        // p <- z + beta p
        std::copy(z.begin(), z.end(), next.begin());
        multiply_add_inplace(next, beta, p);
        std::swap(p, next);
    }
    result.x = std::move(x);
    return result;
}

}  // namespace

SolveResult pcg(const LinearOperator& apply_a, std::span<const double> b, std::span<const double> x0,
                const Preconditioner& precond, const PcgOptions& options) {
    bench::ScopedRegion region("pcg");
    if (x0.size() != b.size())
        throw DimensionError(fmt::format("pcg: x0 has length {}, b has {}", x0.size(), b.size()));
    if (precond.size() != b.size())
        throw DimensionError(fmt::format("pcg: preconditioner size {} != system size {}", precond.size(), b.size()));
    if (!(options.tol > 0.0)) throw std::invalid_argument("pcg: tolerance must be positive");
    if (options.max_iter < 1) throw std::invalid_argument("pcg: max_iter must be at least 1");

    const double b_norm = options.kernels == KernelSet::fused ? std::sqrt(dot(b, b)) : std::sqrt(dot_serial(b, b));
    if (b_norm == 0.0) {
        // A x = 0 has the exact solution 0 for an SPD operator.
        SolveResult result;
        result.x.assign(b.size(), 0.0);
        result.stats.converged = true;
        return result;
    }
    if (options.kernels == KernelSet::fused) return pcg_fused(apply_a, b, x0, precond, options, b_norm);
    return pcg_allocating(apply_a, b, x0, precond, options, b_norm);
}

}  // namespace cfdscope
