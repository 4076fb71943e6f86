#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cfdscope/sparse.hpp"

namespace cfdscope {

enum class PreconditionerKind { dic, jacobi };

std::string_view to_string(PreconditionerKind kind);
/// Accepts "dic" or "jacobi"; throws std::invalid_argument otherwise.
PreconditionerKind parse_preconditioner(std::string_view text);

/// Immutable after construction; safe to share read-only between threads.
///
/// Jacobi: z = D^{-1} r, parallel over indices.
///
/// DIC (simplified diagonal-based incomplete Cholesky): over the existing
/// sparsity pattern only, the modified diagonal is
///     d[i] = A[i,i] - sum_{j<i, A[i,j] != 0} A[i,j]^2 / d[j]
/// and M = (L + D)(D^{-1})(D + L^T), with L the strict lower triangle of A.
/// Applying M^{-1} is a forward sweep followed by a backward sweep, which
/// carry a loop dependency and therefore run on one thread.
class Preconditioner {
public:
    static Preconditioner jacobi(const CsrMatrix& a);
    static Preconditioner jacobi(const SymCsrMatrix& a);
    /// Input must be symmetric; throws if a modified diagonal entry is <= 0.
    static Preconditioner dic(const CsrMatrix& a);
    static Preconditioner dic(const SymCsrMatrix& a);
    static Preconditioner make(PreconditionerKind kind, const SymCsrMatrix& a);

    [[nodiscard]] PreconditionerKind kind() const { return kind_; }
    [[nodiscard]] std::size_t size() const { return inv_diag_.size(); }

    /// Jacobi: 1/A[i,i]. DIC: reciprocal of the modified diagonal.
    [[nodiscard]] const std::vector<double>& inverse_diagonal() const { return inv_diag_; }
    /// DIC only; empty for Jacobi.
    [[nodiscard]] const std::vector<double>& modified_diagonal() const { return dic_diag_; }

    /// z <- M^{-1} r. `r` and `z` must not alias.
    void apply(std::span<const double> r, std::span<double> z) const;
    /// Allocating form used by the baseline solver path.
    [[nodiscard]] DenseVector apply(std::span<const double> r) const;

private:
    Preconditioner() = default;

    PreconditionerKind kind_ = PreconditionerKind::jacobi;
    std::vector<double> inv_diag_;
    std::vector<double> dic_diag_;
    // Strict upper triangle (== L^T) for the DIC sweeps.
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

}  // namespace cfdscope
