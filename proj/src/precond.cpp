#include "cfdscope/precond.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

#include "cfdscope/profiler.hpp"

namespace cfdscope {

std::string_view to_string(PreconditionerKind kind) {
    return kind == PreconditionerKind::dic ? "dic" : "jacobi";
}

PreconditionerKind parse_preconditioner(std::string_view text) {
    if (text == "dic") return PreconditionerKind::dic;
    if (text == "jacobi") return PreconditionerKind::jacobi;
    throw std::invalid_argument(fmt::format("unknown preconditioner '{}' (expected dic or jacobi)", text));
}

namespace {

std::vector<double> reciprocal_diagonal(std::span<const double> diag) {
    std::vector<double> inv(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        if (diag[i] == 0.0)
            throw std::invalid_argument(fmt::format("Jacobi preconditioner: zero diagonal entry in row {}", i));
        inv[i] = 1.0 / diag[i];
        if (!std::isfinite(inv[i]))
            throw std::invalid_argument(fmt::format("Jacobi preconditioner: diagonal entry in row {} is not usable", i));
    }
    return inv;
}

}  // namespace

Preconditioner Preconditioner::jacobi(const CsrMatrix& a) {
    if (a.n_rows != a.n_cols) throw DimensionError("Jacobi preconditioner needs a square matrix");
    std::vector<double> diag(a.n_rows);
    for (std::size_t i = 0; i < a.n_rows; ++i) diag[i] = a.at(i, i);
    Preconditioner p;
    p.kind_ = PreconditionerKind::jacobi;
    p.inv_diag_ = reciprocal_diagonal(diag);
    return p;
}

Preconditioner Preconditioner::jacobi(const SymCsrMatrix& a) {
    Preconditioner p;
    p.kind_ = PreconditionerKind::jacobi;
    p.inv_diag_ = reciprocal_diagonal(a.diag);
    return p;
}

Preconditioner Preconditioner::dic(const CsrMatrix& a) { return dic(to_symmetric(a)); }

Preconditioner Preconditioner::dic(const SymCsrMatrix& a) {
    Preconditioner p;
    p.kind_ = PreconditionerKind::dic;
    p.row_ptr_ = a.row_ptr;
    p.col_idx_ = a.col_idx;
    p.values_ = a.values;
    p.dic_diag_ = a.diag;

    // Row i of L holds A[i,j] for j<i, i.e. the stored upper entries (j,i).
    // Scattering row i's upper entries after d[i] is final applies every
    // contribution before the target row is reached.
    auto& d = p.dic_diag_;
    for (std::size_t i = 0; i < a.n; ++i) {
        if (!(d[i] > 0.0) || !std::isfinite(d[i]))
            throw std::invalid_argument(fmt::format(
                "DIC preconditioner: modified diagonal d[{}] = {} is not positive (matrix not SPD?)", i, d[i]));
        for (std::size_t q = a.row_ptr[i]; q < a.row_ptr[i + 1]; ++q)
            d[a.col_idx[q]] -= a.values[q] * a.values[q] / d[i];
    }
    p.inv_diag_.resize(a.n);
    for (std::size_t i = 0; i < a.n; ++i) p.inv_diag_[i] = 1.0 / d[i];
    return p;
}

Preconditioner Preconditioner::make(PreconditionerKind kind, const SymCsrMatrix& a) {
    return kind == PreconditionerKind::dic ? dic(a) : jacobi(a);
}

void Preconditioner::apply(std::span<const double> r, std::span<double> z) const {
    bench::ScopedRegion region("precondition");
    const std::size_t n = inv_diag_.size();
    if (r.size() != n || z.size() != n)
        throw DimensionError(fmt::format("preconditioner of size {} applied to vectors of size {} -> {}", n,
                                         r.size(), z.size()));

    if (kind_ == PreconditionerKind::jacobi) {
        const auto m = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < m; ++i) z[i] = r[i] * inv_diag_[i];
        return;
    }

    // Forward: (L + D) w = r. z holds the partially reduced right-hand side
    // and becomes w row by row.
    std::copy(r.begin(), r.end(), z.begin());
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = z[i] * inv_diag_[i];
        z[i] = wi;
        for (std::size_t q = row_ptr_[i]; q < row_ptr_[i + 1]; ++q) z[col_idx_[q]] -= values_[q] * wi;
    }
    // Backward: (D + L^T) z = D w, i.e. z[i] = w[i] - (sum_{j>i} A[i,j] z[j]) / d[i].
    for (std::size_t i = n; i-- > 0;) {
        double sum = 0.0;
        for (std::size_t q = row_ptr_[i]; q < row_ptr_[i + 1]; ++q) sum += values_[q] * z[col_idx_[q]];
        z[i] -= sum * inv_diag_[i];
    }
}

DenseVector Preconditioner::apply(std::span<const double> r) const {
    DenseVector z(r.size());
    apply(r, z);
    return z;
}

}  // namespace cfdscope
