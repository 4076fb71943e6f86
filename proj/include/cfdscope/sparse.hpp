#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cfdscope {

using DenseVector = std::vector<double>;

/// Thrown on length or shape mismatches between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within a row.
struct CsrMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    [[nodiscard]] std::size_t nnz() const { return values.size(); }

    /// Value at (row, col), 0 when the entry is not stored.
    [[nodiscard]] double at(std::size_t row, std::size_t col) const;

    /// Throws std::invalid_argument describing the first broken invariant.
    void validate() const;

    /// Builds from row-major dense storage, dropping exact zeros.
    static CsrMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense);
    [[nodiscard]] std::vector<double> to_dense() const;
};

/// Symmetric matrix stored as its diagonal plus the strict upper triangle:
/// A = D + U + U^T.
struct SymCsrMatrix {
    std::size_t n = 0;
    std::vector<double> diag;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;  // every entry has col > row
    std::vector<double> values;

    [[nodiscard]] std::size_t upper_nnz() const { return values.size(); }
    void validate() const;
    [[nodiscard]] CsrMatrix to_full() const;
};

/// Throws std::invalid_argument naming the first (i,j)/(j,i) pair whose
/// values are not bitwise equal, or if a mirrored entry is missing.
SymCsrMatrix to_symmetric(const CsrMatrix& a);

DenseVector spmv(const CsrMatrix& a, std::span<const double> x);
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

/// Each stored upper entry (i,j) contributes to y[i] with x[j] and to y[j]
/// with x[i]. Threads accumulate the transposed scatter into private
/// buffers that are summed afterwards.
DenseVector spmv_sym(const SymCsrMatrix& a, std::span<const double> x);
void spmv_sym(const SymCsrMatrix& a, std::span<const double> x, std::span<double> y);

/// Thread-parallel reduction; association order depends on the thread count.
double dot(std::span<const double> x, std::span<const double> y);
/// Single-threaded left-to-right sum.
double dot_serial(std::span<const double> x, std::span<const double> y);

/// y <- y + alpha * x without allocating.
void multiply_add_inplace(std::span<double> y, double alpha, std::span<const double> x);

// Allocating element-wise kernels of the baseline path.
DenseVector add(std::span<const double> x, std::span<const double> y);
DenseVector scale(double alpha, std::span<const double> x);

double norm2(std::span<const double> x);

}  // namespace cfdscope
