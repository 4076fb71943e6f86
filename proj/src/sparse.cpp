#include "cfdscope/sparse.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstring>

#include "cfdscope/profiler.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfdscope {

using bench::ScopedRegion;

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DimensionError(fmt::format("{}: length mismatch ({} vs {})", what, a, b));
}

void check_csr_structure(std::size_t rows, std::size_t cols, const std::vector<std::size_t>& row_ptr,
                         const std::vector<std::size_t>& col_idx, std::size_t nnz, bool strictly_upper) {
    if (row_ptr.size() != rows + 1)
        throw std::invalid_argument(fmt::format("row_ptr has {} entries, expected {}", row_ptr.size(), rows + 1));
    if (row_ptr.front() != 0) throw std::invalid_argument("row_ptr[0] must be 0");
    if (row_ptr.back() != nnz)
        throw std::invalid_argument(fmt::format("row_ptr[last] = {} but nnz = {}", row_ptr.back(), nnz));
    if (col_idx.size() != nnz) throw std::invalid_argument("col_idx and values differ in length");
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_ptr[r + 1] < row_ptr[r])
            throw std::invalid_argument(fmt::format("row_ptr decreases at row {}", r));
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
            if (col_idx[p] >= cols)
                throw std::invalid_argument(fmt::format("row {}: column {} out of range", r, col_idx[p]));
            if (p > row_ptr[r] && col_idx[p] <= col_idx[p - 1])
                throw std::invalid_argument(fmt::format("row {}: column indices not strictly increasing", r));
            if (strictly_upper && col_idx[p] <= r)
                throw std::invalid_argument(fmt::format("row {}: entry in column {} is not above the diagonal", r,
                                                        col_idx[p]));
        }
    }
}

}  // namespace

double CsrMatrix::at(std::size_t row, std::size_t col) const {
    for (std::size_t p = row_ptr[row]; p < row_ptr[row + 1]; ++p)
        if (col_idx[p] == col) return values[p];
    return 0.0;
}

void CsrMatrix::validate() const { check_csr_structure(n_rows, n_cols, row_ptr, col_idx, values.size(), false); }

CsrMatrix CsrMatrix::from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense) {
    require_same_length(dense.size(), rows * cols, "CsrMatrix::from_dense");
    CsrMatrix a;
    a.n_rows = rows;
    a.n_cols = cols;
    a.row_ptr.assign(1, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = dense[r * cols + c];
            if (v != 0.0) {
                a.col_idx.push_back(c);
                a.values.push_back(v);
            }
        }
        a.row_ptr.push_back(a.values.size());
    }
    return a;
}

std::vector<double> CsrMatrix::to_dense() const {
    std::vector<double> d(n_rows * n_cols, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r)
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) d[r * n_cols + col_idx[p]] = values[p];
    return d;
}

void SymCsrMatrix::validate() const {
    if (diag.size() != n) throw std::invalid_argument("diagonal length differs from dimension");
    check_csr_structure(n, n, row_ptr, col_idx, values.size(), true);
}

CsrMatrix SymCsrMatrix::to_full() const {
    // Row r of the full matrix: mirrored entries (c < r), diagonal, upper entries.
    std::vector<std::size_t> lower_count(n, 0);
    for (std::size_t p = 0; p < col_idx.size(); ++p) ++lower_count[col_idx[p]];

    CsrMatrix a;
    a.n_rows = a.n_cols = n;
    a.row_ptr.assign(n + 1, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t upper = row_ptr[r + 1] - row_ptr[r];
        a.row_ptr[r + 1] = a.row_ptr[r] + lower_count[r] + (diag[r] != 0.0 ? 1 : 0) + upper;
    }
    a.col_idx.resize(a.row_ptr[n]);
    a.values.resize(a.row_ptr[n]);
    std::vector<std::size_t> fill(a.row_ptr.begin(), a.row_ptr.end() - 1);
    // Rows are visited in ascending order, so mirrored entries land sorted.
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
            const std::size_t c = col_idx[p];
            a.col_idx[fill[c]] = r;
            a.values[fill[c]++] = values[p];
        }
        if (diag[r] != 0.0) {
            a.col_idx[fill[r]] = r;
            a.values[fill[r]++] = diag[r];
        }
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
            a.col_idx[fill[r]] = col_idx[p];
            a.values[fill[r]++] = values[p];
        }
    }
    return a;
}

SymCsrMatrix to_symmetric(const CsrMatrix& a) {
    if (a.n_rows != a.n_cols)
        throw DimensionError(fmt::format("to_symmetric: matrix is {}x{}, not square", a.n_rows, a.n_cols));
    const std::size_t n = a.n_rows;
    SymCsrMatrix s;
    s.n = n;
    s.diag.assign(n, 0.0);
    s.row_ptr.assign(1, 0);

    // Cursor into each row's lower part: row c's lower entries are consumed in
    // increasing column order as rows r = 0,1,... mirror into them.
    std::vector<std::size_t> lower_cursor(a.row_ptr.begin(), a.row_ptr.end() - 1);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
            const std::size_t c = a.col_idx[p];
            const double v = a.values[p];
            if (c < r) continue;  // checked when its mirror was visited
            if (c == r) {
                s.diag[r] = v;
                continue;
            }
            // Mirror must be the next unconsumed lower entry of row c.
            std::size_t& q = lower_cursor[c];
            if (q < a.row_ptr[c + 1] && a.col_idx[q] < r)
                throw std::invalid_argument(fmt::format(
                    "matrix is not symmetric: entry ({},{}) = {} has no stored mirror ({},{})", c, a.col_idx[q],
                    a.values[q], a.col_idx[q], c));
            if (q >= a.row_ptr[c + 1] || a.col_idx[q] != r)
                throw std::invalid_argument(fmt::format(
                    "matrix is not symmetric: entry ({},{}) = {} has no stored mirror ({},{})", r, c, v, c, r));
            if (a.values[q] != v)
                throw std::invalid_argument(fmt::format(
                    "matrix is not symmetric: ({},{}) = {} but ({},{}) = {}", r, c, v, c, r, a.values[q]));
            ++q;
            s.col_idx.push_back(c);
            s.values.push_back(v);
        }
        s.row_ptr.push_back(s.values.size());
    }
    // Any lower entry never consumed has no upper mirror.
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t q = lower_cursor[r];
        if (q < a.row_ptr[r + 1] && a.col_idx[q] < r)
            throw std::invalid_argument(fmt::format(
                "matrix is not symmetric: entry ({},{}) = {} has no stored mirror ({},{})", r, a.col_idx[q],
                a.values[q], a.col_idx[q], r));
    }
    return s;
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    ScopedRegion region("spmv");
    require_same_length(x.size(), a.n_cols, "spmv input");
    require_same_length(y.size(), a.n_rows, "spmv output");
    const auto rows = static_cast<std::ptrdiff_t>(a.n_rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) sum += a.values[p] * x[a.col_idx[p]];
        y[r] = sum;
    }
}

DenseVector spmv(const CsrMatrix& a, std::span<const double> x) {
    DenseVector y(a.n_rows);
    spmv(a, x, y);
    return y;
}

void spmv_sym(const SymCsrMatrix& a, std::span<const double> x, std::span<double> y) {
    ScopedRegion region("spmv");
    require_same_length(x.size(), a.n, "spmv_sym input");
    require_same_length(y.size(), a.n, "spmv_sym output");
    const std::size_t n = a.n;

#ifdef _OPENMP
    const int threads = n > 4096 ? omp_get_max_threads() : 1;
#else
    const int threads = 1;
#endif

    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) y[i] = a.diag[i] * x[i];
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = x[i];
            double sum = 0.0;
            for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
                const std::size_t j = a.col_idx[p];
                sum += a.values[p] * x[j];
                y[j] += a.values[p] * xi;
            }
            y[i] += sum;
        }
        return;
    }

    // Gather part (D + U) x goes straight to y; the scatter part U^T x goes
    // into one private buffer per thread, reduced afterwards.
    thread_local std::vector<double> scratch;
    scratch.assign(static_cast<std::size_t>(threads) * n, 0.0);
    double* buffers = scratch.data();
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel num_threads(threads)
    {
#ifdef _OPENMP
        double* mine = buffers + static_cast<std::size_t>(omp_get_thread_num()) * n;
#else
        double* mine = buffers;
#endif
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < rows; ++i) {
            const double xi = x[i];
            double sum = a.diag[i] * xi;
            for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
                const std::size_t j = a.col_idx[p];
                sum += a.values[p] * x[j];
                mine[j] += a.values[p] * xi;
            }
            y[i] = sum;
        }
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < rows; ++i) {
            double acc = 0.0;
            for (int t = 0; t < threads; ++t) acc += buffers[static_cast<std::size_t>(t) * n + i];
            y[i] += acc;
        }
    }
}

DenseVector spmv_sym(const SymCsrMatrix& a, std::span<const double> x) {
    DenseVector y(a.n);
    spmv_sym(a, x, y);
    return y;
}

double dot(std::span<const double> x, std::span<const double> y) {
    ScopedRegion region("dot");
    require_same_length(x.size(), y.size(), "dot");
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    double sum = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : sum)
    for (std::ptrdiff_t i = 0; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

double dot_serial(std::span<const double> x, std::span<const double> y) {
    ScopedRegion region("dot");
    require_same_length(x.size(), y.size(), "dot");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
    return sum;
}

void multiply_add_inplace(std::span<double> y, double alpha, std::span<const double> x) {
    ScopedRegion region("multiply_add_inplace");
    require_same_length(y.size(), x.size(), "multiply_add_inplace");
    const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for simd schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

DenseVector add(std::span<const double> x, std::span<const double> y) {
    ScopedRegion region("operator+");
    require_same_length(x.size(), y.size(), "add");
    DenseVector out(x.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
    return out;
}

DenseVector scale(double alpha, std::span<const double> x) {
    ScopedRegion region("operator*");
    DenseVector out(x.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = alpha * x[i];
    return out;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace cfdscope
