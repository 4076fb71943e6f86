#include <doctest.h>

#include <random>

#include "cfdscope/parallel.hpp"
#include "cfdscope/sparse.hpp"
#include "oracles.hpp"

using namespace cfdscope;

namespace {

oracle::Dense random_dense(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double fill) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::bernoulli_distribution keep(fill);
    oracle::Dense m(rows, cols);
    for (auto& x : m.a)
        if (keep(rng)) x = val(rng);
    return m;
}

oracle::Dense random_symmetric(std::mt19937_64& rng, std::size_t n, double fill) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::bernoulli_distribution keep(fill);
    oracle::Dense m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = val(rng) + 4.0;
        for (std::size_t j = i + 1; j < n; ++j)
            if (keep(rng)) m(i, j) = m(j, i) = val(rng);
    }
    return m;
}

CsrMatrix to_csr(const oracle::Dense& m) { return CsrMatrix::from_dense(m.rows, m.cols, m.a); }

double rel_err(const std::vector<double>& got, const std::vector<double>& want) {
    const double scale = std::max(1.0, oracle::norm(want));
    return oracle::max_abs_diff(got, want) / scale;
}

}  // namespace

TEST_CASE("spmv examples") {
    const double d[] = {2, 0, 0, 3};
    const auto a = CsrMatrix::from_dense(2, 2, d);
    const std::vector<double> ones{1.0, 1.0};
    CHECK(spmv(a, ones) == std::vector<double>{2.0, 3.0});

    CsrMatrix empty;
    empty.n_rows = 3;
    empty.n_cols = 2;
    empty.row_ptr.assign(4, 0);
    empty.validate();
    CHECK(spmv(empty, ones) == std::vector<double>{0.0, 0.0, 0.0});

    std::mt19937_64 rng(1);
    const auto dense = random_dense(rng, 6, 6, 0.4);
    const auto x = oracle::random_vector(rng, 6);
    CHECK(rel_err(spmv(to_csr(dense), x), oracle::matvec(dense, x)) <= 1e-14);
}

TEST_CASE("spmv rejects mismatched lengths") {
    const double d[] = {1, 2, 3, 4, 5, 6};
    const auto a = CsrMatrix::from_dense(2, 3, d);
    const std::vector<double> x{1.0, 2.0};
    CHECK_THROWS_AS(spmv(a, x), DimensionError);
    std::vector<double> y(3);
    CHECK_THROWS_AS(spmv(a, std::vector<double>{1, 2, 3}, y), DimensionError);
}

TEST_CASE("spmv_sym examples") {
    SymCsrMatrix diag;
    diag.n = 2;
    diag.diag = {2.0, 3.0};
    diag.row_ptr = {0, 0, 0};
    CHECK(spmv_sym(diag, std::vector<double>{1.0, 1.0}) == std::vector<double>{2.0, 3.0});

    SymCsrMatrix s;
    s.n = 2;
    s.diag = {2.0, 2.0};
    s.row_ptr = {0, 1, 1};
    s.col_idx = {1};
    s.values = {-1.0};
    s.validate();
    CHECK(spmv_sym(s, std::vector<double>{1.0, 0.0}) == std::vector<double>{2.0, -1.0});

    std::mt19937_64 rng(2);
    const auto dense = random_symmetric(rng, 8, 0.5);
    const auto full = to_csr(dense);
    const auto x = oracle::random_vector(rng, 8);
    CHECK(rel_err(spmv_sym(to_symmetric(full), x), spmv(full, x)) <= 1e-14);

    CHECK_THROWS_AS(spmv_sym(s, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("spmv_sym equals full spmv on random symmetric matrices") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> size(2, 64);
    std::uniform_real_distribution<double> fill(0.05, 0.6);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = size(rng);
        const auto full = to_csr(random_symmetric(rng, n, fill(rng)));
        const auto sym = to_symmetric(full);
        sym.validate();
        const auto x = oracle::random_vector(rng, n);
        CHECK(rel_err(spmv_sym(sym, x), spmv(full, x)) <= 1e-14);
    }
}

TEST_CASE("spmv_sym threaded scatter path matches full spmv") {
    // Large enough to take the per-thread buffer path.
    const std::size_t n = 6000;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> offset(1, 300);
    std::vector<double> dense_diag(n);
    SymCsrMatrix s;
    s.n = n;
    for (std::size_t i = 0; i < n; ++i) {
        s.diag.push_back(4.0 + val(rng));
        std::size_t c = i;
        for (int e = 0; e < 3; ++e) {
            c += offset(rng);
            if (c >= n) break;
            s.col_idx.push_back(c);
            s.values.push_back(val(rng));
        }
        s.row_ptr.push_back(s.col_idx.size());
    }
    s.validate();
    const auto full = s.to_full();
    full.validate();
    const auto x = oracle::random_vector(rng, n);
    const int saved = thread_count();
    for (int threads : {1, 2, 4}) {
        set_thread_count(threads);
        CHECK(rel_err(spmv_sym(s, x), spmv(full, x)) <= 1e-14);
    }
    set_thread_count(saved);
}

TEST_CASE("to_symmetric examples and errors") {
    const double eye[] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const auto si = to_symmetric(CsrMatrix::from_dense(3, 3, eye));
    CHECK(si.diag == std::vector<double>{1, 1, 1});
    CHECK(si.upper_nnz() == 0);

    const double t[] = {2, -1, -1, 2};
    const auto st = to_symmetric(CsrMatrix::from_dense(2, 2, t));
    CHECK(st.diag == std::vector<double>{2, 2});
    CHECK(st.upper_nnz() == 1);
    CHECK(st.values[0] == -1.0);

    const double asym[] = {1, 2, 0, 1};
    try {
        (void)to_symmetric(CsrMatrix::from_dense(2, 2, asym));
        FAIL("expected an asymmetry error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(0,1)") != std::string::npos);
        CHECK(msg.find("(1,0)") != std::string::npos);
    }

    const double slightly[] = {1, 0.5, 0.5000000000000001, 1};
    CHECK_THROWS_AS((void)to_symmetric(CsrMatrix::from_dense(2, 2, slightly)), std::invalid_argument);

    const double rect[] = {1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS((void)to_symmetric(CsrMatrix::from_dense(2, 3, rect)), DimensionError);
}

TEST_CASE("sparse structures satisfy their invariants after construction") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> size(1, 40);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t r = size(rng), c = size(rng);
        const auto dense = random_dense(rng, r, c, 0.3);
        const auto csr = to_csr(dense);
        CHECK_NOTHROW(csr.validate());
        CHECK(csr.to_dense() == dense.a);

        const auto sym_dense = random_symmetric(rng, r, 0.3);
        const auto sym = to_symmetric(to_csr(sym_dense));
        CHECK_NOTHROW(sym.validate());
        const auto round = sym.to_full();
        CHECK_NOTHROW(round.validate());
        CHECK(round.to_dense() == sym_dense.a);
    }
}

TEST_CASE("validate reports broken invariants") {
    CsrMatrix a;
    a.n_rows = 2;
    a.n_cols = 2;
    a.row_ptr = {0, 2, 2};
    a.col_idx = {1, 0};
    a.values = {1.0, 1.0};
    CHECK_THROWS_AS(a.validate(), std::invalid_argument);  // unsorted columns
    a.col_idx = {0, 2};
    CHECK_THROWS_AS(a.validate(), std::invalid_argument);  // column out of range
    a.col_idx = {0, 1};
    a.row_ptr = {1, 2, 2};
    CHECK_THROWS_AS(a.validate(), std::invalid_argument);  // row_ptr[0] != 0

    SymCsrMatrix s;
    s.n = 2;
    s.diag = {1.0, 1.0};
    s.row_ptr = {0, 0, 1};
    s.col_idx = {0};
    s.values = {1.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // not strictly upper
}

TEST_CASE("dot examples") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6}, z{0, 0, 0};
    CHECK(dot(a, b) == 32.0);
    CHECK(dot(a, z) == 0.0);
    CHECK(dot_serial(a, b) == 32.0);
    CHECK_THROWS_AS(dot(a, std::vector<double>{1.0}), DimensionError);
    CHECK_THROWS_AS(dot_serial(a, std::vector<double>{1.0}), DimensionError);

    std::mt19937_64 rng(6);
    const auto x = oracle::random_vector(rng, 1000), y = oracle::random_vector(rng, 1000);
    double serial = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) serial += x[i] * y[i];
    const int saved = thread_count();
    for (int threads : {1, 3, 8}) {
        set_thread_count(threads);
        CHECK(std::abs(dot(x, y) - serial) <= 1e-12 * std::abs(serial));
    }
    set_thread_count(saved);
}

TEST_CASE("multiply_add_inplace examples") {
    std::vector<double> y{1, 1};
    multiply_add_inplace(y, 0.0, std::vector<double>{5, 5});
    CHECK(y == std::vector<double>{1, 1});

    y = {0, 0};
    multiply_add_inplace(y, 2.0, std::vector<double>{1, 3});
    CHECK(y == std::vector<double>{2, 6});

    CHECK_THROWS_AS(multiply_add_inplace(y, 1.0, std::vector<double>{1}), DimensionError);
}

TEST_CASE("multiply_add_inplace matches the allocating add/scale path") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> alpha_dist(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = oracle::random_vector(rng, 257);
        const auto y0 = oracle::random_vector(rng, 257);
        const double alpha = alpha_dist(rng);
        const auto expect = add(y0, scale(alpha, x));
        auto y = y0;
        multiply_add_inplace(y, alpha, x);
        for (std::size_t i = 0; i < y.size(); ++i) {
#ifdef __FP_FAST_FMA
            CHECK(std::abs(y[i] - expect[i]) <= std::abs(std::nextafter(expect[i], INFINITY) - expect[i]));
#else
            CHECK(y[i] == expect[i]);
#endif
        }
    }
}

TEST_CASE("multiply_add_inplace with -1 then +1 restores y") {
    // Exactness needs y - x to be representable; integer-valued data
    // guarantees it.
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> val(-1000000, 1000000);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(100), y(100);
        for (auto& v : x) v = val(rng);
        for (auto& v : y) v = val(rng) * 0.25;
        const auto y0 = y;
        multiply_add_inplace(y, -1.0, x);
        multiply_add_inplace(y, 1.0, x);
        CHECK(y == y0);
    }
}

TEST_CASE("add and scale examples") {
    CHECK(add(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == std::vector<double>{4, 6});
    const std::vector<double> x{0.3, -7.5, 1e300};
    CHECK(scale(1.0, x) == x);
    CHECK(scale(2.0, std::vector<double>{1, -1}) == std::vector<double>{2, -2});
    CHECK_THROWS_AS(add(std::vector<double>{1}, std::vector<double>{1, 2}), DimensionError);
}
