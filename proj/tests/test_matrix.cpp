#include <doctest.h>

#include <cmath>

#include "core_elements/matrix.hpp"
#include "core_elements/rng.hpp"
#include "oracles.hpp"

using namespace core_elements;

namespace {

DesignMatrix random_matrix(index_t n, index_t p, Rng& rng) {
    DesignMatrix x(n, p);
    for (index_t j = 0; j < p; ++j)
        for (index_t i = 0; i < n; ++i) x(i, j) = rng.normal();
    return x;
}

DesignMatrix transposed(const DesignMatrix& x) {
    DesignMatrix t(x.cols(), x.rows());
    for (index_t i = 0; i < x.rows(); ++i)
        for (index_t j = 0; j < x.cols(); ++j) t(j, i) = x(i, j);
    return t;
}

}  // namespace

TEST_SUITE("matrix") {

TEST_CASE("frobenius norm basics") {
    CHECK(frobenius_norm(DesignMatrix::identity(2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(frobenius_norm(DesignMatrix(3, 2)) == 0.0);

    DesignMatrix m(2, 2, {3.0, 4.0, 0.0, 0.0});
    // direct-summation oracle
    double acc = 0.0;
    for (double v : m.values()) acc += v * v;
    CHECK(frobenius_norm(m) == doctest::Approx(std::sqrt(acc)).epsilon(1e-15));
    CHECK(frobenius_norm(m) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("frobenius norm of a sparse matrix counts stored entries") {
    SparseColumnMatrix s(4, 2, {{{0, 3.0}, {2, -4.0}}, {{1, 12.0}}});
    CHECK(frobenius_norm(s) == doctest::Approx(13.0).epsilon(1e-15));
}

TEST_CASE("spectral norm on simple matrices") {
    DesignMatrix d(2, 2, {3.0, 0.0, 0.0, 1.0});
    CHECK(spectral_norm(d) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(spectral_norm(DesignMatrix::identity(5)) == doctest::Approx(1.0).epsilon(1e-8));

    // [[1,1],[0,1]]: largest singular value is the golden ratio.
    DesignMatrix g(2, 2, {1.0, 0.0, 1.0, 1.0});
    CHECK(spectral_norm(g) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-7));
}

TEST_CASE("spectral norm invariants on random matrices") {
    Rng rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const DesignMatrix x = random_matrix(30, 4, rng);
        const double s = spectral_norm(x, 1e-10, 100000);
        CHECK(s <= frobenius_norm(x) * (1.0 + 1e-9));
        const double st = spectral_norm(transposed(x), 1e-10, 100000);
        CHECK(s == doctest::Approx(st).epsilon(1e-6));
        // independent SVD oracle
        const auto sv = oracles::jacobi_svd_values(oracles::from_design(x));
        CHECK(s == doctest::Approx(sv.front()).epsilon(1e-6));
    }
}

TEST_CASE("spectral norm survives a start vector in the null space") {
    // Column sums cancel, so the all-ones start maps to zero.
    DesignMatrix x(2, 2, {1.0, 2.0, -1.0, -2.0});
    const auto sv = oracles::jacobi_svd_values(oracles::from_design(x));
    CHECK(spectral_norm(x) == doctest::Approx(sv.front()).epsilon(1e-7));
}

TEST_CASE("non-convergence carries the last estimate") {
    DesignMatrix x(2, 2, {2.0, 0.0, 0.0, 1.999999});
    bool threw = false;
    try {
        spectral_norm(x, 1e-16, 3);
    } catch (const NonConvergence& e) {
        threw = true;
        CHECK(e.iterations == 3);
        CHECK(e.last_estimate > 1.9);
    }
    CHECK(threw);
}

TEST_CASE("condition number") {
    // Orthonormal columns.
    DesignMatrix q(4, 2);
    q(0, 0) = 1.0;
    q(1, 1) = 1.0;
    CHECK(condition_number(q) == doctest::Approx(1.0).epsilon(1e-12));

    DesignMatrix d(2, 2, {4.0, 0.0, 0.0, 2.0});
    CHECK(condition_number(d) == doctest::Approx(2.0).epsilon(1e-12));

    Rng rng(5);
    const DesignMatrix x = random_matrix(50, 5, rng);
    const auto sv = oracles::jacobi_svd_values(oracles::from_design(x));
    CHECK(condition_number(x) == doctest::Approx(sv.front() / sv.back()).epsilon(1e-8));
}

TEST_CASE("condition number rejects rank deficiency") {
    DesignMatrix x(4, 2);
    for (index_t i = 0; i < 4; ++i) {
        x(i, 0) = static_cast<double>(i + 1);
        x(i, 1) = 2.0 * static_cast<double>(i + 1);
    }
    CHECK_THROWS_AS(condition_number(x), RankDeficient);
}

TEST_CASE("symmetric eigenvalues") {
    DesignMatrix a(2, 2, {2.0, 1.0, 1.0, 2.0});
    const Vector ev = symmetric_eigenvalues(a);
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("gram_solve basics") {
    const Vector b{2.0, 4.0};
    CHECK(gram_solve(DesignMatrix::identity(2), b) == b);

    DesignMatrix d(2, 2, {2.0, 0.0, 0.0, 4.0});
    const Vector z = gram_solve(d, b);
    CHECK(z[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(z[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gram_solve matches the elimination oracle and honors the residual contract") {
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        DesignMatrix a = random_matrix(5, 5, rng);
        for (index_t j = 0; j < 5; ++j) a(j, j) += 5.0;  // keep it well conditioned
        Vector b(5);
        for (double& v : b) v = rng.normal();

        const Vector x = gram_solve(a, b);
        const Vector ref = oracles::gauss_jordan_solve(oracles::from_design(a), b);
        for (std::size_t i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-10));

        Vector res = b;
        for (index_t j = 0; j < 5; ++j)
            for (index_t i = 0; i < 5; ++i)
                res[static_cast<std::size_t>(i)] -= a(i, j) * x[static_cast<std::size_t>(j)];
        CHECK(norm2(res) <= 1e-8 * norm2(b));
    }
}

TEST_CASE("gram_solve rejects singular systems") {
    DesignMatrix a(2, 2, {1.0, 2.0, 2.0, 4.0});
    CHECK_THROWS_AS(gram_solve(a, Vector{1.0, 0.0}), SingularSystem);
}

TEST_CASE("gram_solve handles non-symmetric input") {
    DesignMatrix a(3, 3, {4.0, 0.5, 0.0, -1.0, 5.0, 2.0, 0.25, -0.5, 6.0});
    const Vector b{1.0, -2.0, 3.0};
    const Vector x = gram_solve(a, b);
    const Vector ref = oracles::gauss_jordan_solve(oracles::from_design(a), b);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("PivotedLu transpose solve") {
    Rng rng(23);
    DesignMatrix a = random_matrix(4, 4, rng);
    for (index_t j = 0; j < 4; ++j) a(j, j) += 4.0;
    Vector b(4);
    for (double& v : b) v = rng.normal();

    const PivotedLu lu(a);
    const Vector x = lu.solve_transpose(b);
    Vector res = b;  // residual of A' x = b
    for (index_t i = 0; i < 4; ++i)
        for (index_t j = 0; j < 4; ++j)
            res[static_cast<std::size_t>(i)] -= a(j, i) * x[static_cast<std::size_t>(j)];
    CHECK(norm2(res) <= 1e-10 * norm2(b));
}

TEST_CASE("sparse_gram") {
    Rng rng(29);
    const DesignMatrix x = random_matrix(6, 2, rng);

    SUBCASE("fully dense sketch equals the dense Gram") {
        std::vector<std::vector<std::pair<index_t, double>>> entries(2);
        for (index_t j = 0; j < 2; ++j)
            for (index_t i = 0; i < 6; ++i) entries[static_cast<std::size_t>(j)].emplace_back(i, x(i, j));
        const SparseColumnMatrix full(6, 2, entries);
        const DesignMatrix g = sparse_gram(full, x);
        const DesignMatrix ref = dense_gram(x);
        for (index_t i = 0; i < 2; ++i)
            for (index_t j = 0; j < 2; ++j) CHECK(std::abs(g(i, j) - ref(i, j)) <= 1e-12);
    }

    SUBCASE("empty sketch gives the zero matrix") {
        const SparseColumnMatrix empty(6, 2);
        const DesignMatrix g = sparse_gram(empty, x);
        for (index_t i = 0; i < 2; ++i)
            for (index_t j = 0; j < 2; ++j) CHECK(g(i, j) == 0.0);
    }

    SUBCASE("random instance matches the densify-then-multiply oracle") {
        const SparseColumnMatrix sk(
            6, 2, {{{1, x(1, 0)}, {4, x(4, 0)}}, {{0, x(0, 1)}, {2, x(2, 1)}, {5, x(5, 1)}}});
        const DesignMatrix g = sparse_gram(sk, x);
        const oracles::Mat ref = oracles::matmul(oracles::transpose(oracles::from_design(sk.to_dense())),
                                                 oracles::from_design(x));
        for (index_t i = 0; i < 2; ++i)
            for (index_t j = 0; j < 2; ++j)
                CHECK(g(i, j) ==
                      doctest::Approx(ref(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
                          .epsilon(1e-13));
    }
}

TEST_CASE("sparse self gram and transpose matvec") {
    Rng rng(31);
    const DesignMatrix x = random_matrix(8, 3, rng);
    std::vector<std::vector<std::pair<index_t, double>>> entries(3);
    for (index_t j = 0; j < 3; ++j)
        for (index_t i = j; i < 8; i += 2) entries[static_cast<std::size_t>(j)].emplace_back(i, x(i, j));
    const SparseColumnMatrix sk(8, 3, entries);
    const oracles::Mat dense = oracles::from_design(sk.to_dense());

    const DesignMatrix h = sparse_self_gram(sk);
    const oracles::Mat ref = oracles::matmul(oracles::transpose(dense), dense);
    for (index_t i = 0; i < 3; ++i)
        for (index_t j = 0; j < 3; ++j)
            CHECK(h(i, j) ==
                  doctest::Approx(ref(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
                      .epsilon(1e-13));

    Vector y(8);
    for (double& v : y) v = rng.normal();
    const Vector z = sparse_transpose_matvec(sk, y);
    for (index_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < 8; ++i)
            s += dense(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * y[static_cast<std::size_t>(i)];
        CHECK(z[static_cast<std::size_t>(j)] == doctest::Approx(s).epsilon(1e-13));
    }
}

TEST_CASE("sparse matrix invariants are enforced") {
    CHECK_THROWS(SparseColumnMatrix(4, 1, {{{0, 1.0}, {0, 2.0}}}));  // duplicate row
    CHECK_THROWS(SparseColumnMatrix(4, 1, {{{2, 1.0}, {1, 2.0}}}));  // not increasing
    CHECK_THROWS(SparseColumnMatrix(4, 1, {{{0, 0.0}}}));            // stored zero
    CHECK_THROWS(SparseColumnMatrix(4, 1, {{{4, 1.0}}}));            // out of range
}

TEST_CASE("centering") {
    Rng rng(37);
    DesignMatrix x = random_matrix(50, 3, rng);
    x.center_columns();
    CHECK(x.centered());
    for (index_t j = 0; j < 3; ++j) {
        double mean = 0.0, mx = 0.0;
        for (index_t i = 0; i < 50; ++i) {
            mean += x(i, j);
            mx = std::max(mx, std::abs(x(i, j)));
        }
        CHECK(std::abs(mean / 50.0) <= 1e-10 * mx);
    }
}

}  // TEST_SUITE
