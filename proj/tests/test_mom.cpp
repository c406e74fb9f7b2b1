#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "core_elements/datagen.hpp"
#include "core_elements/mom.hpp"
#include "core_elements/selection.hpp"
#include "oracles.hpp"

using namespace core_elements;

namespace {

DesignMatrix random_matrix(index_t n, index_t p, Rng& rng) {
    DesignMatrix x(n, p);
    for (index_t j = 0; j < p; ++j)
        for (index_t i = 0; i < n; ++i) x(i, j) = rng.normal();
    return x;
}

double err_norm(const Vector& beta, const Vector& ref) {
    double s = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) s += (beta[j] - ref[j]) * (beta[j] - ref[j]);
    return std::sqrt(s);
}

// Replace the given rows with O1-style outliers.
void corrupt_with_o1(DesignMatrix& x, Vector& y, const std::vector<index_t>& rows, Rng& rng) {
    for (index_t row : rows) {
        for (index_t j = 0; j < x.cols(); ++j) x(row, j) = -10.0 + rng.normal();
        y[static_cast<std::size_t>(row)] = 1000.0 + 10.0 * rng.normal();
    }
}

}  // namespace

TEST_SUITE("mom") {

TEST_CASE("partition block structure") {
    Rng rng(149);

    const BlockPartition one = partition(10, 1, rng);
    CHECK(one.blocks.size() == 1);
    CHECK(one.blocks[0].size() == 10);

    const BlockPartition singletons = partition(6, 6, rng);
    CHECK(singletons.blocks.size() == 6);
    for (const auto& b : singletons.blocks) CHECK(b.size() == 1);

    const BlockPartition p3 = partition(10, 3, rng);
    CHECK(p3.blocks[0].size() == 4);
    CHECK(p3.blocks[1].size() == 3);
    CHECK(p3.blocks[2].size() == 3);

    // every index assigned exactly once
    std::set<index_t> seen;
    for (const auto& b : p3.blocks)
        for (index_t row : b) CHECK(seen.insert(row).second);
    CHECK(seen.size() == 10);
    for (index_t i = 0; i < 10; ++i)
        CHECK(std::find(p3.blocks[static_cast<std::size_t>(p3.assignment[static_cast<std::size_t>(i)])].begin(),
                        p3.blocks[static_cast<std::size_t>(p3.assignment[static_cast<std::size_t>(i)])].end(),
                        i) != p3.blocks[static_cast<std::size_t>(p3.assignment[static_cast<std::size_t>(i)])].end());
}

TEST_CASE("partition rejects invalid k") {
    Rng rng(151);
    CHECK_THROWS(partition(5, 0, rng));
    CHECK_THROWS(partition(5, 6, rng));
}

TEST_CASE("k = 1 is bit-identical to the plain core estimate") {
    Rng rng(157);
    const DesignMatrix x = random_matrix(30, 3, rng);
    Vector y(30);
    for (double& v : y) v = rng.normal();

    Rng mom_rng(1);
    const MomResult mom = mom_core_estimate(x, y, 9, 1, mom_rng);
    const CoefficientVector core = core_estimate(x, y, SketchBudget(9));
    for (std::size_t j = 0; j < 3; ++j) CHECK(mom.estimate.beta[j] == core.beta[j]);
}

TEST_CASE("coordinate median") {
    CHECK_THROWS_AS(coordinate_median({}), EmptyInput);

    const Vector single{1.0, 2.0};
    CHECK(coordinate_median({single}) == single);

    CHECK(coordinate_median({{0.0}, {10.0}})[0] == 5.0);   // even-count midpoint
    CHECK(coordinate_median({{3.0}, {1.0}, {2.0}})[0] == 2.0);
    CHECK(coordinate_median({{1.0}, {100.0}, {2.0}})[0] == 2.0);

    // permutation invariance in the block order
    const std::vector<Vector> est{{1.0, 9.0}, {5.0, 7.0}, {3.0, 8.0}, {4.0, -2.0}};
    std::vector<Vector> shuffled{est[2], est[0], est[3], est[1]};
    CHECK(coordinate_median(est) == coordinate_median(shuffled));

    // median of k copies is the vector itself, exactly
    const Vector v{0.3, -1.7, 2.9};
    CHECK(coordinate_median({v, v, v, v, v}) == v);

    CHECK_THROWS_AS(coordinate_median({{1.0}, {1.0, 2.0}}), DimensionMismatch);
}

TEST_CASE("breakdown accounting") {
    CHECK(breakdown_budget(1) == 0);
    CHECK(mom_outlier_tolerance(1) == 0);
    CHECK(breakdown_budget(2) == 1);
    CHECK(breakdown_budget(40) == 20);
    CHECK(mom_outlier_tolerance(40) == 19);
}

TEST_CASE("identical block estimates collapse to that estimate") {
    // Two copies of the same rows in each block: per-block estimates agree,
    // so the median equals the common value.
    Rng rng(163);
    const DesignMatrix base = random_matrix(20, 2, rng);
    Vector yb(20);
    for (double& v : yb) v = rng.normal();

    DesignMatrix x(40, 2);
    Vector y(40);
    for (index_t i = 0; i < 20; ++i) {
        for (index_t j = 0; j < 2; ++j) {
            x(i, j) = base(i, j);
            x(i + 20, j) = base(i, j);
        }
        y[static_cast<std::size_t>(i)] = yb[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(i + 20)] = yb[static_cast<std::size_t>(i)];
    }
    BlockPartition part;
    part.k = 2;
    part.assignment.assign(40, 0);
    part.blocks.resize(2);
    for (index_t i = 0; i < 20; ++i) part.blocks[0].push_back(i);
    for (index_t i = 20; i < 40; ++i) {
        part.blocks[1].push_back(i);
        part.assignment[static_cast<std::size_t>(i)] = 1;
    }

    const MomResult mom = mom_core_estimate_with_partition(x, y, 12, part);
    const CoefficientVector core = core_estimate(base, yb, SketchBudget(6));
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(mom.estimate.beta[j] == doctest::Approx(core.beta[j]).epsilon(1e-12));
}

TEST_CASE("check_mom_conditions on full selection") {
    Rng rng(167);
    const DesignMatrix x = random_matrix(24, 2, rng);
    Rng prng(5);
    const BlockPartition part = partition(24, 3, prng);

    std::vector<SparseColumnMatrix> sketches;
    for (const auto& rows : part.blocks) {
        const DesignMatrix xl = x.submatrix_rows(rows);
        sketches.push_back(select_core_elements(xl, SketchBudget(static_cast<index_t>(rows.size()))).sketch);
    }
    const MomDiagnostics diag = check_mom_conditions(x, part, sketches);
    for (const auto& b : diag.blocks) {
        CHECK(b.lambda0 == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(b.frob_l2_over_nl2 == 0.0);
    }
    CHECK(diag.h2_small);
    CHECK(diag.h3_satisfied);
}

TEST_CASE("check_mom_conditions on an orthogonal block design") {
    // Blocks with X'X = n_l I have unit Fisher-information eigenvalues.
    DesignMatrix x(4, 2, {1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0});
    BlockPartition part;
    part.k = 2;
    part.assignment = {0, 0, 1, 1};
    part.blocks = {{0, 1}, {2, 3}};
    std::vector<SparseColumnMatrix> sketches;
    for (const auto& rows : part.blocks)
        sketches.push_back(select_core_elements(x.submatrix_rows(rows), SketchBudget(2)).sketch);

    const MomDiagnostics diag = check_mom_conditions(x, part, sketches);
    for (const auto& b : diag.blocks) {
        CHECK(b.eig_min == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(b.eig_max == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(diag.h1_satisfied);
}

TEST_CASE("check_mom_conditions matches a dense reference computation") {
    Rng rng(173);
    const DesignMatrix x = random_matrix(200, 5, rng);
    Rng prng(7);
    const BlockPartition part = partition(200, 4, prng);
    const index_t r_block = 100 / 4;

    std::vector<SparseColumnMatrix> sketches;
    for (const auto& rows : part.blocks)
        sketches.push_back(select_core_elements(x.submatrix_rows(rows), SketchBudget(r_block)).sketch);

    const MomDiagnostics diag = check_mom_conditions(x, part, sketches);

    for (index_t l = 0; l < 4; ++l) {
        const auto& rows = part.blocks[static_cast<std::size_t>(l)];
        const double nl = static_cast<double>(rows.size());
        const DesignMatrix xl = x.submatrix_rows(rows);
        const oracles::Mat xm = oracles::from_design(xl);

        // Fisher eigenvalues from an independent SVD: sigma_i^2 / n_l.
        const auto sv = oracles::jacobi_svd_values(xm);
        const auto& b = diag.blocks[static_cast<std::size_t>(l)];
        CHECK(b.eig_max == doctest::Approx(sv.front() * sv.front() / nl).epsilon(1e-8));
        CHECK(b.eig_min == doctest::Approx(sv.back() * sv.back() / nl).epsilon(1e-8));

        const DesignMatrix ll = residual_matrix(xl, sketches[static_cast<std::size_t>(l)]);
        const double fl = frobenius_norm(ll);
        CHECK(b.frob_l2_over_nl2 == doctest::Approx(fl * fl / (nl * nl)).epsilon(1e-10));

        // lambda0 oracle: explicit inverse, dense products, SVD.
        const oracles::Mat gram = oracles::matmul(oracles::transpose(xm), xm);
        const oracles::Mat inv = oracles::gauss_jordan_inverse(gram);
        const oracles::Mat ltx = oracles::matmul(oracles::transpose(oracles::from_design(ll)), xm);
        const auto zsv = oracles::jacobi_svd_values(oracles::matmul(inv, ltx));
        CHECK(b.lambda0 == doctest::Approx(zsv.front()).epsilon(1e-8));
    }
}

TEST_CASE("singular blocks are dropped; all-singular aborts") {
    DesignMatrix x(8, 2);
    x(0, 0) = 1e-308;  // effectively zero design
    Rng rng(179);
    CHECK_THROWS_AS(mom_core_estimate(x, Vector(8, 1.0), 8, 4, rng), AllBlocksSingular);
}

TEST_CASE("warnings for remainder and thin blocks") {
    Rng rng(181);
    const DesignMatrix x = random_matrix(30, 3, rng);
    Vector y(30);
    for (double& v : y) v = rng.normal();
    const MomResult mom = mom_core_estimate(x, y, 10, 3, rng);  // 10 % 3 != 0, 10/3 ~ 3 >= p
    bool has_remainder_warning = false;
    for (const auto& w : mom.warnings) has_remainder_warning |= w.find("divisible") != std::string::npos;
    CHECK(has_remainder_warning);
}

TEST_CASE("median of means resists one-sided corruption") {
    // D1 dense data with floor(k/2) - 1 O1-style outliers; k = 20.
    const index_t n = 4000, p = 10, k = 20, r = 200;
    const index_t n_o = mom_outlier_tolerance(k);  // 9

    std::vector<double> mom_errs, core_errs;
    const Vector beta(static_cast<std::size_t>(p), 1.0);
    for (int seed = 0; seed < 50; ++seed) {
        ExperimentConfig cfg;
        cfg.n = n;
        cfg.p = p;
        cfg.seed = 5000 + static_cast<std::uint64_t>(seed);
        Rng rng(cfg.seed);
        GeneratedDataset ds = generate(cfg, rng);

        std::vector<index_t> rows;
        for (index_t i = 0; i < n_o; ++i) rows.push_back(rng.uniform_index(n));
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        corrupt_with_o1(ds.x, ds.y, rows, rng);

        Rng mom_rng(cfg.seed + 1);
        mom_errs.push_back(err_norm(mom_core_estimate(ds.x, ds.y, r, k, mom_rng, false).estimate.beta, beta));
        core_errs.push_back(err_norm(core_estimate(ds.x, ds.y, SketchBudget(r)).beta, beta));
    }
    CHECK(oracles::median_of(mom_errs) < 0.2 * oracles::median_of(core_errs));
}

}  // TEST_SUITE
