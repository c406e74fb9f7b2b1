#include <doctest.h>

#include <cmath>

#include "core_elements/datagen.hpp"
#include "core_elements/estimators.hpp"
#include "core_elements/theory.hpp"
#include "oracles.hpp"

using namespace core_elements;

namespace {

DesignMatrix random_matrix(index_t n, index_t p, Rng& rng) {
    DesignMatrix x(n, p);
    for (index_t j = 0; j < p; ++j)
        for (index_t i = 0; i < n; ++i) x(i, j) = rng.normal();
    return x;
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Bisection on the chi-squared(1) CDF G(x) = Phi(sqrt(x)) - Phi(-sqrt(x)).
double chi2_1_quantile_bisect(double phi) {
    double lo = 0.0, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = phi_cdf(std::sqrt(mid)) - phi_cdf(-std::sqrt(mid));
        (g < phi ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("variance bound with zero residual") {
    Rng rng(191);
    const DesignMatrix x = random_matrix(12, 3, rng);
    const SelectionResult sel = select_core_elements(x, SketchBudget(12));  // L = 0
    const double sigma2 = 2.5;
    const VarianceBound vb = variance_upper_bound(x, sel.sketch, sigma2);
    CHECK(vb.lambda0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(vb.expansion_valid);

    const oracles::Mat xm = oracles::from_design(x);
    const oracles::Mat inv = oracles::gauss_jordan_inverse(oracles::matmul(oracles::transpose(xm), xm));
    double tr = 0.0;
    for (std::size_t i = 0; i < 3; ++i) tr += inv(i, i);
    CHECK(vb.leading_term == doctest::Approx(sigma2 * 3.0 * 3.0 * tr).epsilon(1e-10));
}

TEST_CASE("variance bound on orthonormal columns") {
    DesignMatrix q(6, 2);
    q(0, 0) = 1.0;
    q(1, 1) = 1.0;
    const SelectionResult sel = select_core_elements(q, SketchBudget(6));
    const VarianceBound vb = variance_upper_bound(q, sel.sketch, 1.0);
    // tr((X'X)^{-1}) = p, so the leading term is sigma^2 p^3.
    CHECK(vb.leading_term == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("variance closed form matches a densified oracle") {
    Rng rng(193);
    const DesignMatrix x = random_matrix(30, 3, rng);
    const SelectionResult sel = select_core_elements(x, SketchBudget(12));
    const double sigma2 = 1.7;

    const double got = variance_closed_form(x, sel.sketch, sigma2);

    const oracles::Mat xs = oracles::from_design(sel.sketch.to_dense());
    const oracles::Mat g = oracles::matmul(oracles::transpose(xs), oracles::from_design(x));
    const oracles::Mat m = oracles::matmul(oracles::gauss_jordan_inverse(g), oracles::transpose(xs));
    double frob2 = 0.0;
    for (double v : m.a) frob2 += v * v;
    CHECK(got == doctest::Approx(sigma2 * frob2).epsilon(1e-9));
}

TEST_CASE("variance bound dominates a Monte Carlo estimate when lambda0 is small") {
    Rng rng(197);
    ExperimentConfig cfg;
    cfg.n = 50;
    cfg.p = 3;
    cfg.alpha = 0.3;
    cfg.perturb_scale = 1e-3;
    cfg.seed = 11;
    Rng gen_rng(cfg.seed);
    const DesignMatrix x = sparsify(gen_design(cfg, gen_rng), cfg.alpha, cfg.perturb_scale, gen_rng);
    const Vector beta(3, 1.0);
    const double sigma2 = 0.5;

    const SelectionResult sel = select_core_elements(x, SketchBudget(20));
    const VarianceBound vb = variance_upper_bound(x, sel.sketch, sigma2);
    REQUIRE(vb.lambda0 < 0.3);

    const Vector f = matvec(x, beta);
    double acc = 0.0;
    const int draws = 5000;
    for (int d = 0; d < draws; ++d) {
        Vector y = f;
        for (double& v : y) v += std::sqrt(sigma2) * rng.normal();
        const Vector b = core_estimate_with_sketch(x, y, sel.sketch).beta;
        double e = 0.0;
        for (std::size_t j = 0; j < 3; ++j) e += (b[j] - beta[j]) * (b[j] - beta[j]);
        acc += e;
    }
    const double empirical = acc / draws;
    CHECK(vb.leading_term >= empirical);
    // and the closed form should match the Monte Carlo estimate tightly
    CHECK(variance_closed_form(x, sel.sketch, sigma2) == doctest::Approx(empirical).epsilon(0.1));
}

TEST_CASE("variance bound dominates the closed form on seeded instances") {
    int checked = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(3000 + static_cast<std::uint64_t>(seed));
        const DesignMatrix x = random_matrix(60, 4, rng);
        const SelectionResult sel = select_core_elements(x, SketchBudget(40));
        const VarianceBound vb = variance_upper_bound(x, sel.sketch, 1.0);
        if (vb.lambda0 >= 0.3) continue;
        ++checked;
        CHECK(vb.leading_term >= variance_closed_form(x, sel.sketch, 1.0));
    }
    CHECK(checked >= 90);  // almost every instance qualifies at this budget
}

TEST_CASE("eps' threshold hand instance") {
    // kappa = 1, ||y|| / ||res|| = 2, eps = 4 -> 1/3.
    DesignMatrix x(4, 1);
    x(0, 0) = 1.0;
    const Vector y{std::sqrt(3.0), 1.0, 0.0, 0.0};
    CHECK(eps_prime_threshold(x, y, 4.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("eps' threshold stays below 1 / kappa^2") {
    Rng rng(199);
    const DesignMatrix x = random_matrix(40, 3, rng);
    Vector y(40);
    for (double& v : y) v = rng.normal();
    const double k = condition_number(x);
    const double big = eps_prime_threshold(x, y, 1e12);
    CHECK(big < 1.0 / (k * k));
    CHECK(eps_prime_threshold(x, y, 1.0) < big);  // increasing in eps
}

TEST_CASE("eps' threshold rejects an in-span response") {
    DesignMatrix x(4, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 2.0;
    const Vector y{1.0, 2.0, 0.0, 0.0};  // exactly in the span
    CHECK_THROWS_AS(eps_prime_threshold(x, y, 1.0), ZeroResidual);
}

TEST_CASE("empirical eps") {
    Rng rng(211);
    const DesignMatrix x = random_matrix(30, 3, rng);
    Vector y(30);
    for (double& v : y) v = rng.normal();
    const Vector bols = ols_full(x, y).beta;

    CHECK(eps_empirical(x, y, bols, bols) == doctest::Approx(0.0).epsilon(1e-14));

    Vector off = bols;
    off[0] += 0.25;
    const double e = eps_empirical(x, y, off, bols);
    CHECK(e >= -1e-12);

    // direct two-residual oracle
    auto res2 = [&](const Vector& b) {
        const Vector f = matvec(x, b);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - f[i]) * (y[i] - f[i]);
        return s;
    };
    CHECK(e == doctest::Approx(res2(off) / res2(bols) - 1.0).epsilon(1e-12));
}

TEST_CASE("theoretical eps") {
    DesignMatrix x(3, 1);
    x(0, 0) = 1.0;
    const Vector y{0.0, 3.0, 4.0};  // orthogonal to the span: ||y|| / ||res|| = 1

    CHECK(eps_theoretical(x, y, 0.0) == doctest::Approx(0.0));
    CHECK(eps_theoretical(x, y, 0.1) == doctest::Approx((0.1 * 2.0 / 0.9) * (0.1 * 2.0 / 0.9)).epsilon(1e-12));
    CHECK_THROWS_AS(eps_theoretical(x, y, 1.0), InvalidEpsPrime);
}

TEST_CASE("eps round trip: theoretical(threshold(eps)) = eps") {
    Rng rng(223);
    const DesignMatrix x = random_matrix(50, 4, rng);
    Vector y(50);
    for (double& v : y) v = rng.normal();
    for (const double eps : {0.1, 1.0, 10.0}) {
        const double thr = eps_prime_threshold(x, y, eps);
        CHECK(eps_theoretical(x, y, thr) == doctest::Approx(eps).epsilon(1e-8));
    }
}

TEST_CASE("uniform budget recommendation") {
    SUBCASE("zero eps' caps at ceil(alpha n) - 1") {
        const auto rec = recommend_r_uniform(0.5, 1000, 10, 0.0, 30.0);
        CHECK(rec.capped);
        CHECK(rec.r == 499);
    }

    SUBCASE("matches direct formula arithmetic") {
        const double alpha = 1.0, eps_prime = 0.02, snorm = 1010.0;
        const index_t n = 10000, p = 100;
        const auto rec = recommend_r_uniform(alpha, n, p, eps_prime, snorm);
        const double deduction = std::pow(alpha * eps_prime * snorm, 2.0 / 3.0) /
                                 std::cbrt(2.0 * static_cast<double>(n) * static_cast<double>(p));
        const double target = static_cast<double>(n) * (alpha - deduction);
        CHECK(rec.r == static_cast<index_t>(std::ceil(target)));
        CHECK(!rec.capped);
    }

    SUBCASE("larger eps' never increases the recommendation") {
        index_t prev = 10001;
        for (const double ep : {0.001, 0.01, 0.05, 0.2}) {
            const auto rec = recommend_r_uniform(0.8, 10000, 50, ep, 700.0);
            CHECK(rec.r <= prev);
            prev = rec.r;
        }
    }
}

TEST_CASE("normal budget recommendation") {
    SUBCASE("chi-squared(1) quantile matches the bisection oracle") {
        CHECK(chi_squared_1_quantile(0.5) == doctest::Approx(0.454936).epsilon(1e-4));
        for (const double phi : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
            CHECK(std::abs(chi_squared_1_quantile(phi) - chi2_1_quantile_bisect(phi)) <= 1e-8);
        }
    }

    SUBCASE("matches direct formula arithmetic on both min branches") {
        const index_t n = 10000, p = 100;
        const double snorm = 1000.0;
        auto expected_r = [&](double alpha, double deduction) {
            const double target = static_cast<double>(n) * (alpha - deduction);
            index_t r = std::max<index_t>(1, static_cast<index_t>(std::ceil(target)));
            const index_t cap = static_cast<index_t>(std::ceil(alpha * static_cast<double>(n))) - 1;
            return std::min(r, cap);  // the recommendation must stay below alpha n
        };
        // small phi: the alpha*phi branch is active
        {
            const double alpha = 0.9, phi = 1e-4, ep = 0.5;
            const auto rec = recommend_r_normal(alpha, n, p, ep, snorm, phi);
            const double second = (ep * snorm) * (ep * snorm) /
                                  (2.0 * chi_squared_1_quantile(phi) * static_cast<double>(n) * static_cast<double>(p));
            const double deduction = std::min(alpha * phi, second);
            CHECK(deduction == alpha * phi);
            CHECK(rec.r == expected_r(alpha, deduction));
        }
        // large phi: the quantile branch is active
        {
            const double alpha = 0.9, phi = 0.9, ep = 0.005;
            const auto rec = recommend_r_normal(alpha, n, p, ep, snorm, phi);
            const double second = (ep * snorm) * (ep * snorm) /
                                  (2.0 * chi_squared_1_quantile(phi) * static_cast<double>(n) * static_cast<double>(p));
            CHECK(second < alpha * phi);
            CHECK(rec.r == expected_r(alpha, second));
        }
    }

    SUBCASE("recommendation shrinks as phi grows within the quantile branch") {
        // larger phi -> larger G^{-1}(phi) -> smaller deduction -> larger r
        const auto lo = recommend_r_normal(0.9, 10000, 100, 0.005, 1000.0, 0.6);
        const auto hi = recommend_r_normal(0.9, 10000, 100, 0.005, 1000.0, 0.95);
        CHECK(lo.r <= hi.r);
    }
}

TEST_CASE("standard normal quantile") {
    CHECK(standard_normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(standard_normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    for (const double u : {0.001, 0.1, 0.3, 0.7, 0.9, 0.999}) {
        const double z = standard_normal_quantile(u);
        CHECK(phi_cdf(z) == doctest::Approx(u).epsilon(1e-12));
        CHECK(standard_normal_quantile(1.0 - u) == doctest::Approx(-z).epsilon(1e-10));
    }
}

TEST_CASE("bound report is internally consistent") {
    ExperimentConfig cfg;
    cfg.n = 100;
    cfg.p = 4;
    cfg.alpha = 0.3;
    cfg.seed = 17;
    Rng rng(cfg.seed);
    const GeneratedDataset ds = generate(cfg, rng);

    const BoundReport rep = bound_report(ds.x, ds.y, 40, 1.0, ds.sigma2);
    CHECK(rep.kappa >= 1.0);
    CHECK(rep.eps_prime_threshold < 1.0 / (rep.kappa * rep.kappa));
    CHECK(rep.eps_empirical >= -1e-12);
    CHECK(rep.frob_l >= 0.0);
    if (rep.eps_prime_achieved * rep.kappa * rep.kappa < 1.0)
        CHECK(rep.eps_empirical <= rep.eps_theoretical + 1e-12);
}

}  // TEST_SUITE
