#include "core_elements/theory.hpp"

#include <cmath>
#include <limits>

#include "core_elements/estimators.hpp"

namespace core_elements {

namespace {

double trace_of_inverse(const PivotedLu& lu, index_t p) {
    double tr = 0.0;
    Vector e(static_cast<std::size_t>(p), 0.0);
    for (index_t j = 0; j < p; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        const Vector col = lu.solve(e);
        tr += col[static_cast<std::size_t>(j)];
        e[static_cast<std::size_t>(j)] = 0.0;
    }
    return tr;
}

double lambda0_of(const PivotedLu& gram_lu, const DesignMatrix& l, const DesignMatrix& x) {
    const index_t p = x.cols();
    const DesignMatrix ltx = dense_cross_gram(l, x);
    DesignMatrix z(p, p);
    Vector col(static_cast<std::size_t>(p));
    for (index_t j = 0; j < p; ++j) {
        for (index_t i = 0; i < p; ++i) col[static_cast<std::size_t>(i)] = ltx(i, j);
        const Vector zc = gram_lu.solve(col);
        for (index_t i = 0; i < p; ++i) z(i, j) = zc[static_cast<std::size_t>(i)];
    }
    return spectral_norm_info(z, 1e-9, 200000).value;
}

double residual_norm(const DesignMatrix& x, const Vector& y, const Vector& beta) {
    const Vector fit = matvec(x, beta);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - fit[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct OlsContext {
    double kappa;
    double norm_y;
    double norm_res;
};

OlsContext ols_context(const DesignMatrix& x, const Vector& y) {
    OlsContext ctx;
    ctx.kappa = condition_number(x);
    ctx.norm_y = norm2(y);
    ctx.norm_res = residual_norm(x, y, ols_full(x, y).beta);
    return ctx;
}

// "Numerically zero" residual: y lies in the column span up to rounding.
bool residual_is_zero(double norm_res, double norm_y) {
    return norm_res <= 1e-13 * norm_y;
}

}  // namespace

VarianceBound variance_upper_bound(const DesignMatrix& x, const SparseColumnMatrix& sketch,
                                   double sigma2) {
    const index_t p = x.cols();
    const DesignMatrix g = dense_gram(x);
    const PivotedLu lu(g);
    const double tr_inv = trace_of_inverse(lu, p);
    const DesignMatrix l = residual_matrix(x, sketch);
    const double frob_l = frobenius_norm(l);

    VarianceBound vb;
    vb.lambda0 = lambda0_of(lu, l, x);
    vb.expansion_valid = vb.lambda0 < 1.0;
    vb.leading_term =
        sigma2 * static_cast<double>(p) * tr_inv * (static_cast<double>(p) + tr_inv * frob_l * frob_l);
    return vb;
}

double variance_closed_form(const DesignMatrix& x, const SparseColumnMatrix& sketch,
                            double sigma2) {
    const index_t p = x.cols();
    const DesignMatrix g = sparse_gram(sketch, x);
    const DesignMatrix h = sparse_self_gram(sketch);
    const PivotedLu lu(g);

    // ||G^{-1} X*'||_F^2 = tr(G^{-T} G^{-1} H); two batches of p solves.
    DesignMatrix a(p, p);
    Vector col(static_cast<std::size_t>(p));
    for (index_t j = 0; j < p; ++j) {
        for (index_t i = 0; i < p; ++i) col[static_cast<std::size_t>(i)] = h(i, j);
        const Vector ac = lu.solve(col);
        for (index_t i = 0; i < p; ++i) a(i, j) = ac[static_cast<std::size_t>(i)];
    }
    double tr = 0.0;
    for (index_t j = 0; j < p; ++j) {
        for (index_t i = 0; i < p; ++i) col[static_cast<std::size_t>(i)] = a(i, j);
        const Vector bc = lu.solve_transpose(col);
        tr += bc[static_cast<std::size_t>(j)];
    }
    return sigma2 * tr;
}

double eps_prime_threshold(const DesignMatrix& x, const Vector& y, double eps) {
    if (!(eps > 0.0)) throw Error("eps_prime_threshold: eps must be positive");
    const OlsContext ctx = ols_context(x, y);
    if (residual_is_zero(ctx.norm_res, ctx.norm_y))
        throw ZeroResidual("eps_prime_threshold: y lies in the column span of X");
    const double k2 = ctx.kappa * ctx.kappa;
    return (1.0 / k2) / (1.0 + (k2 + 1.0) * ctx.norm_y / (std::sqrt(eps) * ctx.norm_res));
}

double eps_empirical(const DesignMatrix& x, const Vector& y, const Vector& beta_tilde,
                     const Vector& beta_ols) {
    const double res_tilde = residual_norm(x, y, beta_tilde);
    const double res_ols = residual_norm(x, y, beta_ols);
    if (residual_is_zero(res_ols, norm2(y)))
        throw ZeroResidual("eps_empirical: OLS residual is numerically zero");
    return (res_tilde * res_tilde) / (res_ols * res_ols) - 1.0;
}

double eps_theoretical(const DesignMatrix& x, const Vector& y, double eps_prime) {
    const OlsContext ctx = ols_context(x, y);
    const double k2 = ctx.kappa * ctx.kappa;
    if (eps_prime * k2 >= 1.0)
        throw InvalidEpsPrime("eps_theoretical: eps' kappa^2 >= 1");
    if (residual_is_zero(ctx.norm_res, ctx.norm_y))
        throw ZeroResidual("eps_theoretical: y lies in the column span of X");
    const double v = eps_prime * k2 * (k2 + 1.0) * ctx.norm_y / ((1.0 - eps_prime * k2) * ctx.norm_res);
    return v * v;
}

namespace {

BudgetRecommendation budget_from_deduction(double alpha, index_t n, double deduction) {
    const double target = static_cast<double>(n) * (alpha - deduction);
    const index_t cap = static_cast<index_t>(std::ceil(alpha * static_cast<double>(n))) - 1;

    BudgetRecommendation rec;
    index_t r = static_cast<index_t>(std::ceil(target));
    if (r < 1) r = 1;
    if (r > cap) {
        rec.capped = true;
        r = cap >= 1 ? cap : 1;
    }
    rec.r = r;
    return rec;
}

}  // namespace

BudgetRecommendation recommend_r_uniform(double alpha, index_t n, index_t p, double eps_prime,
                                         double spec_norm_x) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("recommend_r_uniform: alpha must lie in (0, 1]");
    if (eps_prime < 0.0 || spec_norm_x < 0.0)
        throw Error("recommend_r_uniform: eps' and ||X||_2 must be nonnegative");
    const double deduction =
        std::pow(alpha * eps_prime * spec_norm_x, 2.0 / 3.0) /
        std::cbrt(2.0 * static_cast<double>(n) * static_cast<double>(p));
    return budget_from_deduction(alpha, n, deduction);
}

BudgetRecommendation recommend_r_normal(double alpha, index_t n, index_t p, double eps_prime,
                                        double spec_norm_x, double phi) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("recommend_r_normal: alpha must lie in (0, 1]");
    if (!(phi > 0.0 && phi < 1.0)) throw Error("recommend_r_normal: phi must lie in (0, 1)");
    const double e = eps_prime * spec_norm_x;
    const double second =
        e * e / (2.0 * chi_squared_1_quantile(phi) * static_cast<double>(n) * static_cast<double>(p));
    const double deduction = std::min(alpha * phi, second);
    return budget_from_deduction(alpha, n, deduction);
}

double standard_normal_quantile(double u) {
    // Wichura (1988), algorithm AS 241, PPND16.
    if (!(u > 0.0 && u < 1.0)) throw Error("standard_normal_quantile: u must lie in (0, 1)");
    const double q = u - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = q < 0.0 ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double chi_squared_1_quantile(double phi) {
    if (!(phi > 0.0 && phi < 1.0)) throw Error("chi_squared_1_quantile: phi must lie in (0, 1)");
    const double z = standard_normal_quantile((1.0 + phi) / 2.0);
    return z * z;
}

BoundReport bound_report(const DesignMatrix& x, const Vector& y, index_t r, double eps,
                         std::optional<double> sigma2) {
    const index_t n = x.rows(), p = x.cols();
    BoundReport rep;

    const CoefficientVector ols = ols_full(x, y);
    const double norm_res = residual_norm(x, y, ols.beta);
    const double s2 = sigma2 ? *sigma2
                             : norm_res * norm_res / static_cast<double>(n > p ? n - p : 1);

    const SelectionResult sel = select_core_elements(x, SketchBudget(r));
    const VarianceBound vb = variance_upper_bound(x, sel.sketch, s2);
    rep.lambda0 = vb.lambda0;
    rep.expansion_valid = vb.expansion_valid;
    rep.variance_bound_leading = vb.leading_term;

    const DesignMatrix l = residual_matrix(x, sel.sketch);
    rep.frob_l = frobenius_norm(l);
    rep.kappa = condition_number(x);
    const double norm_x = spectral_norm_info(x, 1e-9, 0).value;
    const double norm_l = spectral_norm_info(l, 1e-9, 0).value;
    rep.eps_prime_achieved = norm_x > 0.0 ? norm_l / norm_x : 0.0;

    rep.eps_prime_threshold = eps_prime_threshold(x, y, eps);

    const CoefficientVector core = core_estimate_with_sketch(x, y, sel.sketch);
    rep.eps_empirical = eps_empirical(x, y, core.beta, ols.beta);
    if (rep.eps_prime_achieved * rep.kappa * rep.kappa < 1.0)
        rep.eps_theoretical = eps_theoretical(x, y, rep.eps_prime_achieved);
    else
        rep.eps_theoretical = std::numeric_limits<double>::quiet_NaN();
    return rep;
}

}  // namespace core_elements
