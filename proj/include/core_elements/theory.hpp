#pragma once

#include <optional>

#include "core_elements/matrix.hpp"
#include "core_elements/selection.hpp"

namespace core_elements {

/// Leading term of the variance upper bound together with the spectral radius
/// lambda0 that governs the validity of the expansion behind it. The
/// (1 + O(lambda0)) factor is not a computable constant, so the leading term
/// and lambda0 are reported separately; expansion_valid is lambda0 < 1.
struct VarianceBound {
    double leading_term = 0.0;
    double lambda0 = 0.0;
    bool expansion_valid = false;
};

/// sigma^2 p tr((X'X)^{-1}) (p + tr((X'X)^{-1}) ||L||_F^2), with
/// lambda0 = ||(X'X)^{-1} L'X||_2 computed exactly.
VarianceBound variance_upper_bound(const DesignMatrix& x, const SparseColumnMatrix& sketch,
                                   double sigma2);

/// Exact estimator variance sigma^2 ||(X*'X)^{-1} X*'||_F^2, evaluated by
/// solving p right-hand sides against X*'X and its transpose rather than
/// forming an inverse.
double variance_closed_form(const DesignMatrix& x, const SparseColumnMatrix& sketch,
                            double sigma2);

/// Largest eps' for which the (1 + eps) relative-error guarantee applies:
/// (1 / kappa^2) (1 + (kappa^2 + 1) ||y|| / (sqrt(eps) ||y - X b_ols||))^{-1}.
double eps_prime_threshold(const DesignMatrix& x, const Vector& y, double eps);

/// ||y - X b_tilde||^2 / ||y - X b_ols||^2 - 1.
double eps_empirical(const DesignMatrix& x, const Vector& y, const Vector& beta_tilde,
                     const Vector& beta_ols);

/// (eps' kappa^2 (kappa^2 + 1) ||y|| / ((1 - eps' kappa^2) ||y - X b_ols||))^2.
/// Requires eps' kappa^2 < 1.
double eps_theoretical(const DesignMatrix& x, const Vector& y, double eps_prime);

/// A recommended per-column budget; capped flags that the formula demanded
/// r >= alpha n, in which case the largest admissible value is returned.
struct BudgetRecommendation {
    index_t r = 0;
    bool capped = false;
};

/// Smallest integer r < alpha n with
/// r / n >= alpha - (alpha eps' ||X||_2)^{2/3} / (2 n p)^{1/3}.
BudgetRecommendation recommend_r_uniform(double alpha, index_t n, index_t p, double eps_prime,
                                         double spec_norm_x);

/// Smallest integer r < alpha n with
/// r / n >= alpha - min{ alpha phi, (eps' ||X||_2)^2 / (2 G^{-1}(phi) n p) },
/// G the chi-squared(1) CDF.
BudgetRecommendation recommend_r_normal(double alpha, index_t n, index_t p, double eps_prime,
                                        double spec_norm_x, double phi);

/// Quantile of the standard normal distribution (Wichura's AS 241, double
/// precision).
double standard_normal_quantile(double u);

/// G^{-1}(phi) for the chi-squared distribution with 1 degree of freedom,
/// via the normal-quantile identity G^{-1}(phi) = (Phi^{-1}((1 + phi)/2))^2.
double chi_squared_1_quantile(double phi);

/// Every closed-form diagnostic for one dataset and one budget r.
struct BoundReport {
    double lambda0 = 0.0;
    double frob_l = 0.0;
    double variance_bound_leading = 0.0;
    double kappa = 0.0;
    double eps_prime_threshold = 0.0;
    double eps_prime_achieved = 0.0;  // ||X - X*||_2 / ||X||_2
    double eps_empirical = 0.0;
    double eps_theoretical = 0.0;  // NaN when eps'_achieved kappa^2 >= 1
    bool expansion_valid = false;  // lambda0 < 1
};

/// sigma2 defaults to the OLS residual estimate ||y - X b_ols||^2 / (n - p).
BoundReport bound_report(const DesignMatrix& x, const Vector& y, index_t r, double eps,
                         std::optional<double> sigma2 = std::nullopt);

}  // namespace core_elements
