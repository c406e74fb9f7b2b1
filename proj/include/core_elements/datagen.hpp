#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core_elements/matrix.hpp"
#include "core_elements/rng.hpp"

namespace core_elements {

enum class Distribution { D1Normal, D2LogNormal, D3StudentT3 };
enum class Misspec { None, H1, H2, H3 };

/// Full description of one synthetic scenario. AR covariance parameter is
/// 0.6^|i-j|; beta_true defaults to all ones; snr may be +infinity for a
/// noiseless response.
struct ExperimentConfig {
    index_t n = 0;
    index_t p = 0;
    Distribution distribution = Distribution::D1Normal;
    double alpha = 1.0;  // sparsity ratio in (0, 1]; 1 = dense
    double snr = 4.0;
    std::optional<Vector> beta_true;
    index_t r = 0;  // per-column budget (used by single-fit callers)
    index_t k = 1;  // MOM block count
    index_t n_outliers = 0;
    Misspec misspec = Misspec::None;
    double misspec_amplitude = 10.0;
    double perturb_scale = 1e-2;  // std of the perturbation added to zeroed entries
    std::uint64_t seed = 0;

    void validate() const;
    Vector resolved_beta() const;  // beta_true or all-ones
};

struct GeneratedDataset {
    DesignMatrix x;
    Vector y;
    Vector beta_true;
    double sigma2 = 0.0;
    std::vector<index_t> outlier_rows;      // sorted
    std::vector<index_t> informative_rows;  // sorted complement
};

/// Rows i.i.d. from the configured distribution with AR covariance
/// 0.6^|i-j|, then column-centered. D2 exponentiates the underlying normal;
/// D3 scales each row by sqrt(3 / chi-squared(3)).
DesignMatrix gen_design(const ExperimentConfig& cfg, Rng& rng);

/// Zero a uniformly random subset of floor((1 - alpha) n p) entries, then add
/// an independent N(0, perturb_scale^2) perturbation to each zeroed entry.
/// alpha = 1 returns the input unchanged. The output is not re-centered.
DesignMatrix sparsify(const DesignMatrix& x, double alpha, double perturb_scale, Rng& rng);

struct ResponseResult {
    Vector y;
    double sigma2 = 0.0;
};

/// y = X beta + eps with sigma^2 = var(X beta) / snr (sample variance).
ResponseResult gen_response(const DesignMatrix& x, const Vector& beta_true, double snr, Rng& rng);

/// y = X beta + h(X) + eps, with the scale of h calibrated so that
/// max_i |h(x_i)| equals amplitude. H1: c x_i3 x_i8; H2: c x_i3 sin(x_i8);
/// H3: c x_i3^2 (1-based column indices).
ResponseResult gen_misspecified(const DesignMatrix& x, const Vector& beta_true, double snr,
                                Misspec h, double amplitude, Rng& rng);

/// Replace n_o uniformly random rows with outliers: ceil(n_o / 4) each of
/// O1 (y = 1000 + 10 zeta, x = -10 1_p + zeta), O2 (y = -500 + 10 zeta,
/// x = 10 1_p + zeta), O3 (Bernoulli y, uniform [0,1]^p x), and the remainder
/// O4 (x ~ N(0, I_p), y = x'beta + t_2 noise).
GeneratedDataset inject_outliers(const DesignMatrix& x, const Vector& y, const Vector& beta_true,
                                 double sigma2, index_t n_outliers, Rng& rng);

struct TrainTestSplit {
    GeneratedDataset train;
    GeneratedDataset test;
    std::vector<index_t> train_rows;  // original row indices, sorted
    std::vector<index_t> test_rows;
};

/// Uniformly random split of the informative rows with exact
/// floor(ratio |I|) / remainder sizes; every outlier row goes to the training
/// side, so the test set is never corrupted.
TrainTestSplit train_test_split(const GeneratedDataset& data, double ratio, Rng& rng);

/// The full pipeline: design, sparsify, response (misspecified or not),
/// outliers. Pure function of (cfg, rng).
GeneratedDataset generate(const ExperimentConfig& cfg, Rng& rng);

const char* to_string(Distribution d);
const char* to_string(Misspec m);

}  // namespace core_elements
