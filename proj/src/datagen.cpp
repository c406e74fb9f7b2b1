#include "core_elements/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace core_elements {

void ExperimentConfig::validate() const {
    if (n <= p || p < 1) throw Error("ExperimentConfig: requires n > p >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("ExperimentConfig: alpha must lie in (0, 1]");
    if (!(snr > 0.0)) throw Error("ExperimentConfig: snr must be positive");
    if (beta_true && beta_true->size() != static_cast<std::size_t>(p))
        throw DimensionMismatch("ExperimentConfig: beta_true length differs from p");
    if (n_outliers < 0 || n_outliers >= n) throw Error("ExperimentConfig: n_outliers must lie in [0, n)");
}

Vector ExperimentConfig::resolved_beta() const {
    if (beta_true) return *beta_true;
    return Vector(static_cast<std::size_t>(p), 1.0);
}

DesignMatrix gen_design(const ExperimentConfig& cfg, Rng& rng) {
    cfg.validate();
    const index_t n = cfg.n, p = cfg.p;
    DesignMatrix x(n, p);

    // AR(1) covariance 0.6^|i-j| via the scalar recursion
    // x_0 = z_0, x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j,
    // which realizes the exact Cholesky factor of the covariance.
    const double rho = 0.6;
    const double tail = std::sqrt(1.0 - rho * rho);

    Vector row(static_cast<std::size_t>(p));
    for (index_t i = 0; i < n; ++i) {
        double scale = 1.0;
        if (cfg.distribution == Distribution::D3StudentT3)
            scale = std::sqrt(3.0 / rng.chi_squared(3));
        row[0] = rng.normal();
        for (index_t j = 1; j < p; ++j) row[static_cast<std::size_t>(j)] = rho * row[static_cast<std::size_t>(j - 1)] + tail * rng.normal();
        for (index_t j = 0; j < p; ++j) {
            double v = row[static_cast<std::size_t>(j)];
            switch (cfg.distribution) {
                case Distribution::D1Normal: break;
                case Distribution::D2LogNormal: v = std::exp(v); break;
                case Distribution::D3StudentT3: v *= scale; break;
            }
            x(i, j) = v;
        }
    }
    x.center_columns();
    return x;
}

DesignMatrix sparsify(const DesignMatrix& x, double alpha, double perturb_scale, Rng& rng) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("sparsify: alpha must lie in (0, 1]");
    const index_t n = x.rows(), p = x.cols();
    const index_t total = n * p;
    const index_t m = static_cast<index_t>(std::floor((1.0 - alpha) * static_cast<double>(total)));
    if (m == 0) return x;

    // Partial Fisher-Yates picks m distinct entry positions uniformly.
    std::vector<index_t> positions(static_cast<std::size_t>(total));
    std::iota(positions.begin(), positions.end(), index_t{0});
    for (index_t i = 0; i < m; ++i) {
        const index_t j = i + rng.uniform_index(total - i);
        std::swap(positions[static_cast<std::size_t>(i)], positions[static_cast<std::size_t>(j)]);
    }

    DesignMatrix out = x;
    for (index_t i = 0; i < m; ++i) {
        const index_t pos = positions[static_cast<std::size_t>(i)];
        const index_t col = pos / n;
        const index_t row = pos % n;
        out(row, col) = perturb_scale * rng.normal();
    }
    out.set_centered(false);  // column means are no longer exactly zero
    return out;
}

namespace {

double sample_variance(const Vector& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return v.size() > 1 ? s / (n - 1.0) : 0.0;
}

}  // namespace

ResponseResult gen_response(const DesignMatrix& x, const Vector& beta_true, double snr, Rng& rng) {
    if (!(snr > 0.0)) throw Error("gen_response: snr must be positive");
    Vector f = matvec(x, beta_true);
    const double var = sample_variance(f);
    if (var == 0.0) throw DegenerateSignal("gen_response: Var(X beta) is zero");

    ResponseResult out;
    out.sigma2 = std::isinf(snr) ? 0.0 : var / snr;
    const double sigma = std::sqrt(out.sigma2);
    out.y = std::move(f);
    if (sigma > 0.0)
        for (double& yi : out.y) yi += sigma * rng.normal();
    return out;
}

ResponseResult gen_misspecified(const DesignMatrix& x, const Vector& beta_true, double snr,
                                Misspec h, double amplitude, Rng& rng) {
    if (h == Misspec::None) return gen_response(x, beta_true, snr, rng);
    const index_t p = x.cols();
    const index_t need = (h == Misspec::H3) ? 3 : 8;
    if (p < need) throw DimensionTooSmall("gen_misspecified: p too small for the chosen term");

    const index_t c3 = 2, c8 = 7;  // 1-based columns 3 and 8
    const index_t n = x.rows();
    Vector g(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) {
        double v = 0.0;
        switch (h) {
            case Misspec::H1: v = x(i, c3) * x(i, c8); break;
            case Misspec::H2: v = x(i, c3) * std::sin(x(i, c8)); break;
            case Misspec::H3: v = x(i, c3) * x(i, c3); break;
            case Misspec::None: break;
        }
        g[static_cast<std::size_t>(i)] = v;
    }
    double max_abs = 0.0;
    for (double v : g) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs == 0.0) throw DegenerateMisspec("gen_misspecified: h vanishes on the sample");
    const double c = amplitude / max_abs;

    ResponseResult out = gen_response(x, beta_true, snr, rng);
    for (index_t i = 0; i < n; ++i) out.y[static_cast<std::size_t>(i)] += c * g[static_cast<std::size_t>(i)];
    return out;
}

GeneratedDataset inject_outliers(const DesignMatrix& x, const Vector& y, const Vector& beta_true,
                                 double sigma2, index_t n_outliers, Rng& rng) {
    const index_t n = x.rows(), p = x.cols();
    if (n_outliers >= n) throw Error("inject_outliers: n_outliers must be below n");

    GeneratedDataset ds;
    ds.x = x;
    ds.y = y;
    ds.beta_true = beta_true;
    ds.sigma2 = sigma2;

    if (n_outliers == 0) {
        ds.informative_rows.resize(static_cast<std::size_t>(n));
        std::iota(ds.informative_rows.begin(), ds.informative_rows.end(), index_t{0});
        return ds;
    }

    // Distinct uniformly random positions; the drawn order doubles as the
    // shuffle of the merged outlier types.
    std::vector<index_t> positions(static_cast<std::size_t>(n));
    std::iota(positions.begin(), positions.end(), index_t{0});
    for (index_t i = 0; i < n_outliers; ++i) {
        const index_t j = i + rng.uniform_index(n - i);
        std::swap(positions[static_cast<std::size_t>(i)], positions[static_cast<std::size_t>(j)]);
    }
    positions.resize(static_cast<std::size_t>(n_outliers));

    const index_t q = (n_outliers + 3) / 4;  // ceil(n_o / 4)
    index_t remaining = n_outliers;
    index_t counts[4];
    for (int t = 0; t < 3; ++t) {
        counts[t] = std::min(q, remaining);
        remaining -= counts[t];
    }
    counts[3] = remaining;

    index_t idx = 0;
    for (int t = 0; t < 4; ++t) {
        for (index_t c = 0; c < counts[t]; ++c, ++idx) {
            const index_t row = positions[static_cast<std::size_t>(idx)];
            switch (t) {
                case 0: {  // O1
                    for (index_t j = 0; j < p; ++j) ds.x(row, j) = -10.0 + rng.normal();
                    ds.y[static_cast<std::size_t>(row)] = 1000.0 + 10.0 * rng.normal();
                    break;
                }
                case 1: {  // O2
                    for (index_t j = 0; j < p; ++j) ds.x(row, j) = 10.0 + rng.normal();
                    ds.y[static_cast<std::size_t>(row)] = -500.0 + 10.0 * rng.normal();
                    break;
                }
                case 2: {  // O3
                    for (index_t j = 0; j < p; ++j) ds.x(row, j) = rng.uniform();
                    ds.y[static_cast<std::size_t>(row)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
                    break;
                }
                case 3: {  // O4
                    double fit = 0.0;
                    for (index_t j = 0; j < p; ++j) {
                        const double v = rng.normal();
                        ds.x(row, j) = v;
                        fit += v * beta_true[static_cast<std::size_t>(j)];
                    }
                    ds.y[static_cast<std::size_t>(row)] = fit + rng.student_t(2);
                    break;
                }
            }
        }
    }

    ds.outlier_rows = positions;
    std::sort(ds.outlier_rows.begin(), ds.outlier_rows.end());
    std::vector<char> is_outlier(static_cast<std::size_t>(n), 0);
    for (index_t row : ds.outlier_rows) is_outlier[static_cast<std::size_t>(row)] = 1;
    ds.informative_rows.reserve(static_cast<std::size_t>(n - n_outliers));
    for (index_t i = 0; i < n; ++i)
        if (!is_outlier[static_cast<std::size_t>(i)]) ds.informative_rows.push_back(i);
    return ds;
}

namespace {

GeneratedDataset extract_rows(const GeneratedDataset& ds, const std::vector<index_t>& rows,
                              const std::vector<char>& outlier_flag) {
    GeneratedDataset out;
    out.x = ds.x.submatrix_rows(rows);
    out.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out.y[i] = ds.y[static_cast<std::size_t>(rows[i])];
    out.beta_true = ds.beta_true;
    out.sigma2 = ds.sigma2;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (outlier_flag[static_cast<std::size_t>(rows[i])])
            out.outlier_rows.push_back(static_cast<index_t>(i));
        else
            out.informative_rows.push_back(static_cast<index_t>(i));
    }
    return out;
}

}  // namespace

TrainTestSplit train_test_split(const GeneratedDataset& data, double ratio, Rng& rng) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error("train_test_split: ratio must lie in (0, 1)");

    std::vector<index_t> informative = data.informative_rows;
    rng.shuffle(informative);
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(ratio * static_cast<double>(informative.size())));

    TrainTestSplit split;
    split.train_rows.assign(informative.begin(), informative.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.train_rows.insert(split.train_rows.end(), data.outlier_rows.begin(), data.outlier_rows.end());
    split.test_rows.assign(informative.begin() + static_cast<std::ptrdiff_t>(n_train), informative.end());
    std::sort(split.train_rows.begin(), split.train_rows.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());

    std::vector<char> outlier_flag(static_cast<std::size_t>(data.x.rows()), 0);
    for (index_t row : data.outlier_rows) outlier_flag[static_cast<std::size_t>(row)] = 1;
    split.train = extract_rows(data, split.train_rows, outlier_flag);
    split.test = extract_rows(data, split.test_rows, outlier_flag);
    return split;
}

GeneratedDataset generate(const ExperimentConfig& cfg, Rng& rng) {
    cfg.validate();
    DesignMatrix x = gen_design(cfg, rng);
    if (cfg.alpha < 1.0) x = sparsify(x, cfg.alpha, cfg.perturb_scale, rng);
    const Vector beta = cfg.resolved_beta();
    ResponseResult resp = cfg.misspec == Misspec::None
                              ? gen_response(x, beta, cfg.snr, rng)
                              : gen_misspecified(x, beta, cfg.snr, cfg.misspec, cfg.misspec_amplitude, rng);
    return inject_outliers(x, resp.y, beta, resp.sigma2, cfg.n_outliers, rng);
}

const char* to_string(Distribution d) {
    switch (d) {
        case Distribution::D1Normal: return "D1";
        case Distribution::D2LogNormal: return "D2";
        case Distribution::D3StudentT3: return "D3";
    }
    return "?";
}

const char* to_string(Misspec m) {
    switch (m) {
        case Misspec::None: return "none";
        case Misspec::H1: return "H1";
        case Misspec::H2: return "H2";
        case Misspec::H3: return "H3";
    }
    return "?";
}

}  // namespace core_elements
