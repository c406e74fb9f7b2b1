// Benchmark and estimation CLI around the core-elements library.
//
//   corebench run    --config cfg.json [--out report.csv] [--format csv|json]
//   corebench fit    --input data.csv --method core --r 200 [...]
//   corebench bounds --config cfg.json | --input data.csv  --r-grid 2p,4p [...]
//   corebench gen    --config cfg.json --out data.csv [--meta meta.json]
//
// Errors print a machine-readable JSON object to stderr and exit nonzero.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "core_elements/baselines.hpp"
#include "core_elements/bench.hpp"
#include "core_elements/datagen.hpp"
#include "core_elements/estimators.hpp"
#include "core_elements/mom.hpp"
#include "core_elements/theory.hpp"

namespace ce = core_elements;
using json = nlohmann::json;

namespace {

std::vector<ce::index_t> parse_grid(const std::string& text, ce::index_t p) {
    std::vector<ce::index_t> grid;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (tok.back() == 'p' || tok.back() == 'P') {
            tok.pop_back();
            grid.push_back(static_cast<ce::index_t>(std::llround(std::stod(tok) * static_cast<double>(p))));
        } else {
            grid.push_back(static_cast<ce::index_t>(std::stoll(tok)));
        }
    }
    if (grid.empty()) throw ce::Error("empty r grid");
    return grid;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ce::IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw ce::IoError("write to " + path + " failed");
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::string& format_override) {
    ce::BenchConfig cfg = ce::load_config(config_path);
    if (!out_override.empty()) cfg.output = out_override;
    if (!format_override.empty())
        cfg.format = format_override == "json" ? ce::ReportFormat::Json : ce::ReportFormat::Csv;

    const ce::RunReport report = ce::run_experiment(cfg);

    std::cout << "method,r,mse_mean,mse_stderr,pmse_mean,pmse_stderr,wall_mean_s,failures\n";
    for (const auto& a : report.aggregates) {
        std::cout << a.method << ',' << a.r << ',' << ce::format_double(a.mse_mean) << ','
                  << ce::format_double(a.mse_stderr) << ',' << ce::format_double(a.pmse_mean) << ','
                  << ce::format_double(a.pmse_stderr) << ',' << ce::format_double(a.wall_mean) << ','
                  << a.failures << '\n';
    }
    if (!cfg.output.empty()) {
        ce::emit_report(report, cfg.format, cfg.output);
        std::cerr << "report written to " << cfg.output << "\n";
    }
    return 0;
}

int cmd_fit(const std::string& input, const std::string& method_text, ce::index_t r,
            int response_col, bool no_header, bool center, std::uint64_t seed,
            ce::index_t bootstrap, const std::string& out_path) {
    auto [x, y] = ce::ingest_csv(input, response_col, !no_header, center);
    const ce::MethodSpec method = ce::MethodSpec::parse(method_text);
    if (method.uses_r() && r < 1) throw ce::Error("--r is required for method " + method.label());

    ce::Rng rng = ce::Rng::stream(seed, 0);
    const ce::CoefficientVector fit = ce::fit_method(method, x, y, r, rng);

    json out;
    out["method"] = fit.method;
    out["n"] = x.rows();
    out["p"] = x.cols();
    if (method.uses_r()) out["r"] = r;
    out["beta"] = fit.beta;
    if (!fit.diagnostics.empty()) out["diagnostics"] = fit.diagnostics;

    if (bootstrap > 0) {
        // Bootstrap over rows: refit on resamples, score against the
        // full-sample OLS estimate.
        const ce::Vector beta_ref = ce::ols_full(x, y).beta;
        std::vector<ce::Vector> estimates;
        ce::index_t failures = 0;
        for (ce::index_t b = 0; b < bootstrap; ++b) {
            ce::Rng brng = ce::Rng::stream(seed, 1 + static_cast<std::uint64_t>(b));
            std::vector<ce::index_t> rows(static_cast<std::size_t>(x.rows()));
            for (auto& row : rows) row = brng.uniform_index(x.rows());
            std::sort(rows.begin(), rows.end());
            const ce::DesignMatrix xb = x.submatrix_rows(rows);
            ce::Vector yb(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) yb[i] = y[static_cast<std::size_t>(rows[i])];
            try {
                estimates.push_back(ce::fit_method(method, xb, yb, r, brng).beta);
            } catch (const ce::Error&) {
                ++failures;
            }
        }
        json bj;
        bj["replications"] = bootstrap;
        bj["failures"] = failures;
        bj["reference"] = "full_ols";
        if (!estimates.empty()) {
            bj["mse_mean"] = ce::mse(estimates, beta_ref);
            double acc = 0.0, acc2 = 0.0;
            const double denom = ce::norm2_squared(beta_ref);
            for (const auto& b : estimates) {
                double d = 0.0;
                for (std::size_t j2 = 0; j2 < b.size(); ++j2) {
                    const double e = b[j2] - beta_ref[j2];
                    d += e * e;
                }
                const double v = d / denom;
                acc += v;
                acc2 += v * v;
            }
            const double m = acc / static_cast<double>(estimates.size());
            if (estimates.size() > 1) {
                const double var =
                    (acc2 - static_cast<double>(estimates.size()) * m * m) /
                    static_cast<double>(estimates.size() - 1);
                bj["mse_stderr"] = std::sqrt(std::max(var, 0.0) / static_cast<double>(estimates.size()));
            }
        }
        out["bootstrap"] = std::move(bj);
    }

    const std::string text = out.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
    return 0;
}

int cmd_bounds(const std::string& config_path, const std::string& input, int response_col,
               bool no_header, bool center, const std::string& grid_text, double eps,
               std::optional<double> sigma2, const std::string& format, const std::string& out_path) {
    ce::DesignMatrix x;
    ce::Vector y;
    std::optional<double> s2 = sigma2;
    if (!config_path.empty()) {
        const ce::BenchConfig cfg = ce::load_config(config_path);
        ce::Rng rng = ce::Rng::stream(cfg.scenario.seed, 0);
        const ce::GeneratedDataset ds = ce::generate(cfg.scenario, rng);
        x = ds.x;
        y = ds.y;
        if (!s2) s2 = ds.sigma2;
    } else if (!input.empty()) {
        std::tie(x, y) = ce::ingest_csv(input, response_col, !no_header, center);
    } else {
        throw ce::Error("bounds: provide --config or --input");
    }

    const auto grid = parse_grid(grid_text, x.cols());
    std::string csv =
        "r,eps_prime_achieved,eps_prime_threshold,eps_empirical,eps_theoretical,lambda0,frob_L,"
        "variance_bound_leading,kappa\n";
    json rows = json::array();
    for (const ce::index_t r : grid) {
        const ce::BoundReport rep = ce::bound_report(x, y, r, eps, s2);
        csv += std::to_string(r) + ',' + ce::format_double(rep.eps_prime_achieved) + ',' +
               ce::format_double(rep.eps_prime_threshold) + ',' + ce::format_double(rep.eps_empirical) +
               ',' + (std::isfinite(rep.eps_theoretical) ? ce::format_double(rep.eps_theoretical) : "") +
               ',' + ce::format_double(rep.lambda0) + ',' + ce::format_double(rep.frob_l) + ',' +
               ce::format_double(rep.variance_bound_leading) + ',' + ce::format_double(rep.kappa) + '\n';
        json rj;
        rj["r"] = r;
        rj["eps_prime_achieved"] = rep.eps_prime_achieved;
        rj["eps_prime_threshold"] = rep.eps_prime_threshold;
        rj["eps_empirical"] = rep.eps_empirical;
        rj["eps_theoretical"] =
            std::isfinite(rep.eps_theoretical) ? json(rep.eps_theoretical) : json(nullptr);
        rj["lambda0"] = rep.lambda0;
        rj["frob_L"] = rep.frob_l;
        rj["variance_bound_leading"] = rep.variance_bound_leading;
        rj["kappa"] = rep.kappa;
        rj["expansion_valid"] = rep.expansion_valid;
        rows.push_back(std::move(rj));
    }

    const std::string text = format == "json" ? rows.dump(2) + "\n" : csv;
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
    return 0;
}

int cmd_gen(const std::string& config_path, const std::string& out_path,
            const std::string& meta_path) {
    const ce::BenchConfig cfg = ce::load_config(config_path);
    ce::Rng rng = ce::Rng::stream(cfg.scenario.seed, 0);
    const ce::GeneratedDataset ds = ce::generate(cfg.scenario, rng);

    std::string csv;
    for (ce::index_t j = 0; j < ds.x.cols(); ++j) csv += "x" + std::to_string(j + 1) + ",";
    csv += "y\n";
    for (ce::index_t i = 0; i < ds.x.rows(); ++i) {
        for (ce::index_t j = 0; j < ds.x.cols(); ++j) csv += ce::format_double(ds.x(i, j)) + ",";
        csv += ce::format_double(ds.y[static_cast<std::size_t>(i)]) + "\n";
    }
    write_text(out_path, csv);

    if (!meta_path.empty()) {
        json meta;
        meta["n"] = ds.x.rows();
        meta["p"] = ds.x.cols();
        meta["beta_true"] = ds.beta_true;
        meta["sigma2"] = ds.sigma2;
        meta["outlier_rows"] = ds.outlier_rows;
        meta["seed"] = cfg.scenario.seed;
        meta["distribution"] = ce::to_string(cfg.scenario.distribution);
        meta["alpha"] = cfg.scenario.alpha;
        write_text(meta_path, meta.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"core-elements least squares: benchmark runner and estimators"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "synthetic or ingested sweep from a JSON config");
    std::string run_config, run_out, run_format;
    run->add_option("--config", run_config, "JSON config path")->required();
    run->add_option("--out", run_out, "override the configured output path");
    run->add_option("--format", run_format, "override the output format (csv|json)");

    // fit
    auto* fit = app.add_subcommand("fit", "single estimate on a CSV file");
    std::string fit_input, fit_method_text = "full_ols", fit_out;
    ce::index_t fit_r = 0, fit_bootstrap = 0;
    int fit_resp = -1;
    bool fit_no_header = false, fit_center = false;
    std::uint64_t fit_seed = 0;
    fit->add_option("--input", fit_input, "CSV file")->required();
    fit->add_option("--method", fit_method_text, "full_ols|unif|blev|slev[:l]|iboss|core|mom_core:k|mom_ols:k");
    fit->add_option("--r", fit_r, "row / per-column element budget");
    fit->add_option("--response-col", fit_resp, "response column (negative counts from the end)");
    fit->add_flag("--no-header", fit_no_header, "the CSV has no header row");
    fit->add_flag("--center", fit_center, "center predictor columns after ingestion");
    fit->add_option("--seed", fit_seed, "rng seed");
    fit->add_option("--bootstrap", fit_bootstrap, "bootstrap replications (rows resampled with replacement)");
    fit->add_option("--out", fit_out, "write the JSON result here instead of stdout");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "approximation-bound diagnostics over an r grid");
    std::string b_config, b_input, b_grid = "2p,4p,6p,8p,10p", b_format = "csv", b_out;
    int b_resp = -1;
    bool b_no_header = false, b_center = false;
    double b_eps = 1.0;
    double b_sigma2 = -1.0;
    bounds->add_option("--config", b_config, "JSON config (synthetic data)");
    bounds->add_option("--input", b_input, "CSV file (ingested data)");
    bounds->add_option("--r-grid", b_grid, "comma list; entries like 250 or 4p");
    bounds->add_option("--eps", b_eps, "target eps for the threshold column");
    bounds->add_option("--sigma2", b_sigma2, "noise variance override (default: OLS residual estimate)");
    bounds->add_option("--response-col", b_resp, "response column for --input");
    bounds->add_flag("--no-header", b_no_header, "the CSV has no header row");
    bounds->add_flag("--center", b_center, "center predictor columns after ingestion");
    bounds->add_option("--format", b_format, "csv|json");
    bounds->add_option("--out", b_out, "output path (default stdout)");

    // gen
    auto* gen = app.add_subcommand("gen", "write a synthetic dataset to CSV");
    std::string g_config, g_out, g_meta;
    gen->add_option("--config", g_config, "JSON config path")->required();
    gen->add_option("--out", g_out, "CSV output path")->required();
    gen->add_option("--meta", g_meta, "also write generation metadata (JSON)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_config, run_out, run_format);
        if (*fit)
            return cmd_fit(fit_input, fit_method_text, fit_r, fit_resp, fit_no_header, fit_center,
                           fit_seed, fit_bootstrap, fit_out);
        if (*bounds)
            return cmd_bounds(b_config, b_input, b_resp, b_no_header, b_center, b_grid, b_eps,
                              b_sigma2 >= 0.0 ? std::optional<double>(b_sigma2) : std::nullopt,
                              b_format, b_out);
        if (*gen) return cmd_gen(g_config, g_out, g_meta);
    } catch (const ce::Error& e) {
        json err;
        err["error"] = e.code();
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "error";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
