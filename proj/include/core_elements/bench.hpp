#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core_elements/datagen.hpp"
#include "core_elements/estimators.hpp"
#include "core_elements/matrix.hpp"
#include "core_elements/rng.hpp"

namespace core_elements {

/// One method of the comparison roster. Parsed from "name" or "name:param"
/// (param is lambda for slev, the block count k for mom methods).
/// pre_reduction > 0 first reduces the data uniformly to ceil(pre_reduction*r)
/// rows before a deterministic selection (core / iboss); default off.
struct MethodSpec {
    enum class Kind { FullOls, Unif, Blev, Slev, Iboss, Core, MomCore, MomOls };

    Kind kind = Kind::FullOls;
    double lambda = 0.9;
    index_t k = 1;
    double pre_reduction = 0.0;

    static MethodSpec parse(const std::string& text);
    std::string label() const;
    bool uses_r() const { return kind != Kind::FullOls && kind != Kind::MomOls; }
};

/// One (method, r, replication) outcome. NaN numeric fields render as empty
/// CSV cells / JSON nulls; failure carries the reason when the fit failed.
struct ReplicationCell {
    std::string method;
    index_t r = 0;
    index_t replication = 0;
    double mse = 0.0;
    double pmse = 0.0;
    double wall_time_s = 0.0;
    double kappa = 0.0;
    double lambda0 = 0.0;
    double eps_empirical = 0.0;
    double eps_theoretical = 0.0;
    std::string failure;
};

struct RunReport {
    struct Aggregate {
        std::string method;
        index_t r = 0;
        double mse_mean = 0.0, mse_stderr = 0.0;
        double pmse_mean = 0.0, pmse_stderr = 0.0;
        double wall_mean = 0.0, wall_stderr = 0.0;
        index_t failures = 0;
        index_t count = 0;
    };
    std::vector<ReplicationCell> cells;  // ordered by (method, r, replication)
    std::vector<Aggregate> aggregates;
};

/// Mean over replications of ||b_i - beta_ref||^2 / ||beta_ref||^2.
double mse(const std::vector<Vector>& estimates, const Vector& beta_ref);

/// ||X_test beta - y_test||^2 / ||y_test||^2 for one replication.
double pmse(const DesignMatrix& x_test, const Vector& y_test, const Vector& beta_train);

enum class ReportFormat { Csv, Json };

struct BenchConfig {
    ExperimentConfig scenario;
    std::vector<MethodSpec> methods;
    std::vector<index_t> r_grid;
    index_t replications = 100;
    int workers = 1;
    double train_ratio = 0.7;
    bool timings = true;      // false leaves wall_time_s empty, making runs byte-reproducible
    bool diagnostics = false; // kappa / lambda0 / eps columns
    std::string input_csv;    // nonempty switches to ingested-data mode (bootstrap replications)
    int response_col = -1;
    bool has_header = true;
    bool center = false;
    std::string output;
    ReportFormat format = ReportFormat::Csv;
};

/// Load a JSON config file (schema documented in the README).
BenchConfig load_config(const std::string& path);

/// Run the sweep: every method at every grid point over the configured
/// replications. Synthetic runs generate fresh data per replication and score
/// MSE against beta_true; ingested runs bootstrap the CSV rows and score
/// against the full-sample OLS estimate. Per-method failures become recorded
/// cells, never an abort. The fit on the full data is wall-timed
/// (subsampling + estimation only); the extra fit behind PMSE is not.
RunReport run_experiment(const BenchConfig& cfg);

/// Parse a rectangular numeric CSV into a design matrix and response.
/// response_column may be negative to count from the end (-1 = last).
std::pair<DesignMatrix, Vector> ingest_csv(const std::string& path, int response_column,
                                           bool has_header, bool center);

std::string report_to_csv(const RunReport& report);
std::string report_to_json(const RunReport& report);
void emit_report(const RunReport& report, ReportFormat format, const std::string& path);

/// Shortest round-trip decimal rendering (used for all CSV numerics).
std::string format_double(double v);

/// Single fit used by the runner and the CLI `fit` subcommand.
CoefficientVector fit_method(const MethodSpec& method, const DesignMatrix& x, const Vector& y,
                             index_t r, Rng& rng);

}  // namespace core_elements
