#include "core_elements/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "core_elements/baselines.hpp"
#include "core_elements/mom.hpp"
#include "core_elements/selection.hpp"
#include "core_elements/theory.hpp"

namespace core_elements {

using json = nlohmann::json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

MethodSpec MethodSpec::parse(const std::string& text) {
    std::string name = lower(text);
    std::string param;
    if (const auto pos = name.find(':'); pos != std::string::npos) {
        param = name.substr(pos + 1);
        name = name.substr(0, pos);
    }

    MethodSpec spec;
    if (name == "full_ols" || name == "fullols" || name == "ols") {
        spec.kind = Kind::FullOls;
    } else if (name == "unif") {
        spec.kind = Kind::Unif;
    } else if (name == "blev") {
        spec.kind = Kind::Blev;
    } else if (name == "slev") {
        spec.kind = Kind::Slev;
        spec.lambda = param.empty() ? 0.9 : std::stod(param);
    } else if (name == "iboss") {
        spec.kind = Kind::Iboss;
    } else if (name == "core") {
        spec.kind = Kind::Core;
    } else if (name == "mom_core" || name == "momcore" || name == "mom-core") {
        spec.kind = Kind::MomCore;
        spec.k = param.empty() ? 1 : static_cast<index_t>(std::stoll(param));
    } else if (name == "mom_ols" || name == "momols" || name == "mom-ols") {
        spec.kind = Kind::MomOls;
        spec.k = param.empty() ? 1 : static_cast<index_t>(std::stoll(param));
    } else {
        throw Error("unknown method: " + text);
    }
    return spec;
}

std::string MethodSpec::label() const {
    switch (kind) {
        case Kind::FullOls: return "full_ols";
        case Kind::Unif: return "unif";
        case Kind::Blev: return "blev";
        case Kind::Slev: return "slev:" + format_double(lambda);
        case Kind::Iboss: return "iboss";
        case Kind::Core: return pre_reduction > 0.0 ? "core(pre)" : "core";
        case Kind::MomCore: return "mom_core:" + std::to_string(k);
        case Kind::MomOls: return "mom_ols:" + std::to_string(k);
    }
    return "?";
}

double mse(const std::vector<Vector>& estimates, const Vector& beta_ref) {
    if (estimates.empty()) throw EmptyInput("mse: empty estimate list");
    const double denom = norm2_squared(beta_ref);
    if (denom == 0.0) throw ZeroReference("mse: reference coefficient vector is zero");
    double acc = 0.0;
    for (const Vector& b : estimates) {
        if (b.size() != beta_ref.size()) throw DimensionMismatch("mse: estimate length mismatch");
        double d = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double e = b[j] - beta_ref[j];
            d += e * e;
        }
        acc += d / denom;
    }
    return acc / static_cast<double>(estimates.size());
}

double pmse(const DesignMatrix& x_test, const Vector& y_test, const Vector& beta_train) {
    const double denom = norm2_squared(y_test);
    if (denom == 0.0) throw ZeroResponse("pmse: test response is zero");
    const Vector fit = matvec(x_test, beta_train);
    double acc = 0.0;
    for (std::size_t i = 0; i < y_test.size(); ++i) {
        const double e = fit[i] - y_test[i];
        acc += e * e;
    }
    return acc / denom;
}

namespace {

std::vector<index_t> uniform_reduction(index_t n, index_t target, Rng& rng) {
    std::vector<index_t> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), index_t{0});
    if (target >= n) return all;
    for (index_t i = 0; i < target; ++i) {
        const index_t j = i + rng.uniform_index(n - i);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(target));
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

CoefficientVector fit_method(const MethodSpec& method, const DesignMatrix& x, const Vector& y,
                             index_t r, Rng& rng) {
    const DesignMatrix* xp = &x;
    const Vector* yp = &y;
    DesignMatrix x_red;
    Vector y_red;
    if (method.pre_reduction > 0.0 &&
        (method.kind == MethodSpec::Kind::Core || method.kind == MethodSpec::Kind::Iboss)) {
        const index_t target = static_cast<index_t>(
            std::ceil(method.pre_reduction * static_cast<double>(r)));
        if (target < x.rows()) {
            const auto rows = uniform_reduction(x.rows(), target, rng);
            x_red = x.submatrix_rows(rows);
            y_red.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) y_red[i] = y[static_cast<std::size_t>(rows[i])];
            xp = &x_red;
            yp = &y_red;
        }
    }

    switch (method.kind) {
        case MethodSpec::Kind::FullOls:
            return ols_full(*xp, *yp);
        case MethodSpec::Kind::Unif: {
            const RowSample s = unif(xp->rows(), r, rng);
            return row_subsample_ols_weighted(*xp, *yp, s.rows, *s.probabilities, "unif");
        }
        case MethodSpec::Kind::Blev: {
            const RowSample s = blev(*xp, r, rng);
            return row_subsample_ols_weighted(*xp, *yp, s.rows, *s.probabilities, "blev");
        }
        case MethodSpec::Kind::Slev: {
            const RowSample s = slev(*xp, r, method.lambda, rng);
            return row_subsample_ols_weighted(*xp, *yp, s.rows, *s.probabilities, "slev");
        }
        case MethodSpec::Kind::Iboss: {
            const RowSample s = iboss(*xp, r);
            return row_subsample_ols(*xp, *yp, s.rows, "iboss");
        }
        case MethodSpec::Kind::Core:
            return core_estimate(*xp, *yp, SketchBudget(r));
        case MethodSpec::Kind::MomCore:
            return mom_core_estimate(*xp, *yp, r, method.k, rng, /*condition_diagnostics=*/false)
                .estimate;
        case MethodSpec::Kind::MomOls: {
            const BlockPartition part = partition(xp->rows(), method.k, rng);
            std::vector<Vector> estimates;
            index_t dropped = 0;
            for (const auto& rows : part.blocks) {
                const DesignMatrix xl = xp->submatrix_rows(rows);
                Vector yl(rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i) yl[i] = (*yp)[static_cast<std::size_t>(rows[i])];
                try {
                    estimates.push_back(ols_full(xl, yl).beta);
                } catch (const RankDeficientDesign&) {
                    ++dropped;
                }
            }
            if (estimates.empty())
                throw AllBlocksSingular("mom_ols: every block was rank deficient");
            CoefficientVector out{coordinate_median(estimates), "mom_ols", {}};
            out.diagnostics["k"] = static_cast<double>(method.k);
            out.diagnostics["dropped_blocks"] = static_cast<double>(dropped);
            return out;
        }
    }
    throw Error("fit_method: unreachable");
}

// -- Experiment runner ---------------------------------------------------------

namespace {

struct CellTask {
    std::size_t method_index;
    std::size_t r_index;
    index_t r;  // 0 for methods that ignore r
};

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// Diagnostics shared by every cell of one replication.
struct RepDiagnostics {
    bool enabled = false;
    double kappa = kNan;
    Vector beta_ols;
    double spec_norm_x = kNan;
};

}  // namespace

RunReport run_experiment(const BenchConfig& cfg) {
    if (cfg.methods.empty()) throw Error("run_experiment: no methods configured");
    const bool ingested = !cfg.input_csv.empty();
    if (!ingested) cfg.scenario.validate();
    if (cfg.replications < 1) throw Error("run_experiment: replications must be at least 1");

    // Grid cells per replication; methods that ignore r run once.
    std::vector<CellTask> tasks;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        if (cfg.methods[mi].uses_r()) {
            if (cfg.r_grid.empty()) throw Error("run_experiment: empty r grid");
            for (std::size_t ri = 0; ri < cfg.r_grid.size(); ++ri)
                tasks.push_back({mi, ri, cfg.r_grid[ri]});
        } else {
            tasks.push_back({mi, 0, 0});
        }
    }

    // Ingested-data mode: load once, reference is the full-sample OLS fit.
    DesignMatrix base_x;
    Vector base_y;
    Vector beta_ref;
    if (ingested) {
        std::tie(base_x, base_y) = ingest_csv(cfg.input_csv, cfg.response_col, cfg.has_header, cfg.center);
        beta_ref = ols_full(base_x, base_y).beta;
    } else {
        beta_ref = cfg.scenario.resolved_beta();
    }

    const std::uint64_t seed = cfg.scenario.seed;
    const std::uint64_t streams_per_rep = 2 + 2 * static_cast<std::uint64_t>(tasks.size());
    const index_t reps = cfg.replications;

    std::vector<ReplicationCell> cells(static_cast<std::size_t>(reps) * tasks.size());

    auto run_replication = [&](index_t rep, bool warmup) {
        Rng data_rng = Rng::stream(seed, static_cast<std::uint64_t>(rep) * streams_per_rep);
        Rng split_rng = Rng::stream(seed, static_cast<std::uint64_t>(rep) * streams_per_rep + 1);

        GeneratedDataset ds;
        if (ingested) {
            const index_t n = base_x.rows();
            std::vector<index_t> rows(static_cast<std::size_t>(n));
            for (index_t i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = data_rng.uniform_index(n);
            std::sort(rows.begin(), rows.end());
            ds.x = base_x.submatrix_rows(rows);
            ds.y.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) ds.y[i] = base_y[static_cast<std::size_t>(rows[i])];
            ds.beta_true = beta_ref;
            ds.informative_rows.resize(static_cast<std::size_t>(n));
            std::iota(ds.informative_rows.begin(), ds.informative_rows.end(), index_t{0});
        } else {
            ds = generate(cfg.scenario, data_rng);
        }

        // PMSE uses the original rows for real data, the generated data
        // otherwise; the split is fresh per replication either way.
        const GeneratedDataset* split_source = &ds;
        GeneratedDataset original;
        if (ingested) {
            original.x = base_x;
            original.y = base_y;
            original.beta_true = beta_ref;
            original.informative_rows.resize(static_cast<std::size_t>(base_x.rows()));
            std::iota(original.informative_rows.begin(), original.informative_rows.end(), index_t{0});
            split_source = &original;
        }
        const TrainTestSplit split = train_test_split(*split_source, cfg.train_ratio, split_rng);

        RepDiagnostics diag;
        if (cfg.diagnostics && !warmup) {
            diag.enabled = true;
            try {
                diag.kappa = condition_number(ds.x);
                diag.beta_ols = ols_full(ds.x, ds.y).beta;
                diag.spec_norm_x = spectral_norm_info(ds.x).value;
            } catch (const Error&) {
                diag.enabled = false;
            }
        }

        const double denom = norm2_squared(beta_ref);
        for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
            const CellTask& task = tasks[ti];
            const MethodSpec& method = cfg.methods[task.method_index];
            ReplicationCell cell;
            cell.method = method.label();
            cell.r = task.r;
            cell.replication = rep;
            cell.mse = cell.pmse = cell.wall_time_s = kNan;
            cell.kappa = cell.lambda0 = cell.eps_empirical = cell.eps_theoretical = kNan;

            Rng fit_rng = Rng::stream(seed, static_cast<std::uint64_t>(rep) * streams_per_rep + 2 +
                                                2 * static_cast<std::uint64_t>(ti));
            Rng pmse_rng = Rng::stream(seed, static_cast<std::uint64_t>(rep) * streams_per_rep + 3 +
                                                 2 * static_cast<std::uint64_t>(ti));
            try {
                const Timer timer;
                const CoefficientVector fit = fit_method(method, ds.x, ds.y, task.r, fit_rng);
                const double wall = timer.seconds();
                if (cfg.timings) cell.wall_time_s = wall;

                if (denom == 0.0) throw ZeroReference("run_experiment: zero reference coefficients");
                double d = 0.0;
                for (std::size_t j = 0; j < fit.beta.size(); ++j) {
                    const double e = fit.beta[j] - beta_ref[j];
                    d += e * e;
                }
                cell.mse = d / denom;

                const CoefficientVector fit_train =
                    fit_method(method, split.train.x, split.train.y, task.r, pmse_rng);
                cell.pmse = pmse(split.test.x, split.test.y, fit_train.beta);

                if (diag.enabled) {
                    cell.kappa = diag.kappa;
                    if (method.kind == MethodSpec::Kind::Core) {
                        const SelectionResult sel = select_core_elements(ds.x, SketchBudget(task.r));
                        const VarianceBound vb = variance_upper_bound(ds.x, sel.sketch, 1.0);
                        cell.lambda0 = vb.lambda0;
                        cell.eps_empirical = eps_empirical(ds.x, ds.y, fit.beta, diag.beta_ols);
                        const DesignMatrix l = residual_matrix(ds.x, sel.sketch);
                        const double achieved =
                            spectral_norm_info(l).value / diag.spec_norm_x;
                        if (achieved * diag.kappa * diag.kappa < 1.0)
                            cell.eps_theoretical = eps_theoretical(ds.x, ds.y, achieved);
                    }
                }
            } catch (const Error& e) {
                cell.failure = std::string(e.code()) + ": " + e.what();
            }
            if (!warmup) cells[static_cast<std::size_t>(rep) * tasks.size() + ti] = std::move(cell);
        }
    };

    // One warm-up pass keeps first-touch costs out of the timing statistics.
    if (cfg.timings) run_replication(reps, /*warmup=*/true);

    const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(reps)));
    if (workers == 1) {
        for (index_t rep = 0; rep < reps; ++rep) run_replication(rep, false);
    } else {
        std::atomic<index_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    const index_t rep = next.fetch_add(1);
                    if (rep >= reps) return;
                    run_replication(rep, false);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // Order-normalize: (method, r, replication) with methods in config order.
    RunReport report;
    report.cells.reserve(cells.size());
    for (std::size_t ti = 0; ti < tasks.size(); ++ti)
        for (index_t rep = 0; rep < reps; ++rep)
            report.cells.push_back(cells[static_cast<std::size_t>(rep) * tasks.size() + ti]);

    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        RunReport::Aggregate agg;
        agg.method = cfg.methods[tasks[ti].method_index].label();
        agg.r = tasks[ti].r;
        std::vector<double> ms, ps, ws;
        for (index_t rep = 0; rep < reps; ++rep) {
            const auto& cell = cells[static_cast<std::size_t>(rep) * tasks.size() + ti];
            if (!cell.failure.empty()) {
                ++agg.failures;
                continue;
            }
            if (std::isfinite(cell.mse)) ms.push_back(cell.mse);
            if (std::isfinite(cell.pmse)) ps.push_back(cell.pmse);
            if (std::isfinite(cell.wall_time_s)) ws.push_back(cell.wall_time_s);
        }
        auto mean_stderr = [](const std::vector<double>& v, double& mean, double& se) {
            if (v.empty()) {
                mean = se = kNan;
                return;
            }
            mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            if (v.size() < 2) {
                se = kNan;
                return;
            }
            double s = 0.0;
            for (double x : v) s += (x - mean) * (x - mean);
            se = std::sqrt(s / static_cast<double>(v.size() - 1)) /
                 std::sqrt(static_cast<double>(v.size()));
        };
        mean_stderr(ms, agg.mse_mean, agg.mse_stderr);
        mean_stderr(ps, agg.pmse_mean, agg.pmse_stderr);
        mean_stderr(ws, agg.wall_mean, agg.wall_stderr);
        agg.count = static_cast<index_t>(ms.size());
        report.aggregates.push_back(std::move(agg));
    }
    return report;
}

// -- CSV ingestion --------------------------------------------------------------

std::pair<DesignMatrix, Vector> ingest_csv(const std::string& path, int response_column,
                                           bool has_header, bool center) {
    std::ifstream in(path);
    if (!in) throw IoError("ingest_csv: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    index_t line_no = 0;
    index_t width = -1;
    bool header_pending = has_header;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            // Tolerate blank lines only at the end of the file.
            std::string rest;
            while (std::getline(in, rest)) {
                if (!rest.empty() && rest.back() == '\r') rest.pop_back();
                ++line_no;
                if (!rest.empty())
                    throw ParseError("ingest_csv: blank line before line " + std::to_string(line_no),
                                     line_no - 1, 1);
            }
            break;
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }

        std::vector<double> row;
        std::size_t start = 0;
        index_t col_no = 0;
        while (true) {
            ++col_no;
            const std::size_t comma = line.find(',', start);
            std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                             : comma - start);
            // Trim surrounding spaces.
            const auto first = cell.find_first_not_of(" \t");
            const auto last = cell.find_last_not_of(" \t");
            cell = first == std::string::npos ? std::string() : cell.substr(first, last - first + 1);
            if (cell.empty())
                throw ParseError("ingest_csv: empty cell at line " + std::to_string(line_no) +
                                     ", column " + std::to_string(col_no),
                                 line_no, col_no);
            const char* begin = cell.data();
            char* end = nullptr;
            const double value = std::strtod(begin, &end);
            if (end != begin + cell.size() || !std::isfinite(value))
                throw ParseError("ingest_csv: non-numeric cell '" + cell + "' at line " +
                                     std::to_string(line_no) + ", column " + std::to_string(col_no),
                                 line_no, col_no);
            row.push_back(value);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }

        if (width < 0)
            width = static_cast<index_t>(row.size());
        else if (static_cast<index_t>(row.size()) != width)
            throw DimensionMismatch("ingest_csv: ragged row at line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }

    if (rows.empty()) throw DimensionMismatch("ingest_csv: no data rows");
    if (width < 2) throw DimensionMismatch("ingest_csv: need at least one predictor and a response");

    index_t resp = response_column < 0 ? width + response_column : response_column;
    if (resp < 0 || resp >= width)
        throw DimensionMismatch("ingest_csv: response column out of range");

    const index_t n = static_cast<index_t>(rows.size());
    const index_t p = width - 1;
    DesignMatrix x(n, p);
    Vector y(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        index_t jx = 0;
        for (index_t j = 0; j < width; ++j) {
            if (j == resp)
                y[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(j)];
            else
                x(i, jx++) = row[static_cast<std::size_t>(j)];
        }
    }
    if (center) x.center_columns();
    return {std::move(x), std::move(y)};
}

// -- Report emission -------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

void append_field(std::string& out, double v) {
    out.push_back(',');
    if (std::isfinite(v)) out += format_double(v);
}

json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

std::string report_to_csv(const RunReport& report) {
    std::string out =
        "method,r,replication,mse,pmse,wall_time_s,kappa,lambda0,eps_empirical,eps_theoretical,"
        "failure\n";
    for (const auto& c : report.cells) {
        out += c.method;
        out.push_back(',');
        out += std::to_string(c.r);
        out.push_back(',');
        out += std::to_string(c.replication);
        append_field(out, c.mse);
        append_field(out, c.pmse);
        append_field(out, c.wall_time_s);
        append_field(out, c.kappa);
        append_field(out, c.lambda0);
        append_field(out, c.eps_empirical);
        append_field(out, c.eps_theoretical);
        out.push_back(',');
        for (char ch : c.failure) out.push_back(ch == ',' ? ';' : ch);
        out.push_back('\n');
    }
    // Aggregate rows reuse the schema with replication = "mean" / "stderr"
    // (plus a "failures" row when any replication failed).
    for (const auto& a : report.aggregates) {
        out += a.method;
        out.push_back(',');
        out += std::to_string(a.r);
        out += ",mean";
        append_field(out, a.mse_mean);
        append_field(out, a.pmse_mean);
        append_field(out, a.wall_mean);
        out += ",,,,,\n";
        out += a.method;
        out.push_back(',');
        out += std::to_string(a.r);
        out += ",stderr";
        append_field(out, a.mse_stderr);
        append_field(out, a.pmse_stderr);
        append_field(out, a.wall_stderr);
        out += ",,,,,\n";
        if (a.failures > 0) {
            out += a.method;
            out.push_back(',');
            out += std::to_string(a.r);
            out += ",failures,";
            out += std::to_string(a.failures);
            out += ",,,,,,,\n";
        }
    }
    return out;
}

std::string report_to_json(const RunReport& report) {
    json j;
    j["cells"] = json::array();
    for (const auto& c : report.cells) {
        json cj;
        cj["method"] = c.method;
        cj["r"] = c.r;
        cj["replication"] = c.replication;
        cj["mse"] = number_or_null(c.mse);
        cj["pmse"] = number_or_null(c.pmse);
        cj["wall_time_s"] = number_or_null(c.wall_time_s);
        cj["kappa"] = number_or_null(c.kappa);
        cj["lambda0"] = number_or_null(c.lambda0);
        cj["eps_empirical"] = number_or_null(c.eps_empirical);
        cj["eps_theoretical"] = number_or_null(c.eps_theoretical);
        if (!c.failure.empty()) cj["failure"] = c.failure;
        j["cells"].push_back(std::move(cj));
    }
    j["aggregates"] = json::array();
    for (const auto& a : report.aggregates) {
        json aj;
        aj["method"] = a.method;
        aj["r"] = a.r;
        aj["mse_mean"] = number_or_null(a.mse_mean);
        aj["mse_stderr"] = number_or_null(a.mse_stderr);
        aj["pmse_mean"] = number_or_null(a.pmse_mean);
        aj["pmse_stderr"] = number_or_null(a.pmse_stderr);
        aj["wall_mean"] = number_or_null(a.wall_mean);
        aj["wall_stderr"] = number_or_null(a.wall_stderr);
        aj["failures"] = a.failures;
        aj["count"] = a.count;
        j["aggregates"].push_back(std::move(aj));
    }
    return j.dump(2) + "\n";
}

void emit_report(const RunReport& report, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_report: cannot open " + path + " for writing");
    out << (format == ReportFormat::Csv ? report_to_csv(report) : report_to_json(report));
    if (!out) throw IoError("emit_report: write to " + path + " failed");
}

// -- Config loading ----------------------------------------------------------------

namespace {

Distribution parse_distribution(const std::string& s) {
    const std::string v = lower(s);
    if (v == "d1" || v == "normal") return Distribution::D1Normal;
    if (v == "d2" || v == "lognormal") return Distribution::D2LogNormal;
    if (v == "d3" || v == "t3") return Distribution::D3StudentT3;
    throw Error("unknown distribution: " + s);
}

Misspec parse_misspec(const std::string& s) {
    const std::string v = lower(s);
    if (v == "h1") return Misspec::H1;
    if (v == "h2") return Misspec::H2;
    if (v == "h3") return Misspec::H3;
    if (v == "none" || v.empty()) return Misspec::None;
    throw Error("unknown misspecification term: " + s);
}

// Grid entries are plain integers or strings like "4p" (multiples of p).
index_t parse_grid_entry(const json& e, index_t p) {
    if (e.is_number_integer()) return e.get<index_t>();
    if (e.is_string()) {
        std::string s = lower(e.get<std::string>());
        if (!s.empty() && s.back() == 'p') {
            s.pop_back();
            return static_cast<index_t>(std::llround(std::stod(s) * static_cast<double>(p)));
        }
        return static_cast<index_t>(std::stoll(s));
    }
    throw Error("r_grid entries must be integers or strings like \"4p\"");
}

MethodSpec parse_method_entry(const json& e) {
    if (e.is_string()) return MethodSpec::parse(e.get<std::string>());
    if (e.is_object()) {
        MethodSpec spec = MethodSpec::parse(e.at("name").get<std::string>());
        if (e.contains("lambda")) spec.lambda = e["lambda"].get<double>();
        if (e.contains("k")) spec.k = e["k"].get<index_t>();
        if (e.contains("pre_reduction")) spec.pre_reduction = e["pre_reduction"].get<double>();
        return spec;
    }
    throw Error("method entries must be strings or objects");
}

}  // namespace

BenchConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("load_config: ") + e.what(), 0, 0);
    }

    BenchConfig cfg;
    auto& sc = cfg.scenario;
    try {
        if (j.contains("input_csv") && !j["input_csv"].is_null())
            cfg.input_csv = j["input_csv"].get<std::string>();
        if (cfg.input_csv.empty()) {
            sc.n = j.at("n").get<index_t>();
            sc.p = j.at("p").get<index_t>();
        } else {
            if (j.contains("n")) sc.n = j["n"].get<index_t>();
            if (j.contains("p")) sc.p = j["p"].get<index_t>();
        }
        if (j.contains("distribution")) sc.distribution = parse_distribution(j["distribution"]);
        if (j.contains("alpha")) sc.alpha = j["alpha"].get<double>();
        if (j.contains("snr")) {
            if (j["snr"].is_string())
                sc.snr = std::numeric_limits<double>::infinity();  // "inf": noiseless
            else
                sc.snr = j["snr"].get<double>();
        }
        if (j.contains("beta_true") && !j["beta_true"].is_null())
            sc.beta_true = j["beta_true"].get<Vector>();
        if (j.contains("k")) sc.k = j["k"].get<index_t>();
        if (j.contains("n_outliers")) sc.n_outliers = j["n_outliers"].get<index_t>();
        if (j.contains("misspec") && !j["misspec"].is_null())
            sc.misspec = parse_misspec(j["misspec"].get<std::string>());
        if (j.contains("misspec_amplitude")) sc.misspec_amplitude = j["misspec_amplitude"].get<double>();
        if (j.contains("perturb_scale")) sc.perturb_scale = j["perturb_scale"].get<double>();
        if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();

        if (j.contains("methods"))
            for (const auto& e : j["methods"]) {
                MethodSpec spec = parse_method_entry(e);
                if ((spec.kind == MethodSpec::Kind::MomCore ||
                     spec.kind == MethodSpec::Kind::MomOls) &&
                    spec.k <= 1 && sc.k > 1)
                    spec.k = sc.k;
                cfg.methods.push_back(spec);
            }
        if (j.contains("r_grid"))
            for (const auto& e : j["r_grid"]) cfg.r_grid.push_back(parse_grid_entry(e, sc.p));
        if (j.contains("replications")) cfg.replications = j["replications"].get<index_t>();
        if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
        if (j.contains("train_ratio")) cfg.train_ratio = j["train_ratio"].get<double>();
        if (j.contains("timings")) cfg.timings = j["timings"].get<bool>();
        if (j.contains("diagnostics")) cfg.diagnostics = j["diagnostics"].get<bool>();
        if (j.contains("response_col")) cfg.response_col = j["response_col"].get<int>();
        if (j.contains("has_header")) cfg.has_header = j["has_header"].get<bool>();
        if (j.contains("center")) cfg.center = j["center"].get<bool>();
        if (j.contains("output")) cfg.output = j["output"].get<std::string>();
        if (j.contains("format"))
            cfg.format = lower(j["format"].get<std::string>()) == "json" ? ReportFormat::Json
                                                                         : ReportFormat::Csv;
    } catch (const json::exception& e) {
        throw ParseError(std::string("load_config: ") + e.what(), 0, 0);
    }
    return cfg;
}

}  // namespace core_elements
