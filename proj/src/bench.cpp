#include "vecci/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>

#include <json.hpp>

#include "vecci/algorithms.hpp"
#include "vecci/error.hpp"
#include "vecci/parallel.hpp"
#include "vecci/rng.hpp"

namespace vecci::bench {

std::string to_string(Method method) {
    switch (method) {
        case Method::VecciPc: return "vecci_pc";
        case Method::VecciFull: return "vecci_full";
        case Method::VanillaPc: return "vanilla_pc";
        case Method::Trace: return "trace";
    }
    return "vecci_full";
}

Method method_from_string(const std::string& name) {
    if (name == "vecci_pc") return Method::VecciPc;
    if (name == "vecci_full") return Method::VecciFull;
    if (name == "vanilla_pc") return Method::VanillaPc;
    if (name == "trace") return Method::Trace;
    throw input_error("unknown method '" + name + "'");
}

double default_alpha(Method method) {
    return method == Method::VanillaPc ? 1e-4 : 0.01;
}

std::string to_string(CiBackendKind kind) {
    switch (kind) {
        case CiBackendKind::ParCorr: return "parcorr";
        case CiBackendKind::Nonlinear: return "nonlinear";
        case CiBackendKind::Oracle: return "oracle";
    }
    return "parcorr";
}

CiBackendKind backend_from_string(const std::string& name) {
    if (name == "parcorr") return CiBackendKind::ParCorr;
    if (name == "nonlinear") return CiBackendKind::Nonlinear;
    if (name == "oracle") return CiBackendKind::Oracle;
    throw input_error("unknown CI backend '" + name + "'");
}

namespace {

void apply_axis(const std::string& name, double value, synth::ModelParams& params) {
    const auto as_int = [&](const char* what) {
        const double rounded = std::nearbyint(value);
        if (!(std::abs(value - rounded) < 1e-9) || rounded < -2e9 || rounded > 2e9) {
            throw input_error(std::string("axis '") + what + "' needs integer values");
        }
        return static_cast<int>(rounded);
    };
    if (name == "n") {
        params.n = as_int("n");
    } else if (name == "m") {
        params.m = as_int("m");
    } else if (name == "group_size") {
        params.n = params.m = as_int("group_size");
    } else if (name == "sample_size") {
        params.sample_size = as_int("sample_size");
    } else if (name == "dens_x") {
        params.dens_x = value;
    } else if (name == "dens_y") {
        params.dens_y = value;
    } else if (name == "internal_density") {
        params.dens_x = params.dens_y = value;
    } else if (name == "dens_a") {
        params.dens_a = value;
    } else if (name == "effect_lo") {
        params.effect_lo = value;
    } else if (name == "effect_hi") {
        params.effect_hi = value;
    } else {
        throw input_error("unknown grid axis '" + name + "'");
    }
}

struct Cell {
    std::vector<double> coordinates;
    synth::ModelParams params;
};

std::vector<Cell> enumerate_cells(const ExperimentGrid& grid) {
    long long count = 1;
    for (const auto& [name, values] : grid.axes) {
        if (values.empty()) throw input_error("axis '" + name + "' has no values");
        count *= static_cast<long long>(values.size());
        if (count > grid.max_cells) {
            throw capacity_error("grid has more than " + std::to_string(grid.max_cells) +
                                 " cells");
        }
    }

    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(count));
    for (long long index = 0; index < count; ++index) {
        Cell cell;
        cell.params = grid.base;
        long long rest = index;
        // First axis varies slowest.
        long long stride = count;
        for (const auto& [name, values] : grid.axes) {
            stride /= static_cast<long long>(values.size());
            const auto pick = static_cast<std::size_t>(rest / stride);
            rest %= stride;
            const double value = values[pick];
            cell.coordinates.push_back(value);
            apply_axis(name, value, cell.params);
        }
        synth::validate(cell.params);
        cells.push_back(std::move(cell));
    }
    return cells;
}

struct TaskRecord {
    algorithms::Decision decision = algorithms::Decision::Indeterminate;
    double crit = 0.0;
    bool error = true;
    double seconds = 0.0;
};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void run_task(const ExperimentGrid& grid, const Cell& cell, std::uint64_t rep_seed,
              TaskRecord* records) {
    const std::size_t method_count = grid.methods.size();
    std::unique_ptr<citest::CiBackend> backend;
    std::optional<synth::SampleResult> sample;
    try {
        Rng rng(rep_seed);
        sample = synth::sample_model(cell.params, rng);
        std::vector<int> x_cols(static_cast<std::size_t>(cell.params.n));
        std::vector<int> y_cols(static_cast<std::size_t>(cell.params.m));
        for (int i = 0; i < cell.params.n; ++i) x_cols[static_cast<std::size_t>(i)] = i;
        for (int j = 0; j < cell.params.m; ++j) {
            y_cols[static_cast<std::size_t>(j)] = cell.params.n + j;
        }
        switch (grid.ci_backend) {
            case CiBackendKind::ParCorr: {
                citest::ParCorrOptions options;
                options.alpha = grid.alpha_sig;
                options.mode = grid.conditioning;
                backend = std::make_unique<citest::ParCorrBackend>(sample->data, x_cols, y_cols,
                                                                   options);
                break;
            }
            case CiBackendKind::Nonlinear: {
                citest::NonlinearOptions options;
                options.alpha = grid.alpha_sig;
                options.permutations = grid.permutations;
                options.seed = mix64(rep_seed);
                options.num_threads = 1;
                backend = std::make_unique<citest::NonlinearBackend>(sample->data, x_cols, y_cols,
                                                                     options);
                break;
            }
            case CiBackendKind::Oracle:
                backend = std::make_unique<citest::OracleBackend>(sample->model.structure);
                break;
        }
    } catch (const std::exception&) {
        return;  // every method of this repetition stays marked as an error
    }

    for (std::size_t mi = 0; mi < method_count; ++mi) {
        const Method method = grid.methods[mi];
        double alpha = default_alpha(method);
        if (const auto it = grid.alpha.find(method); it != grid.alpha.end()) alpha = it->second;

        TaskRecord& record = records[mi];
        const auto start = std::chrono::steady_clock::now();
        try {
            switch (method) {
                case Method::VecciPc: {
                    algorithms::VecciOptions options;
                    options.alpha = alpha;
                    options.max_cond = grid.vecci_max_cond;
                    options.num_threads = 1;
                    const auto report = algorithms::vecci_pc(*backend, options);
                    record.decision = report.decision;
                    record.crit = report.crit;
                    break;
                }
                case Method::VecciFull: {
                    algorithms::VecciOptions options;
                    options.alpha = alpha;
                    options.num_threads = 1;
                    const auto report = algorithms::vecci_full(*backend, options);
                    record.decision = report.decision;
                    record.crit = report.crit;
                    break;
                }
                case Method::VanillaPc: {
                    algorithms::VanillaOptions options;
                    options.alpha = alpha;
                    options.max_cond = grid.vanilla_max_cond;
                    const auto report = algorithms::vanilla_pc(*backend, options);
                    record.decision = report.decision;
                    record.crit = report.edge_diff;
                    break;
                }
                case Method::Trace: {
                    std::vector<int> x_cols(static_cast<std::size_t>(cell.params.n));
                    std::vector<int> y_cols(static_cast<std::size_t>(cell.params.m));
                    for (int i = 0; i < cell.params.n; ++i) x_cols[static_cast<std::size_t>(i)] = i;
                    for (int j = 0; j < cell.params.m; ++j) {
                        y_cols[static_cast<std::size_t>(j)] = cell.params.n + j;
                    }
                    const auto report = algorithms::trace_method(sample->data, x_cols, y_cols);
                    record.decision = report.decision;
                    record.crit = std::abs(report.delta_yx) - std::abs(report.delta_xy);
                    break;
                }
            }
            record.error = false;
        } catch (const std::exception&) {
            record.decision = algorithms::Decision::Indeterminate;
            record.error = true;
        }
        record.seconds = elapsed_seconds(start);
    }
}

}  // namespace

BenchReport run_grid(const ExperimentGrid& grid, int num_threads) {
    if (grid.methods.empty()) throw input_error("method list must not be empty");
    if (grid.repetitions < 1) throw input_error("repetitions must be at least 1");
    if (grid.max_cells < 1) throw input_error("cell cap must be at least 1");
    if (!(grid.alpha_sig > 0.0 && grid.alpha_sig < 1.0)) {
        throw input_error("CI significance must lie in (0, 1)");
    }
    if (grid.ci_backend == CiBackendKind::Oracle) {
        for (Method method : grid.methods) {
            if (method == Method::Trace) {
                throw input_error("the trace method needs sample data, not an oracle");
            }
        }
    }

    const std::vector<Cell> cells = enumerate_cells(grid);
    const std::size_t method_count = grid.methods.size();
    const long long reps = grid.repetitions;
    const long long tasks = static_cast<long long>(cells.size()) * reps;
    std::vector<TaskRecord> records(static_cast<std::size_t>(tasks) * method_count);

    const int threads = resolve_threads(num_threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (long long task = 0; task < tasks; ++task) {
        const auto cell_index = static_cast<std::size_t>(task / reps);
        const auto rep = static_cast<std::uint64_t>(task % reps);
        const std::uint64_t cell_seed = derive_seed(grid.seed, static_cast<std::uint64_t>(cell_index));
        const std::uint64_t rep_seed = derive_seed(cell_seed, rep);
        run_task(grid, cells[cell_index], rep_seed,
                 records.data() + static_cast<std::size_t>(task) * method_count);
    }
#ifndef _OPENMP
    (void)threads;
#endif

    BenchReport report;
    for (const auto& [name, values] : grid.axes) report.axis_names.push_back(name);
    report.repetitions = grid.repetitions;
    report.results.reserve(cells.size() * method_count);

    for (std::size_t cell_index = 0; cell_index < cells.size(); ++cell_index) {
        for (std::size_t mi = 0; mi < method_count; ++mi) {
            CellResult result;
            result.coordinates = cells[cell_index].coordinates;
            result.method = grid.methods[mi];
            double crit_sum = 0.0;
            int successes = 0;
            for (long long rep = 0; rep < reps; ++rep) {
                const std::size_t offset =
                    (cell_index * static_cast<std::size_t>(reps) + static_cast<std::size_t>(rep)) *
                        method_count +
                    mi;
                const TaskRecord& record = records[offset];
                if (record.error) {
                    ++result.errors;
                    ++result.indeterminate;
                } else {
                    crit_sum += record.crit;
                    ++successes;
                    switch (record.decision) {
                        case algorithms::Decision::XcausesY: ++result.correct; break;
                        case algorithms::Decision::YcausesX: ++result.wrong; break;
                        case algorithms::Decision::Indeterminate: ++result.indeterminate; break;
                    }
                }
                result.seconds += record.seconds;
            }
            result.mean_crit = successes > 0 ? crit_sum / successes
                                             : std::numeric_limits<double>::quiet_NaN();
            report.results.push_back(std::move(result));
        }
    }
    return report;
}

namespace {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

}  // namespace

void write_report_csv(const BenchReport& report, const std::string& path) {
    if (report.results.empty()) throw input_error("refusing to write an empty report");
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");

    for (const std::string& name : report.axis_names) out << name << ',';
    out << "method,correct,wrong,indeterminate,mean_crit,seconds\n";
    for (const CellResult& result : report.results) {
        for (double value : result.coordinates) out << format_double(value) << ',';
        out << to_string(result.method) << ',' << result.correct << ',' << result.wrong << ','
            << result.indeterminate << ',' << format_double(result.mean_crit) << ','
            << format_double(result.seconds) << '\n';
    }
    if (!out) throw io_error("write failure on '" + path + "'");
}

void write_report_json(const BenchReport& report, const std::string& path) {
    if (report.results.empty()) throw input_error("refusing to write an empty report");
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["axes"] = report.axis_names;
    doc["repetitions"] = report.repetitions;
    nlohmann::json rows = nlohmann::json::array();
    for (const CellResult& result : report.results) {
        nlohmann::json row;
        row["coordinates"] = result.coordinates;
        row["method"] = to_string(result.method);
        row["correct"] = result.correct;
        row["wrong"] = result.wrong;
        row["indeterminate"] = result.indeterminate;
        row["errors"] = result.errors;
        row["mean_crit"] = result.mean_crit;  // NaN serializes as null
        row["seconds"] = result.seconds;
        rows.push_back(std::move(row));
    }
    doc["results"] = std::move(rows);

    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw io_error("write failure on '" + path + "'");
}

BenchReport read_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed report JSON: ") + e.what());
    }
    try {
        if (doc.at("schema_version").get<int>() != 1) {
            throw input_error("unsupported report schema version");
        }
        BenchReport report;
        report.axis_names = doc.at("axes").get<std::vector<std::string>>();
        report.repetitions = doc.at("repetitions").get<int>();
        for (const nlohmann::json& row : doc.at("results")) {
            CellResult result;
            result.coordinates = row.at("coordinates").get<std::vector<double>>();
            result.method = method_from_string(row.at("method").get<std::string>());
            result.correct = row.at("correct").get<int>();
            result.wrong = row.at("wrong").get<int>();
            result.indeterminate = row.at("indeterminate").get<int>();
            result.errors = row.at("errors").get<int>();
            const nlohmann::json& crit = row.at("mean_crit");
            result.mean_crit =
                crit.is_null() ? std::numeric_limits<double>::quiet_NaN() : crit.get<double>();
            result.seconds = row.at("seconds").get<double>();
            report.results.push_back(std::move(result));
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("report JSON is missing fields: ") + e.what());
    }
}

}  // namespace vecci::bench
