#include "vecci/cli.hpp"

#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vecci/algorithms.hpp"
#include "vecci/bench.hpp"
#include "vecci/citest.hpp"
#include "vecci/csv.hpp"
#include "vecci/error.hpp"
#include "vecci/jsonio.hpp"
#include "vecci/rng.hpp"
#include "vecci/synth.hpp"

namespace vecci::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSamples = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(const std::exception& e) {
    if (const auto* failure = dynamic_cast<const algorithms::algorithm_error*>(&e)) {
        switch (failure->kind) {
            case algorithms::ErrorKind::Input:
            case algorithms::ErrorKind::Capacity:
            case algorithms::ErrorKind::Io: return kExitInput;
            case algorithms::ErrorKind::SampleSize: return kExitSamples;
            case algorithms::ErrorKind::Degenerate:
            case algorithms::ErrorKind::Other: return kExitNumeric;
        }
    }
    if (dynamic_cast<const sample_size_error*>(&e) != nullptr) return kExitSamples;
    if (dynamic_cast<const input_error*>(&e) != nullptr) return kExitInput;
    if (dynamic_cast<const capacity_error*>(&e) != nullptr) return kExitInput;
    if (dynamic_cast<const io_error*>(&e) != nullptr) return kExitInput;
    return kExitNumeric;  // degenerate data and any other numeric failure
}

AnalysisConfig read_analysis_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed config: ") + e.what());
    }

    static const std::set<std::string> allowed = {
        "x_columns", "y_columns",    "method",       "alpha", "alpha_sig",
        "ci_backend", "conditioning_mode", "permutations", "max_cond", "seed"};
    if (!doc.is_object()) throw input_error("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (allowed.find(key) == allowed.end()) {
            throw input_error("unknown key '" + key + "' in config");
        }
    }

    AnalysisConfig config;
    try {
        if (doc.contains("x_columns")) {
            config.x_columns = doc.at("x_columns").get<std::vector<std::string>>();
        }
        if (doc.contains("y_columns")) {
            config.y_columns = doc.at("y_columns").get<std::vector<std::string>>();
        }
        if (doc.contains("method")) config.method = doc.at("method").get<std::string>();
        if (doc.contains("alpha")) config.alpha = doc.at("alpha").get<double>();
        if (doc.contains("alpha_sig")) config.alpha_sig = doc.at("alpha_sig").get<double>();
        if (doc.contains("ci_backend")) {
            config.ci_backend = doc.at("ci_backend").get<std::string>();
        }
        if (doc.contains("conditioning_mode")) {
            config.conditioning_mode = doc.at("conditioning_mode").get<std::string>();
        }
        if (doc.contains("permutations")) {
            config.permutations = doc.at("permutations").get<int>();
        }
        if (doc.contains("max_cond")) config.max_cond = doc.at("max_cond").get<int>();
        if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("bad config value: ") + e.what());
    }
    return config;
}

std::vector<std::string> split_names(const std::string& list) {
    std::vector<std::string> names;
    std::string::size_type start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        const std::string item =
            comma == std::string::npos ? list.substr(start) : list.substr(start, comma - start);
        if (!item.empty()) names.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return names;
}

// Column indices for the configured (or prefix-inferred) group names.
void resolve_groups(const stats::DataMatrix& data, AnalysisConfig& config,
                    std::vector<int>& x_cols, std::vector<int>& y_cols) {
    if (config.x_columns.empty() && config.y_columns.empty()) {
        for (const std::string& name : data.names()) {
            if (!name.empty() && (name[0] == 'x' || name[0] == 'X')) {
                config.x_columns.push_back(name);
            } else if (!name.empty() && (name[0] == 'y' || name[0] == 'Y')) {
                config.y_columns.push_back(name);
            } else {
                throw input_error("cannot infer a group for column '" + name +
                                  "'; pass --x-columns and --y-columns");
            }
        }
    }
    if (config.x_columns.empty() || config.y_columns.empty()) {
        throw input_error("both column groups must be non-empty");
    }
    std::set<std::string> seen;
    for (const std::string& name : config.x_columns) {
        if (!seen.insert(name).second) throw input_error("column '" + name + "' listed twice");
        x_cols.push_back(data.column_index(name));
    }
    for (const std::string& name : config.y_columns) {
        if (!seen.insert(name).second) throw input_error("column '" + name + "' listed twice");
        y_cols.push_back(data.column_index(name));
    }
}

int run_analyze(const std::string& csv_path, const AnalysisConfig& config_in, int threads) {
    AnalysisConfig config = config_in;
    const stats::DataMatrix data = csv::read_csv_file(csv_path);

    std::vector<int> x_cols;
    std::vector<int> y_cols;
    resolve_groups(data, config, x_cols, y_cols);

    const int group_total = static_cast<int>(x_cols.size() + y_cols.size());
    if (data.rows() <= group_total + 3) {
        throw sample_size_error("need more than " + std::to_string(group_total + 3) +
                                " rows for " + std::to_string(group_total) + " variables, got " +
                                std::to_string(data.rows()));
    }

    nlohmann::json report_json;
    if (config.method == "trace") {
        report_json = jsonio::report_to_json(algorithms::trace_method(data, x_cols, y_cols));
    } else {
        std::unique_ptr<citest::CiBackend> backend;
        if (config.ci_backend == "parcorr") {
            citest::ParCorrOptions options;
            options.alpha = config.alpha_sig;
            options.mode = jsonio::conditioning_from_string(config.conditioning_mode);
            backend = std::make_unique<citest::ParCorrBackend>(data, x_cols, y_cols, options);
        } else if (config.ci_backend == "nonlinear") {
            citest::NonlinearOptions options;
            options.alpha = config.alpha_sig;
            options.permutations = config.permutations;
            options.seed = config.seed;
            options.num_threads = threads;
            backend = std::make_unique<citest::NonlinearBackend>(data, x_cols, y_cols, options);
        } else {
            throw input_error("unknown CI backend '" + config.ci_backend +
                              "' (expected parcorr or nonlinear)");
        }

        if (config.method == "vecci_pc" || config.method == "vecci_full") {
            algorithms::VecciOptions options;
            options.alpha = config.alpha.value_or(0.01);
            options.max_cond = config.max_cond;
            options.num_threads = threads;
            const auto report = config.method == "vecci_pc"
                                    ? algorithms::vecci_pc(*backend, options)
                                    : algorithms::vecci_full(*backend, options);
            report_json = jsonio::report_to_json(report);
        } else if (config.method == "vanilla_pc") {
            algorithms::VanillaOptions options;
            options.alpha = config.alpha.value_or(1e-4);
            options.max_cond = config.max_cond;
            report_json = jsonio::report_to_json(algorithms::vanilla_pc(*backend, options));
        } else {
            throw input_error("unknown method '" + config.method + "'");
        }
    }

    std::cout << report_json.dump(2) << '\n';
    return kExitOk;
}

int run_simulate(const synth::ModelParams& params, bool seed_given, const std::string& model_out) {
    synth::ModelParams resolved = params;
    if (!seed_given) {
        std::random_device device;
        resolved.seed =
            (static_cast<std::uint64_t>(device()) << 32) ^ static_cast<std::uint64_t>(device());
        std::cerr << "seed: " << resolved.seed << '\n';
    }

    Rng rng(resolved.seed);
    const synth::SampleResult sample = synth::sample_model(resolved, rng);

    nlohmann::json model_doc = jsonio::model_to_json(sample.model, resolved.seed);
    std::ofstream out(model_out);
    if (!out) throw io_error("cannot open '" + model_out + "' for writing");
    out << model_doc.dump(2) << '\n';
    if (!out) throw io_error("write failure on '" + model_out + "'");

    csv::write_csv(std::cout, sample.data);
    return kExitOk;
}

int run_bench(const std::string& grid_path, const std::string& out_path,
              const std::string& format, int threads) {
    const bench::ExperimentGrid grid = jsonio::read_grid_file(grid_path);
    const bench::BenchReport report = bench::run_grid(grid, threads);
    if (format == "csv") {
        bench::write_report_csv(report, out_path);
    } else if (format == "json") {
        bench::write_report_json(report, out_path);
    } else {
        throw input_error("unknown format '" + format + "' (expected csv or json)");
    }
    std::cerr << "wrote " << report.results.size() << " rows to " << out_path << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Causal direction between two vector-valued variable groups"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Infer the direction from a CSV sample");
    std::string csv_path;
    analyze->add_option("csv", csv_path, "CSV file with a header row")->required();
    std::string config_path;
    analyze->add_option("--config", config_path, "JSON config file");
    std::string method;
    auto* method_opt = analyze->add_option("--method", method, "vecci_pc|vecci_full|vanilla_pc|trace");
    double alpha = 0.0;
    auto* alpha_opt = analyze->add_option("--alpha", alpha, "decision threshold");
    double alpha_sig = 0.0;
    auto* alpha_sig_opt = analyze->add_option("--alpha-sig", alpha_sig, "CI-test significance");
    std::string backend;
    auto* backend_opt = analyze->add_option("--backend", backend, "parcorr|nonlinear");
    std::string conditioning;
    auto* conditioning_opt =
        analyze->add_option("--conditioning", conditioning, "explicit|residualize");
    int permutations = 0;
    auto* permutations_opt =
        analyze->add_option("--permutations", permutations, "permutation count (nonlinear)");
    int max_cond = 0;
    auto* max_cond_opt = analyze->add_option("--max-cond", max_cond, "skeleton conditioning cap");
    std::uint64_t analyze_seed = 0;
    auto* analyze_seed_opt = analyze->add_option("--seed", analyze_seed, "permutation seed");
    std::string x_columns;
    analyze->add_option("--x-columns", x_columns, "comma-separated X column names");
    std::string y_columns;
    analyze->add_option("--y-columns", y_columns, "comma-separated Y column names");
    int analyze_threads = 0;
    analyze->add_option("--threads", analyze_threads, "worker cap (0 = auto)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Sample a random two-group model");
    synth::ModelParams params;
    simulate->add_option("--n", params.n, "size of the X group");
    simulate->add_option("--m", params.m, "size of the Y group");
    simulate->add_option("--N,--samples", params.sample_size, "number of rows");
    simulate->add_option("--dens-x", params.dens_x, "X-internal edge density");
    simulate->add_option("--dens-y", params.dens_y, "Y-noise edge density");
    simulate->add_option("--dens-a", params.dens_a, "interaction density");
    simulate->add_option("--effect-lo", params.effect_lo, "interaction magnitude lower bound");
    simulate->add_option("--effect-hi", params.effect_hi, "interaction magnitude upper bound");
    std::string mechanism = "linear";
    simulate->add_option("--mechanism", mechanism, "linear|quadratic");
    auto* sim_seed_opt = simulate->add_option("--seed", params.seed, "generator seed");
    std::string model_out = "model.json";
    simulate->add_option("--model-out", model_out, "sidecar path for the model JSON");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run an experiment grid");
    std::string grid_path;
    bench_cmd->add_option("--grid", grid_path, "grid config JSON")->required();
    std::string out_path;
    bench_cmd->add_option("--out", out_path, "report output path")->required();
    std::string format = "csv";
    bench_cmd->add_option("--format", format, "csv|json");
    int bench_threads = 0;
    bench_cmd->add_option("--threads", bench_threads, "worker cap (0 = auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (analyze->parsed()) {
            AnalysisConfig config;
            if (!config_path.empty()) config = read_analysis_config(config_path);
            if (*method_opt) config.method = method;
            if (*alpha_opt) config.alpha = alpha;
            if (*alpha_sig_opt) config.alpha_sig = alpha_sig;
            if (*backend_opt) config.ci_backend = backend;
            if (*conditioning_opt) config.conditioning_mode = conditioning;
            if (*permutations_opt) config.permutations = permutations;
            if (*max_cond_opt) config.max_cond = max_cond;
            if (*analyze_seed_opt) config.seed = analyze_seed;
            if (!x_columns.empty()) config.x_columns = split_names(x_columns);
            if (!y_columns.empty()) config.y_columns = split_names(y_columns);
            return run_analyze(csv_path, config, analyze_threads);
        }
        if (simulate->parsed()) {
            params.mechanism = synth::mechanism_from_string(mechanism);
            return run_simulate(params, sim_seed_opt->count() > 0, model_out);
        }
        return run_bench(grid_path, out_path, format, bench_threads);
    } catch (const algorithms::algorithm_error& e) {
        std::cerr << "error: " << e.what() << '\n'
                  << "partial report: " << jsonio::report_to_json(e.partial).dump() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace vecci::cli
