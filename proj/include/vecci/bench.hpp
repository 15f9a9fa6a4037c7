#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vecci/citest.hpp"
#include "vecci/synth.hpp"

namespace vecci::bench {

enum class Method { VecciPc, VecciFull, VanillaPc, Trace };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

// Default decision thresholds: 1e-4 for the scalar-PC baseline, 0.01 for the
// group methods.
double default_alpha(Method method);

enum class CiBackendKind { ParCorr, Nonlinear, Oracle };

std::string to_string(CiBackendKind kind);
CiBackendKind backend_from_string(const std::string& name);

// Axis names: n, m, group_size (sets both), sample_size, dens_x, dens_y,
// internal_density (sets both), dens_a, effect_lo, effect_hi.
struct ExperimentGrid {
    synth::ModelParams base;
    std::vector<std::pair<std::string, std::vector<double>>> axes;  // order defines cell layout
    int repetitions = 100;
    std::vector<Method> methods;
    std::map<Method, double> alpha;  // decision thresholds; defaults fill the gaps
    double alpha_sig = 0.01;         // CI-test significance
    citest::GroupConditioning conditioning = citest::GroupConditioning::Residualize;
    CiBackendKind ci_backend = CiBackendKind::ParCorr;
    std::optional<int> vecci_max_cond;    // adaptive-variant skeleton cap
    std::optional<int> vanilla_max_cond;  // baseline skeleton cap
    int permutations = 199;               // nonlinear backend only
    std::uint64_t seed = 1;
    int max_cells = 4096;
};

// One row per cell and method.  Ground truth is X causes Y by construction,
// so correct + wrong + indeterminate always equals repetitions; failed
// repetitions count as indeterminate and are reported in `errors` as well.
struct CellResult {
    std::vector<double> coordinates;  // aligned with the grid's axis order
    Method method = Method::VecciFull;
    int correct = 0;
    int wrong = 0;
    int indeterminate = 0;
    int errors = 0;
    double mean_crit = 0.0;  // over non-failing repetitions; NaN when all failed
    double seconds = 0.0;
};

struct BenchReport {
    std::vector<std::string> axis_names;
    int repetitions = 0;
    std::vector<CellResult> results;
};

// Runs every (cell, repetition) task, in parallel when allowed; tallies are a
// pure function of the grid because every repetition derives its own seed and
// the reduction runs in a fixed order.
BenchReport run_grid(const ExperimentGrid& grid, int num_threads = 0);

// CSV: one axis column per axis, then method, correct, wrong, indeterminate,
// mean_crit, seconds.  JSON mirrors the schema ("schema_version": 1) and adds
// the error tallies; read_report_json restores a bit-identical report.
void write_report_csv(const BenchReport& report, const std::string& path);
void write_report_json(const BenchReport& report, const std::string& path);
BenchReport read_report_json(const std::string& path);

}  // namespace vecci::bench
