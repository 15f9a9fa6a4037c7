#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vecci::cli {

// Settings for the analyze subcommand; a JSON config file fills these first,
// then command-line flags override individual fields.
struct AnalysisConfig {
    std::vector<std::string> x_columns;  // empty -> infer from x*/y* name prefixes
    std::vector<std::string> y_columns;
    std::string method = "vecci_full";
    std::optional<double> alpha;  // decision threshold; default depends on the method
    double alpha_sig = 0.01;
    std::string ci_backend = "parcorr";
    std::string conditioning_mode = "residualize";
    int permutations = 199;
    std::optional<int> max_cond;
    std::uint64_t seed = 0;
};

// Entry point behind main().  Exit codes: 0 report produced (indeterminate
// included), 2 bad input/config/IO, 3 too few samples, 4 numeric failure.
int run(int argc, const char* const* argv);

}  // namespace vecci::cli
