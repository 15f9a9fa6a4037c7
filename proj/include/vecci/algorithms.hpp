#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vecci/citest.hpp"
#include "vecci/graph.hpp"
#include "vecci/pc.hpp"
#include "vecci/stats.hpp"

namespace vecci::algorithms {

enum class Decision { XcausesY, YcausesX, Indeterminate };

std::string to_string(Decision d);

// Densities of the four group skeletons, the density differences, and the
// resulting call.  d_xy = dens_x_given_y - dens_x and d_yx likewise; crit =
// d_xy - d_yx.  One-sided runs leave the skipped side's fields at zero.
struct DirectionReport {
    double dens_x = 0.0;
    double dens_x_given_y = 0.0;
    double dens_y = 0.0;
    double dens_y_given_x = 0.0;
    double d_xy = 0.0;
    double d_yx = 0.0;
    double crit = 0.0;
    Decision decision = Decision::Indeterminate;
    double alpha = 0.0;
    std::uint64_t ci_test_count = 0;
};

enum class ErrorKind { Input, SampleSize, Degenerate, Capacity, Io, Other };

// Failure inside a direction analysis; carries the densities computed before
// the failing test and the classified cause.
class algorithm_error : public std::runtime_error {
public:
    algorithm_error(ErrorKind kind, const std::string& what, DirectionReport partial)
        : std::runtime_error(what), kind(kind), partial(std::move(partial)) {}
    ErrorKind kind;
    DirectionReport partial;
};

// edges / (q (q - 1) / 2); graphs with fewer than two nodes have density 0.
double edge_density(const graph::UndirectedGraph& g);

enum class Side { X, Y };

struct VecciOptions {
    double alpha = 0.01;              // decision threshold on crit
    std::optional<int> max_cond;      // skeleton cap (adaptive variant only)
    std::optional<Side> one_sided;    // evaluate a single group (full variant only)
    int num_threads = 1;
};

// Adaptive variant: PC skeletons of each group with and without the opposite
// group joined to every conditioning set.
DirectionReport vecci_pc(const citest::CiBackend& backend, const VecciOptions& options = {});

// Fixed-conditioning variant: per pair, independence given all remaining
// in-group variables, with and without the opposite group; exactly
// n(n-1) + m(m-1) CI tests on a two-sided run.
DirectionReport vecci_full(const citest::CiBackend& backend, const VecciOptions& options = {});

struct VanillaReport {
    int edge_x_to_y = 0;
    int edge_y_to_x = 0;
    double edge_diff = 0.0;  // (edge_x_to_y - edge_y_to_x) / (n * m)
    Decision decision = Decision::Indeterminate;
};

struct VanillaOptions {
    double alpha = 1e-4;          // threshold on edge_diff
    std::optional<int> max_cond;  // skeleton cap
};

// Baseline: one PC run over all scalar variables, oriented to a CPDAG, with
// the direction read off the normalized count difference of directed cross
// edges.
VanillaReport vanilla_pc(const citest::CiBackend& backend, const VanillaOptions& options = {});

struct TraceReport {
    double delta_xy = 0.0;
    double delta_yx = 0.0;
    Decision decision = Decision::Indeterminate;
};

// log(tr(A Sigma A^T)/rows) - log(tr(A A^T)/rows) - log(tr(Sigma)/cols):
// deviation of the regression matrix from the free-rotation baseline.
double trace_delta(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma);

// Regression-matrix trace criterion evaluated in both directions; the
// direction whose delta is closer to zero wins, ties (within 1e-12) are
// indeterminate.
TraceReport trace_method(const stats::DataMatrix& data, const std::vector<int>& x_cols,
                         const std::vector<int>& y_cols);

}  // namespace vecci::algorithms
