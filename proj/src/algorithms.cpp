#include "vecci/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vecci/error.hpp"
#include "vecci/parallel.hpp"

namespace vecci::algorithms {

namespace {

ErrorKind classify(const std::exception& e) {
    if (dynamic_cast<const sample_size_error*>(&e) != nullptr) return ErrorKind::SampleSize;
    if (dynamic_cast<const input_error*>(&e) != nullptr) return ErrorKind::Input;
    if (dynamic_cast<const degenerate_data_error*>(&e) != nullptr) return ErrorKind::Degenerate;
    if (dynamic_cast<const capacity_error*>(&e) != nullptr) return ErrorKind::Capacity;
    if (dynamic_cast<const io_error*>(&e) != nullptr) return ErrorKind::Io;
    return ErrorKind::Other;
}

Decision decide_crit(double crit, double alpha) {
    if (crit > alpha) return Decision::XcausesY;
    if (crit < -alpha) return Decision::YcausesX;
    return Decision::Indeterminate;
}

void validate_alpha(double alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw input_error("decision threshold must be finite and non-negative");
    }
}

void finish_report(DirectionReport& report, double alpha) {
    report.d_xy = report.dens_x_given_y - report.dens_x;
    report.d_yx = report.dens_y_given_x - report.dens_y;
    report.crit = report.d_xy - report.d_yx;
    report.alpha = alpha;
    report.decision = decide_crit(report.crit, alpha);
}

[[noreturn]] void rethrow_with_partial(const std::exception& e, DirectionReport partial) {
    throw algorithm_error(classify(e), e.what(), std::move(partial));
}

}  // namespace

std::string to_string(Decision d) {
    switch (d) {
        case Decision::XcausesY: return "X->Y";
        case Decision::YcausesX: return "Y->X";
        case Decision::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

double edge_density(const graph::UndirectedGraph& g) {
    const int q = g.node_count();
    if (q < 2) return 0.0;
    const double pairs = 0.5 * static_cast<double>(q) * static_cast<double>(q - 1);
    return static_cast<double>(g.edge_count()) / pairs;
}

DirectionReport vecci_pc(const citest::CiBackend& backend, const VecciOptions& options) {
    validate_alpha(options.alpha);
    if (options.one_sided.has_value()) {
        throw input_error("one-sided evaluation requires the fixed-conditioning variant");
    }
    const std::vector<int>& xs = backend.x_vars();
    const std::vector<int>& ys = backend.y_vars();

    const std::uint64_t count_before = backend.test_count();
    DirectionReport report;

    struct Run {
        const std::vector<int>* vars;
        citest::Group extra;
        double* dest;
    };
    const Run runs[4] = {
        {&xs, citest::Group::None, &report.dens_x},
        {&xs, citest::Group::Y, &report.dens_x_given_y},
        {&ys, citest::Group::None, &report.dens_y},
        {&ys, citest::Group::X, &report.dens_y_given_x},
    };

    const int threads = resolve_threads(options.num_threads);
    std::exception_ptr failure = nullptr;
    bool done[4] = {false, false, false, false};

#ifdef _OPENMP
    const int workers = std::min(threads, 4);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
    for (int r = 0; r < 4; ++r) {
        try {
            pc::SkeletonOptions skel_options;
            skel_options.max_cond = options.max_cond;
            skel_options.extra_group = runs[r].extra;
            const pc::SkeletonResult result = pc::skeleton(backend, *runs[r].vars, skel_options);
            *runs[r].dest = edge_density(result.skeleton);
            done[r] = true;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(vecci_pc_failure)
#endif
            {
                if (failure == nullptr) failure = std::current_exception();
            }
        }
    }
#ifndef _OPENMP
    (void)threads;
#endif

    report.ci_test_count = backend.test_count() - count_before;
    if (failure != nullptr) {
        DirectionReport partial = report;
        for (int r = 0; r < 4; ++r) {
            if (!done[r]) *runs[r].dest = 0.0;
        }
        partial.alpha = options.alpha;
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            rethrow_with_partial(e, std::move(partial));
        }
    }

    finish_report(report, options.alpha);
    return report;
}

namespace {

// Counts, for every in-group pair, dependence given the rest of the group
// (plain) and given the rest of the group plus the whole opposite group
// (joined).  Densities are written straight into the report fields.
void full_side(const citest::CiBackend& backend, const std::vector<int>& vars,
               citest::Group opposite, int threads, double& dens_plain, double& dens_joined) {
    const int q = static_cast<int>(vars.size());
    if (q < 2) {
        dens_plain = 0.0;
        dens_joined = 0.0;
        return;
    }

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(q) * (q - 1) / 2);
    for (int a = 0; a < q; ++a) {
        for (int b = a + 1; b < q; ++b) pairs.emplace_back(a, b);
    }

    const int total = static_cast<int>(pairs.size());
    std::vector<char> plain_edge(pairs.size(), 0);
    std::vector<char> joined_edge(pairs.size(), 0);
    std::exception_ptr failure = nullptr;
    bool failed = false;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int k = 0; k < total; ++k) {
        if (failed) continue;
        try {
            const auto [a, b] = pairs[static_cast<std::size_t>(k)];
            std::vector<int> rest;
            rest.reserve(static_cast<std::size_t>(q) - 2);
            for (int p = 0; p < q; ++p) {
                if (p != a && p != b) rest.push_back(vars[static_cast<std::size_t>(p)]);
            }
            citest::CiQuery plain{vars[static_cast<std::size_t>(a)],
                                  vars[static_cast<std::size_t>(b)], rest, citest::Group::None};
            citest::CiQuery joined{vars[static_cast<std::size_t>(a)],
                                   vars[static_cast<std::size_t>(b)], rest, opposite};
            plain_edge[static_cast<std::size_t>(k)] = backend.decide(plain) ? 0 : 1;
            joined_edge[static_cast<std::size_t>(k)] = backend.decide(joined) ? 0 : 1;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(vecci_full_failure)
#endif
            {
                if (failure == nullptr) failure = std::current_exception();
                failed = true;
            }
        }
    }
#ifndef _OPENMP
    (void)threads;
#endif

    if (failure != nullptr) std::rethrow_exception(failure);

    int plain_count = 0;
    int joined_count = 0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        plain_count += plain_edge[k];
        joined_count += joined_edge[k];
    }
    const double denom = 0.5 * static_cast<double>(q) * static_cast<double>(q - 1);
    dens_plain = static_cast<double>(plain_count) / denom;
    dens_joined = static_cast<double>(joined_count) / denom;
}

}  // namespace

DirectionReport vecci_full(const citest::CiBackend& backend, const VecciOptions& options) {
    validate_alpha(options.alpha);
    const int threads = resolve_threads(options.num_threads);
    const bool do_x = !options.one_sided.has_value() || *options.one_sided == Side::X;
    const bool do_y = !options.one_sided.has_value() || *options.one_sided == Side::Y;

    const std::uint64_t count_before = backend.test_count();
    DirectionReport report;

    try {
        if (do_x) {
            full_side(backend, backend.x_vars(), citest::Group::Y, threads, report.dens_x,
                      report.dens_x_given_y);
        }
        if (do_y) {
            full_side(backend, backend.y_vars(), citest::Group::X, threads, report.dens_y,
                      report.dens_y_given_x);
        }
    } catch (const std::exception& e) {
        report.ci_test_count = backend.test_count() - count_before;
        report.alpha = options.alpha;
        rethrow_with_partial(e, report);
    }

    report.ci_test_count = backend.test_count() - count_before;
    finish_report(report, options.alpha);
    return report;
}

VanillaReport vanilla_pc(const citest::CiBackend& backend, const VanillaOptions& options) {
    validate_alpha(options.alpha);
    const std::vector<int>& xs = backend.x_vars();
    const std::vector<int>& ys = backend.y_vars();

    std::vector<int> vars;
    vars.reserve(xs.size() + ys.size());
    vars.insert(vars.end(), xs.begin(), xs.end());
    vars.insert(vars.end(), ys.begin(), ys.end());
    std::sort(vars.begin(), vars.end());

    pc::SkeletonOptions skel_options;
    skel_options.max_cond = options.max_cond;
    skel_options.extra_group = citest::Group::None;
    const pc::SkeletonResult skel = pc::skeleton(backend, vars, skel_options);
    const pc::Cpdag cpdag = pc::orient_cpdag(skel);

    std::vector<char> is_x(vars.empty() ? 0 : static_cast<std::size_t>(vars.back()) + 1, 0);
    for (int v : xs) is_x[static_cast<std::size_t>(v)] = 1;

    VanillaReport report;
    for (const auto& [a, b] : cpdag.directed_edges()) {
        const int u = vars[static_cast<std::size_t>(a)];
        const int v = vars[static_cast<std::size_t>(b)];
        const bool ux = is_x[static_cast<std::size_t>(u)] != 0;
        const bool vx = is_x[static_cast<std::size_t>(v)] != 0;
        if (ux && !vx) ++report.edge_x_to_y;
        if (!ux && vx) ++report.edge_y_to_x;
    }
    const double scale = static_cast<double>(xs.size()) * static_cast<double>(ys.size());
    report.edge_diff = static_cast<double>(report.edge_x_to_y - report.edge_y_to_x) / scale;
    report.decision = decide_crit(report.edge_diff, options.alpha);
    return report;
}

double trace_delta(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma) {
    if (a.rows() < 1 || a.cols() < 1) throw input_error("regression matrix must be non-empty");
    if (sigma.rows() != a.cols() || sigma.cols() != a.cols()) {
        throw input_error("covariance dimensions must match the regressor count");
    }
    const double rows = static_cast<double>(a.rows());
    const double cols = static_cast<double>(a.cols());
    const double t_as = (a * sigma * a.transpose()).trace() / rows;
    const double t_a = (a * a.transpose()).trace() / rows;
    const double t_s = sigma.trace() / cols;
    if (!(t_as > 0.0) || !(t_a > 0.0) || !(t_s > 0.0) || !std::isfinite(t_as) ||
        !std::isfinite(t_a) || !std::isfinite(t_s)) {
        throw degenerate_data_error("vanishing trace in regression-matrix criterion");
    }
    return std::log(t_as) - std::log(t_a) - std::log(t_s);
}

namespace {

Eigen::MatrixXd slice(const Eigen::MatrixXd& cov, const std::vector<int>& rows,
                      const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                cov(rows[r], cols[c]);
        }
    }
    return out;
}

Eigen::MatrixXd regression_matrix(const Eigen::MatrixXd& cov_inputs,
                                  const Eigen::MatrixXd& cov_cross) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cov_inputs);
    if (!lu.isInvertible()) {
        throw degenerate_data_error("singular covariance of the regressor group");
    }
    // cov_cross is Cov(outputs, inputs); solve for A with A * cov_inputs = cov_cross.
    return lu.solve(cov_cross.transpose()).transpose();
}

}  // namespace

TraceReport trace_method(const stats::DataMatrix& data, const std::vector<int>& x_cols,
                         const std::vector<int>& y_cols) {
    if (x_cols.empty() || y_cols.empty()) throw input_error("both groups must be non-empty");
    std::vector<char> seen(static_cast<std::size_t>(data.cols()), 0);
    for (const std::vector<int>* group : {&x_cols, &y_cols}) {
        for (int c : *group) {
            if (c < 0 || c >= data.cols()) throw input_error("column index out of range");
            if (seen[static_cast<std::size_t>(c)] != 0) {
                throw input_error("groups must use disjoint, non-repeating columns");
            }
            seen[static_cast<std::size_t>(c)] = 1;
        }
    }

    const Eigen::MatrixXd cov = stats::covariance_matrix(data.values(), 1);
    const Eigen::MatrixXd cov_xx = slice(cov, x_cols, x_cols);
    const Eigen::MatrixXd cov_yy = slice(cov, y_cols, y_cols);
    const Eigen::MatrixXd cov_yx = slice(cov, y_cols, x_cols);

    const Eigen::MatrixXd a_xy = regression_matrix(cov_xx, cov_yx);
    const Eigen::MatrixXd a_yx = regression_matrix(cov_yy, cov_yx.transpose());

    TraceReport report;
    report.delta_xy = trace_delta(a_xy, cov_xx);
    report.delta_yx = trace_delta(a_yx, cov_yy);
    const double gap = std::abs(report.delta_yx) - std::abs(report.delta_xy);
    if (std::abs(gap) <= 1e-12) {
        report.decision = Decision::Indeterminate;
    } else if (gap > 0.0) {
        report.decision = Decision::XcausesY;
    } else {
        report.decision = Decision::YcausesX;
    }
    return report;
}

}  // namespace vecci::algorithms
