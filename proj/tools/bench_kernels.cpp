// Compares the OpenMP kernels against their serial reference implementations
// and reports wall times plus agreement.  Usage: bench_kernels [threads]
// (default: 2, exercising oversubscription on small machines).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "vecci/algorithms.hpp"
#include "vecci/bench.hpp"
#include "vecci/citest.hpp"
#include "vecci/rng.hpp"
#include "vecci/stats.hpp"
#include "vecci/synth.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const char* kernel, double serial, double parallel, bool equal) {
    std::printf("%-28s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   results %s\n", kernel,
                serial, parallel, parallel > 0 ? serial / parallel : 0.0,
                equal ? "identical" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : 2;
    std::printf("kernel benchmark, %d worker(s) requested\n\n", threads);

    vecci::Rng rng(20240816);

    // Covariance: one wide matrix.
    {
        Eigen::MatrixXd data(600, 300);
        for (Eigen::Index c = 0; c < data.cols(); ++c) {
            for (Eigen::Index r = 0; r < data.rows(); ++r) data(r, c) = rng.normal();
        }
        auto t0 = Clock::now();
        const Eigen::MatrixXd serial = vecci::stats::covariance_matrix_serial(data);
        const double serial_s = seconds_since(t0);
        t0 = Clock::now();
        const Eigen::MatrixXd parallel = vecci::stats::covariance_matrix(data, threads);
        const double parallel_s = seconds_since(t0);
        report("covariance_matrix", serial_s, parallel_s, serial == parallel);
    }

    // Distance-correlation permutation test.
    {
        Eigen::MatrixXd x(220, 3);
        Eigen::MatrixXd y(220, 3);
        for (Eigen::Index c = 0; c < 3; ++c) {
            for (Eigen::Index r = 0; r < x.rows(); ++r) {
                x(r, c) = rng.normal();
                y(r, c) = 0.4 * x(r, c) + rng.normal();
            }
        }
        vecci::Rng serial_rng(7);
        auto t0 = Clock::now();
        const auto serial = vecci::stats::distance_correlation_test_serial(x, y, 499, 0.01, serial_rng);
        const double serial_s = seconds_since(t0);
        vecci::Rng parallel_rng(7);
        t0 = Clock::now();
        const auto parallel =
            vecci::stats::distance_correlation_test(x, y, 499, 0.01, parallel_rng, threads);
        const double parallel_s = seconds_since(t0);
        report("distance_correlation_test", serial_s, parallel_s,
               serial.p_value == parallel.p_value && serial.statistic == parallel.statistic);
    }

    // Full-conditioning direction analysis over one sampled model.
    {
        vecci::synth::ModelParams params;
        params.n = params.m = 25;
        params.sample_size = 150;
        params.dens_x = params.dens_y = 0.1;
        params.dens_a = 0.5;
        vecci::Rng model_rng(99);
        const auto sample = vecci::synth::sample_model(params, model_rng);
        std::vector<int> x_cols, y_cols;
        for (int i = 0; i < params.n; ++i) x_cols.push_back(i);
        for (int j = 0; j < params.m; ++j) y_cols.push_back(params.n + j);

        const vecci::citest::ParCorrBackend backend(sample.data, x_cols, y_cols, {});
        vecci::algorithms::VecciOptions options;
        options.num_threads = 1;
        auto t0 = Clock::now();
        const auto serial = vecci::algorithms::vecci_full(backend, options);
        const double serial_s = seconds_since(t0);
        options.num_threads = threads;
        t0 = Clock::now();
        const auto parallel = vecci::algorithms::vecci_full(backend, options);
        const double parallel_s = seconds_since(t0);
        report("vecci_full", serial_s, parallel_s,
               serial.crit == parallel.crit && serial.decision == parallel.decision);
    }

    // Grid harness.
    {
        vecci::bench::ExperimentGrid grid;
        grid.base.n = grid.base.m = 10;
        grid.base.sample_size = 120;
        grid.base.dens_x = grid.base.dens_y = 0.1;
        grid.axes = {{"dens_a", {0.3, 0.6, 0.9}}};
        grid.repetitions = 10;
        grid.methods = {vecci::bench::Method::VecciFull};
        grid.seed = 4242;
        auto t0 = Clock::now();
        const auto serial = vecci::bench::run_grid(grid, 1);
        const double serial_s = seconds_since(t0);
        t0 = Clock::now();
        const auto parallel = vecci::bench::run_grid(grid, threads);
        const double parallel_s = seconds_since(t0);
        bool equal = serial.results.size() == parallel.results.size();
        for (std::size_t i = 0; equal && i < serial.results.size(); ++i) {
            equal = serial.results[i].correct == parallel.results[i].correct &&
                    serial.results[i].wrong == parallel.results[i].wrong &&
                    serial.results[i].indeterminate == parallel.results[i].indeterminate &&
                    serial.results[i].mean_crit == parallel.results[i].mean_crit;
        }
        report("run_grid", serial_s, parallel_s, equal);
    }

    return 0;
}
