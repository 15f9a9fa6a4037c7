#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "vecci/rng.hpp"

namespace vecci::stats {

// Column-labelled sample matrix (rows = observations).
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(Eigen::MatrixXd values, std::vector<std::string> names);

    int rows() const { return static_cast<int>(values_.rows()); }
    int cols() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& names() const { return names_; }
    int column_index(const std::string& name) const;  // throws input_error when missing

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> names_;
};

struct ResidualizeResult {
    Eigen::MatrixXd residuals;   // rows × |targets|, column order follows `targets`
    bool rank_deficient = false; // regressor matrix was rank deficient; minimum-norm fit used
};

// OLS residuals of the target columns on the regressor columns, intercept
// always included.  Rank-deficient designs fall back to the minimum-norm
// least-squares solution and set the warning flag.
ResidualizeResult residualize(const DataMatrix& data, const std::vector<int>& targets,
                              const std::vector<int>& regressors);

// Pearson correlation of the residuals of columns i and j after removing the
// conditioning columns (and the mean).  Clamped to [-1, 1].
double partial_correlation(const DataMatrix& data, int i, int j, const std::vector<int>& cond);

struct TestOutcome {
    bool independent = false;
    double p_value = 1.0;
    double statistic = 0.0;
    int cond_size = 0;
};

// Two-sided Fisher z test of a (partial) correlation estimated with
// `cond_size` conditioning variables: z = sqrt(N - cond_size - 3) * atanh(|r|).
TestOutcome fisher_z_decision(double r, int sample_size, int cond_size, double alpha);

// Permutation test of distance correlation between two row-aligned sample
// sets.  p = (1 + #{permuted stat >= observed}) / (permutations + 1).  The
// caller's generator seeds per-permutation streams, so the result does not
// depend on the worker count.
TestOutcome distance_correlation_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                      int permutations, double alpha, Rng& rng,
                                      int num_threads = 0);

// Single-threaded reference of the same computation, kept for kernel tests.
TestOutcome distance_correlation_test_serial(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                             int permutations, double alpha, Rng& rng);

// Distance correlation statistic alone (no test).
double distance_correlation(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// Sample covariance (denominator N - 1) with the entry loop parallelized, and
// its serial reference implementation; both compute entries identically.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& data, int num_threads = 0);
Eigen::MatrixXd covariance_matrix_serial(const Eigen::MatrixXd& data);

}  // namespace vecci::stats
