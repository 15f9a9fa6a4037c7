#include "vecci/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "vecci/error.hpp"
#include "vecci/parallel.hpp"

namespace vecci::stats {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw input_error(what);
}

void check_column(const DataMatrix& data, int col, const char* role) {
    if (col < 0 || col >= data.cols())
        throw input_error(std::string("stats: ") + role + " column index out of range");
}

}  // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
    require(values_.rows() >= 2, "data matrix: needs at least two rows");
    require(static_cast<std::size_t>(values_.cols()) == names_.size(),
            "data matrix: one name per column required");
    require(values_.allFinite(), "data matrix: entries must be finite");
    std::set<std::string> seen;
    for (const auto& name : names_) {
        require(!name.empty(), "data matrix: empty column name");
        require(seen.insert(name).second, "data matrix: duplicate column name '" + name + "'");
    }
}

int DataMatrix::column_index(const std::string& name) const {
    for (std::size_t k = 0; k < names_.size(); ++k)
        if (names_[k] == name) return static_cast<int>(k);
    throw input_error("data matrix: no column named '" + name + "'");
}

ResidualizeResult residualize(const DataMatrix& data, const std::vector<int>& targets,
                              const std::vector<int>& regressors) {
    for (int t : targets) check_column(data, t, "target");
    for (int r : regressors) check_column(data, r, "regressor");
    const int n = data.rows();
    const int k = static_cast<int>(regressors.size());
    if (n <= k + 1)
        throw sample_size_error("residualize: need more rows than regressors plus intercept");

    Eigen::MatrixXd design(n, k + 1);
    design.col(0).setOnes();
    for (int c = 0; c < k; ++c) design.col(c + 1) = data.values().col(regressors[static_cast<std::size_t>(c)]);
    Eigen::MatrixXd t(n, static_cast<int>(targets.size()));
    for (std::size_t c = 0; c < targets.size(); ++c) t.col(static_cast<int>(c)) = data.values().col(targets[c]);

    // Rank-revealing decomposition: minimum-norm solution on deficient designs.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    ResidualizeResult out;
    out.rank_deficient = cod.rank() < k + 1;
    out.residuals = t - design * cod.solve(t);
    return out;
}

double partial_correlation(const DataMatrix& data, int i, int j, const std::vector<int>& cond) {
    check_column(data, i, "first");
    check_column(data, j, "second");
    ResidualizeResult res = residualize(data, {i, j}, cond);
    const auto ri = res.residuals.col(0);
    const auto rj = res.residuals.col(1);
    const double vi = ri.squaredNorm();
    const double vj = rj.squaredNorm();
    auto floor_for = [&](int col) {
        const double scale = 1.0 + data.values().col(col).cwiseAbs().maxCoeff();
        const double tiny = 1e-12 * scale;
        return static_cast<double>(data.rows()) * tiny * tiny;
    };
    if (vi <= floor_for(i) || vj <= floor_for(j))
        throw degenerate_data_error("partial_correlation: zero-variance residual");
    const double r = ri.dot(rj) / std::sqrt(vi * vj);
    return std::clamp(r, -1.0, 1.0);
}

TestOutcome fisher_z_decision(double r, int sample_size, int cond_size, double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "fisher_z: alpha outside (0, 1)");
    require(std::abs(r) <= 1.0 + 1e-12, "fisher_z: correlation outside [-1, 1]");
    const double df = static_cast<double>(sample_size) - cond_size - 3.0;
    if (df < 1.0)
        throw sample_size_error("fisher_z: sample size too small for the conditioning set");
    const double a = std::min(std::abs(r), 1.0);
    const double z = std::sqrt(df) * std::atanh(a);  // atanh(1) = inf gives p = 0
    const double p = std::erfc(z / std::sqrt(2.0));
    TestOutcome out;
    out.independent = p > alpha;
    out.p_value = p;
    out.statistic = z;
    out.cond_size = cond_size;
    return out;
}

namespace {

// Double-centered Euclidean distance matrix of the rows of x.
Eigen::MatrixXd centered_distances(const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = (x.row(i) - x.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    const Eigen::VectorXd row_mean = d.rowwise().mean();
    const double grand = row_mean.mean();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) += grand - row_mean(i) - row_mean(j);
    return d;
}

double mean_entrywise_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.cwiseProduct(b).sum() / (static_cast<double>(a.rows()) * static_cast<double>(a.rows()));
}

double permuted_numerator(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                          const std::vector<int>& pi) {
    const int n = static_cast<int>(a.rows());
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const int pj = pi[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) acc += a(i, j) * b(pi[static_cast<std::size_t>(i)], pj);
    }
    return acc / (static_cast<double>(n) * static_cast<double>(n));
}

struct DcorParts {
    Eigen::MatrixXd a, b;
    double num = 0.0, dvx = 0.0, dvy = 0.0;
};

DcorParts dcor_parts(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    require(x.rows() == y.rows(), "distance_correlation: row counts differ");
    DcorParts p;
    p.a = centered_distances(x);
    p.b = centered_distances(y);
    p.num = mean_entrywise_product(p.a, p.b);
    p.dvx = mean_entrywise_product(p.a, p.a);
    p.dvy = mean_entrywise_product(p.b, p.b);
    if (p.dvx <= 0.0 || p.dvy <= 0.0)
        throw degenerate_data_error("distance_correlation: constant input");
    return p;
}

double dcor_from(double num, double dvx, double dvy) {
    return std::sqrt(std::max(0.0, num) / std::sqrt(dvx * dvy));
}

TestOutcome dcor_outcome(const DcorParts& parts, const std::vector<double>& perm_nums,
                         double alpha) {
    const double obs = std::max(0.0, parts.num);
    int ge = 0;
    for (double v : perm_nums)
        if (std::max(0.0, v) >= obs) ++ge;
    TestOutcome out;
    out.p_value = (1.0 + ge) / (static_cast<double>(perm_nums.size()) + 1.0);
    out.independent = out.p_value > alpha;
    out.statistic = dcor_from(parts.num, parts.dvx, parts.dvy);
    out.cond_size = 0;
    return out;
}

void check_dcor_args(const Eigen::MatrixXd& x, int permutations, double alpha) {
    require(x.rows() >= 10, "distance_correlation_test: needs at least 10 rows");
    require(permutations >= 99, "distance_correlation_test: needs at least 99 permutations");
    require(alpha > 0.0 && alpha < 1.0, "distance_correlation_test: alpha outside (0, 1)");
}

}  // namespace

double distance_correlation(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    DcorParts p = dcor_parts(x, y);
    return dcor_from(p.num, p.dvx, p.dvy);
}

TestOutcome distance_correlation_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                      int permutations, double alpha, Rng& rng, int num_threads) {
    check_dcor_args(x, permutations, alpha);
    DcorParts parts = dcor_parts(x, y);
    const std::uint64_t base = rng.raw();
    const int n = static_cast<int>(x.rows());
    std::vector<double> nums(static_cast<std::size_t>(permutations), 0.0);
    const int threads = resolve_threads(num_threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (int k = 0; k < permutations; ++k) {
        Rng local(derive_seed(base, static_cast<std::uint64_t>(k)));
        const std::vector<int> pi = local.permutation(n);
        nums[static_cast<std::size_t>(k)] = permuted_numerator(parts.a, parts.b, pi);
    }
    (void)threads;
    return dcor_outcome(parts, nums, alpha);
}

TestOutcome distance_correlation_test_serial(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                             int permutations, double alpha, Rng& rng) {
    check_dcor_args(x, permutations, alpha);
    DcorParts parts = dcor_parts(x, y);
    const std::uint64_t base = rng.raw();
    const int n = static_cast<int>(x.rows());
    std::vector<double> nums(static_cast<std::size_t>(permutations), 0.0);
    for (int k = 0; k < permutations; ++k) {
        Rng local(derive_seed(base, static_cast<std::uint64_t>(k)));
        const std::vector<int> pi = local.permutation(n);
        nums[static_cast<std::size_t>(k)] = permuted_numerator(parts.a, parts.b, pi);
    }
    return dcor_outcome(parts, nums, alpha);
}

namespace {

double covariance_entry(const Eigen::MatrixXd& data, const Eigen::VectorXd& mean, int a, int b) {
    const int n = static_cast<int>(data.rows());
    double acc = 0.0;
    for (int t = 0; t < n; ++t) acc += (data(t, a) - mean(a)) * (data(t, b) - mean(b));
    return acc / (n - 1.0);
}

}  // namespace

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& data, int num_threads) {
    require(data.rows() >= 2, "covariance: needs at least two rows");
    const int p = static_cast<int>(data.cols());
    const Eigen::VectorXd mean = data.colwise().mean();
    Eigen::MatrixXd cov(p, p);
    const int pairs = p * (p + 1) / 2;
    const int threads = resolve_threads(num_threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (int k = 0; k < pairs; ++k) {
        // Unflatten the upper-triangle index.
        int a = 0;
        int rem = k;
        while (rem >= p - a) {
            rem -= p - a;
            ++a;
        }
        const int b = a + rem;
        const double v = covariance_entry(data, mean, a, b);
        cov(a, b) = v;
        cov(b, a) = v;
    }
    (void)threads;
    return cov;
}

Eigen::MatrixXd covariance_matrix_serial(const Eigen::MatrixXd& data) {
    require(data.rows() >= 2, "covariance: needs at least two rows");
    const int p = static_cast<int>(data.cols());
    const Eigen::VectorXd mean = data.colwise().mean();
    Eigen::MatrixXd cov(p, p);
    for (int a = 0; a < p; ++a) {
        for (int b = a; b < p; ++b) {
            const double v = covariance_entry(data, mean, a, b);
            cov(a, b) = v;
            cov(b, a) = v;
        }
    }
    return cov;
}

}  // namespace vecci::stats
