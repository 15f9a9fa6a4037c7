#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "vecci/graph.hpp"
#include "vecci/stats.hpp"

namespace vecci::citest {

// Whole variable group appended to a query's conditioning set.
enum class Group { None, X, Y };

struct CiQuery {
    int i = 0;
    int j = 0;
    std::vector<int> cond;           // must not contain i or j
    Group extra_group = Group::None; // group members are added minus {i, j}
};

// Conditional-independence decision procedure over a fixed variable universe
// split into an X group and a Y group.  decide() returns true for
// "independent", increments the test counter exactly once per call (atomic,
// so callers may fan queries out across threads), and tags propagated errors
// with the offending query.
class CiBackend {
public:
    virtual ~CiBackend() = default;

    bool decide(const CiQuery& query) const;
    std::uint64_t test_count() const { return count_.load(std::memory_order_relaxed); }

    const std::vector<int>& x_vars() const { return x_vars_; }
    const std::vector<int>& y_vars() const { return y_vars_; }
    const std::vector<int>& group_members(Group g) const;
    int universe_size() const { return universe_size_; }

protected:
    CiBackend(std::vector<int> x_vars, std::vector<int> y_vars, int universe_size);

    // `effective_cond` is cond with the extra group merged in, sorted, unique.
    virtual bool decide_impl(const CiQuery& query, const std::vector<int>& effective_cond) const = 0;

private:
    std::vector<int> x_vars_;
    std::vector<int> y_vars_;
    int universe_size_ = 0;
    mutable std::atomic<std::uint64_t> count_{0};
};

// Ground-truth backend: d-separation in a known grouped DAG.
class OracleBackend final : public CiBackend {
public:
    explicit OracleBackend(graph::GroupedDag gd);
    const graph::GroupedDag& grouped_dag() const { return gd_; }

protected:
    bool decide_impl(const CiQuery& query, const std::vector<int>& effective_cond) const override;

private:
    graph::GroupedDag gd_;
};

// How a data backend folds an extra group into the conditioning.
enum class GroupConditioning {
    Explicit,     // group columns join the conditioning set of the test itself
    Residualize,  // tested columns are first regressed on the group
};

struct ParCorrOptions {
    double alpha = 0.01;                                    // per-test significance
    GroupConditioning mode = GroupConditioning::Residualize;
};

// Gaussian backend: Fisher z test of the partial correlation.  Partial
// correlations are read off inverted covariance submatrices (cached for the
// large fixed conditioning sets the full algorithm re-uses); that route is
// algebraically identical to stats::partial_correlation, which remains the
// fallback on numerically troublesome queries.
class ParCorrBackend final : public CiBackend {
public:
    ParCorrBackend(stats::DataMatrix data, std::vector<int> x_cols, std::vector<int> y_cols,
                   ParCorrOptions options = {});

    // Correlation and degrees-of-freedom bookkeeping behind a decide() call;
    // exposed so tests can compare routes.
    std::pair<double, int> query_correlation(const CiQuery& query) const;

protected:
    bool decide_impl(const CiQuery& query, const std::vector<int>& effective_cond) const override;

private:
    struct GroupData {
        stats::DataMatrix data;       // all columns residualized on the group
        Eigen::MatrixXd covariance;
        bool ready = false;
    };
    const GroupData& residual_view(Group g) const;
    double submatrix_parcorr(const Eigen::MatrixXd& cov, const stats::DataMatrix& data, int i,
                             int j, const std::vector<int>& cond) const;

    stats::DataMatrix data_;
    Eigen::MatrixXd covariance_;
    ParCorrOptions options_;
    mutable GroupData residual_x_;  // residualized on the X columns
    mutable GroupData residual_y_;  // residualized on the Y columns
    mutable std::map<std::vector<int>, Eigen::MatrixXd> precision_cache_;
    mutable std::mutex cache_mutex_;
};

struct NonlinearOptions {
    double alpha = 0.01;
    int permutations = 199;
    double ridge = 1e-3;
    std::uint64_t seed = 0;
    int num_threads = 1;  // threads for the permutation loop of one query
};

// Nonlinear backend: kernel ridge regression (RBF kernel, median-distance
// bandwidth) removes the conditioning set, then a permutation distance
// correlation test decides.  Per-query seeds derive from (seed, i, j, cond),
// so results do not depend on the order queries are issued in.
class NonlinearBackend final : public CiBackend {
public:
    NonlinearBackend(stats::DataMatrix data, std::vector<int> x_cols, std::vector<int> y_cols,
                     NonlinearOptions options = {});

protected:
    bool decide_impl(const CiQuery& query, const std::vector<int>& effective_cond) const override;

private:
    Eigen::VectorXd kernel_residuals(int target, const std::vector<int>& regressors) const;

    stats::DataMatrix data_;
    NonlinearOptions options_;
    struct KernelFit {
        Eigen::MatrixXd kernel;
        Eigen::LLT<Eigen::MatrixXd> solver;
    };
    mutable std::map<std::vector<int>, std::shared_ptr<KernelFit>> kernel_cache_;
    mutable std::mutex cache_mutex_;
};

}  // namespace vecci::citest
