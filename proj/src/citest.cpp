#include "vecci/citest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vecci/error.hpp"

namespace vecci::citest {

namespace {

std::string describe(const CiQuery& q) {
    std::string s = " [query i=" + std::to_string(q.i) + " j=" + std::to_string(q.j) +
                    " |cond|=" + std::to_string(q.cond.size());
    if (q.extra_group == Group::X) s += " group=X";
    if (q.extra_group == Group::Y) s += " group=Y";
    return s + "]";
}

template <typename Fn>
bool with_query_context(const CiQuery& q, Fn&& fn) {
    try {
        return fn();
    } catch (const degenerate_data_error& e) {
        throw degenerate_data_error(e.what() + describe(q));
    } catch (const sample_size_error& e) {
        throw sample_size_error(e.what() + describe(q));
    } catch (const input_error& e) {
        throw input_error(e.what() + describe(q));
    }
}

const std::vector<int>& empty_group() {
    static const std::vector<int> none;
    return none;
}

}  // namespace

CiBackend::CiBackend(std::vector<int> x_vars, std::vector<int> y_vars, int universe_size)
    : x_vars_(std::move(x_vars)), y_vars_(std::move(y_vars)), universe_size_(universe_size) {
    std::sort(x_vars_.begin(), x_vars_.end());
    std::sort(y_vars_.begin(), y_vars_.end());
}

const std::vector<int>& CiBackend::group_members(Group g) const {
    switch (g) {
        case Group::X: return x_vars_;
        case Group::Y: return y_vars_;
        default: return empty_group();
    }
}

bool CiBackend::decide(const CiQuery& query) const {
    if (query.i < 0 || query.i >= universe_size_ || query.j < 0 || query.j >= universe_size_)
        throw input_error("ci query: variable index out of range" + describe(query));
    if (query.i == query.j) throw input_error("ci query: identical variables" + describe(query));
    std::vector<int> effective = query.cond;
    for (int c : effective) {
        if (c < 0 || c >= universe_size_)
            throw input_error("ci query: conditioning index out of range" + describe(query));
        if (c == query.i || c == query.j)
            throw input_error("ci query: conditioning set contains a tested variable" + describe(query));
    }
    for (int g : group_members(query.extra_group))
        if (g != query.i && g != query.j) effective.push_back(g);
    std::sort(effective.begin(), effective.end());
    effective.erase(std::unique(effective.begin(), effective.end()), effective.end());

    count_.fetch_add(1, std::memory_order_relaxed);
    return with_query_context(query, [&] { return decide_impl(query, effective); });
}

OracleBackend::OracleBackend(graph::GroupedDag gd)
    : CiBackend(gd.x_nodes(), gd.y_nodes(), gd.dag().node_count()), gd_(std::move(gd)) {}

bool OracleBackend::decide_impl(const CiQuery& query, const std::vector<int>& effective_cond) const {
    return graph::d_separated(gd_.dag(), {query.i, query.j, effective_cond});
}

ParCorrBackend::ParCorrBackend(stats::DataMatrix data, std::vector<int> x_cols,
                               std::vector<int> y_cols, ParCorrOptions options)
    : CiBackend(std::move(x_cols), std::move(y_cols), data.cols()),
      data_(std::move(data)),
      options_(options) {
    if (options_.alpha <= 0.0 || options_.alpha >= 1.0)
        throw input_error("parcorr backend: alpha outside (0, 1)");
    covariance_ = stats::covariance_matrix(data_.values(), 1);
}

const ParCorrBackend::GroupData& ParCorrBackend::residual_view(Group g) const {
    GroupData& slot = (g == Group::X) ? residual_x_ : residual_y_;
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (!slot.ready) {
        std::vector<int> all(static_cast<std::size_t>(data_.cols()));
        for (int c = 0; c < data_.cols(); ++c) all[static_cast<std::size_t>(c)] = c;
        stats::ResidualizeResult r = stats::residualize(data_, all, group_members(g));
        slot.data = stats::DataMatrix(r.residuals, data_.names());
        slot.covariance = stats::covariance_matrix(slot.data.values(), 1);
        slot.ready = true;
    }
    return slot;
}

double ParCorrBackend::submatrix_parcorr(const Eigen::MatrixXd& cov, const stats::DataMatrix& data,
                                         int i, int j, const std::vector<int>& cond) const {
    if (cond.empty()) {
        const double denom = cov(i, i) * cov(j, j);
        const double r = denom > 0.0 ? cov(i, j) / std::sqrt(denom) : std::nan("");
        if (std::isfinite(r)) return std::clamp(r, -1.0, 1.0);
        return stats::partial_correlation(data, i, j, cond);  // canonical error semantics
    }
    std::vector<int> v;
    v.reserve(cond.size() + 2);
    v.push_back(i);
    v.push_back(j);
    v.insert(v.end(), cond.begin(), cond.end());
    std::sort(v.begin(), v.end());
    const int k = static_cast<int>(v.size());

    Eigen::MatrixXd precision;
    bool cached = false;
    constexpr int kCacheMinDim = 12;
    if (k >= kCacheMinDim) {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = precision_cache_.find(v);
        if (it != precision_cache_.end()) {
            precision = it->second;
            cached = true;
        }
    }
    if (!cached) {
        Eigen::MatrixXd sub(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                sub(a, b) = cov(v[static_cast<std::size_t>(a)], v[static_cast<std::size_t>(b)]);
        precision = sub.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
        if (k >= kCacheMinDim && precision.allFinite()) {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            if (precision_cache_.size() > 64) precision_cache_.clear();
            precision_cache_.emplace(v, precision);
        }
    }
    const int pi = static_cast<int>(std::lower_bound(v.begin(), v.end(), i) - v.begin());
    const int pj = static_cast<int>(std::lower_bound(v.begin(), v.end(), j) - v.begin());
    const double dii = precision(pi, pi);
    const double djj = precision(pj, pj);
    const double r = -precision(pi, pj) / std::sqrt(dii * djj);
    if (dii > 0.0 && djj > 0.0 && std::isfinite(r)) return std::clamp(r, -1.0, 1.0);
    // Singular or indefinite submatrix: fall back to the regression route,
    // which carries the canonical degenerate-data semantics.
    return stats::partial_correlation(data, i, j, cond);
}

std::pair<double, int> ParCorrBackend::query_correlation(const CiQuery& query) const {
    std::vector<int> cond = query.cond;
    std::sort(cond.begin(), cond.end());
    cond.erase(std::unique(cond.begin(), cond.end()), cond.end());
    if (query.extra_group != Group::None && options_.mode == GroupConditioning::Residualize) {
        const GroupData& view = residual_view(query.extra_group);
        const int cond_size =
            static_cast<int>(cond.size() + group_members(query.extra_group).size());
        return {submatrix_parcorr(view.covariance, view.data, query.i, query.j, cond), cond_size};
    }
    std::vector<int> effective = cond;
    for (int g : group_members(query.extra_group))
        if (g != query.i && g != query.j) effective.push_back(g);
    std::sort(effective.begin(), effective.end());
    effective.erase(std::unique(effective.begin(), effective.end()), effective.end());
    return {submatrix_parcorr(covariance_, data_, query.i, query.j, effective),
            static_cast<int>(effective.size())};
}

bool ParCorrBackend::decide_impl(const CiQuery& query, const std::vector<int>&) const {
    auto [r, cond_size] = query_correlation(query);
    return stats::fisher_z_decision(r, data_.rows(), cond_size, options_.alpha).independent;
}

NonlinearBackend::NonlinearBackend(stats::DataMatrix data, std::vector<int> x_cols,
                                   std::vector<int> y_cols, NonlinearOptions options)
    : CiBackend(std::move(x_cols), std::move(y_cols), data.cols()),
      data_(std::move(data)),
      options_(options) {
    if (options_.alpha <= 0.0 || options_.alpha >= 1.0)
        throw input_error("nonlinear backend: alpha outside (0, 1)");
    if (options_.permutations < 99) throw input_error("nonlinear backend: needs >= 99 permutations");
}

Eigen::VectorXd NonlinearBackend::kernel_residuals(int target, const std::vector<int>& regressors) const {
    std::shared_ptr<KernelFit> fit;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = kernel_cache_.find(regressors);
        if (it != kernel_cache_.end()) fit = it->second;
    }
    const int n = data_.rows();
    if (!fit) {
        Eigen::MatrixXd z(n, static_cast<int>(regressors.size()));
        for (std::size_t c = 0; c < regressors.size(); ++c)
            z.col(static_cast<int>(c)) = data_.values().col(regressors[c]);
        std::vector<double> sq;
        sq.reserve(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) sq.push_back((z.row(a) - z.row(b)).squaredNorm());
        auto mid = sq.begin() + static_cast<std::ptrdiff_t>(sq.size() / 2);
        std::nth_element(sq.begin(), mid, sq.end());
        const double bandwidth = std::max(std::sqrt(*mid), 1e-12);  // median pairwise distance
        auto out = std::make_shared<KernelFit>();
        out->kernel.resize(n, n);
        for (int a = 0; a < n; ++a) {
            out->kernel(a, a) = 1.0;
            for (int b = a + 1; b < n; ++b) {
                const double k = std::exp(-(z.row(a) - z.row(b)).squaredNorm() /
                                          (2.0 * bandwidth * bandwidth));
                out->kernel(a, b) = k;
                out->kernel(b, a) = k;
            }
        }
        Eigen::MatrixXd reg = out->kernel;
        reg.diagonal().array() += options_.ridge;
        out->solver.compute(reg);
        if (out->solver.info() != Eigen::Success)
            throw degenerate_data_error("kernel regression: kernel matrix not positive definite");
        std::lock_guard<std::mutex> lock(cache_mutex_);
        if (kernel_cache_.size() > 64) kernel_cache_.clear();
        auto [it, inserted] = kernel_cache_.emplace(regressors, out);
        fit = it->second;
        (void)inserted;
    }
    Eigen::VectorXd t = data_.values().col(target);
    t.array() -= t.mean();
    return t - fit->kernel * fit->solver.solve(t);
}

bool NonlinearBackend::decide_impl(const CiQuery& query, const std::vector<int>& effective_cond) const {
    // Canonical variable order keeps the decision exactly symmetric in (i, j).
    const int a = std::min(query.i, query.j);
    const int b = std::max(query.i, query.j);
    std::uint64_t h = derive_seed(options_.seed, static_cast<std::uint64_t>(a) * 1000003ULL +
                                                     static_cast<std::uint64_t>(b));
    for (int c : effective_cond) h = derive_seed(h, static_cast<std::uint64_t>(c) + 1);
    Rng rng(h);

    Eigen::VectorXd u;
    Eigen::VectorXd v;
    if (effective_cond.empty()) {
        u = data_.values().col(a);
        v = data_.values().col(b);
    } else {
        u = kernel_residuals(a, effective_cond);
        v = kernel_residuals(b, effective_cond);
    }
    return stats::distance_correlation_test(u, v, options_.permutations, options_.alpha, rng,
                                            options_.num_threads)
        .independent;
}

}  // namespace vecci::citest
