#include "vecci/synth.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vecci/error.hpp"

namespace vecci::synth {

std::string to_string(Mechanism m) {
    return m == Mechanism::Linear ? "linear" : "quadratic";
}

Mechanism mechanism_from_string(const std::string& name) {
    if (name == "linear") return Mechanism::Linear;
    if (name == "quadratic") return Mechanism::Quadratic;
    throw input_error("unknown mechanism '" + name + "' (expected linear or quadratic)");
}

void validate(const ModelParams& params) {
    if (params.n < 1 || params.m < 1) throw input_error("group sizes must be at least 1");
    if (params.sample_size < 2) throw input_error("sample size must be at least 2");
    for (double dens : {params.dens_x, params.dens_y, params.dens_a}) {
        if (!(dens >= 0.0 && dens <= 1.0)) throw input_error("densities must lie in [0, 1]");
    }
    if (!std::isfinite(params.effect_lo) || !std::isfinite(params.effect_hi) ||
        params.effect_lo < 0.0 || params.effect_hi < params.effect_lo) {
        throw input_error("effect interval must satisfy 0 <= lo <= hi");
    }
}

namespace {

constexpr double kInternalCoeffLo = 0.1;
constexpr double kInternalCoeffHi = 0.7;

std::vector<std::string> column_names(int n, int m) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n + m));
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    for (int j = 1; j <= m; ++j) names.push_back("y" + std::to_string(j));
    return names;
}

double coeff_at(const LinearGroupModel& model, int parent, int child) {
    const auto it = model.internal_coeffs.find({parent, child});
    if (it == model.internal_coeffs.end()) {
        throw input_error("model is missing a coefficient for an internal edge");
    }
    return it->second;
}

void require_canonical(const graph::GroupedDag& gd) {
    const int n = gd.n();
    for (int i = 0; i < n; ++i) {
        if (gd.x_nodes()[static_cast<std::size_t>(i)] != i) {
            throw input_error("model structure must use canonical node ids");
        }
    }
    for (int j = 0; j < gd.m(); ++j) {
        if (gd.y_nodes()[static_cast<std::size_t>(j)] != n + j) {
            throw input_error("model structure must use canonical node ids");
        }
    }
}

}  // namespace

SampleResult sample_model(const ModelParams& params, Rng& rng) {
    validate(params);
    const int n = params.n;
    const int m = params.m;

    LinearGroupModel model;
    model.mechanism = params.mechanism;
    model.structure =
        graph::random_grouped_dag(n, m, params.dens_x, params.dens_y, params.dens_a, rng);

    model.interaction = Eigen::MatrixXd::Zero(m, n);
    std::vector<std::pair<int, int>> eta_edges;
    for (const auto& [u, v] : model.structure.dag().edges()) {
        if (u < n && v >= n) {
            model.interaction(v - n, u) = rng.symmetric_uniform(params.effect_lo, params.effect_hi);
        } else {
            model.internal_coeffs[{u, v}] = rng.symmetric_uniform(kInternalCoeffLo, kInternalCoeffHi);
            if (u >= n) eta_edges.emplace_back(u - n, v - n);
        }
    }
    model.eta_y_dag = graph::Dag(m, std::move(eta_edges));

    model.noise_variances.reserve(static_cast<std::size_t>(n + m));
    for (int v = 0; v < n + m; ++v) model.noise_variances.push_back(rng.uniform(0.5, 2.0));

    stats::DataMatrix data = sample_data(model, params.sample_size, rng);
    return SampleResult{std::move(model), std::move(data)};
}

stats::DataMatrix sample_data(const LinearGroupModel& model, int sample_size, Rng& rng) {
    if (sample_size < 2) throw sample_size_error("need at least 2 rows");
    require_canonical(model.structure);
    const int n = model.structure.n();
    const int m = model.structure.m();
    const int total = n + m;
    if (static_cast<int>(model.noise_variances.size()) != total) {
        throw input_error("noise variance vector must cover every node");
    }
    if (model.interaction.rows() != m || model.interaction.cols() != n) {
        throw input_error("interaction matrix shape must match the group sizes");
    }

    // Noise, node-major so the draw sequence is independent of the topology.
    Eigen::MatrixXd noise(sample_size, total);
    for (int v = 0; v < total; ++v) {
        const double scale = std::sqrt(model.noise_variances[static_cast<std::size_t>(v)]);
        for (int row = 0; row < sample_size; ++row) noise(row, v) = scale * rng.normal();
    }

    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(sample_size, total);
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(sample_size, m);

    // X columns from the internal SCM, Y-noise columns from theirs; both only
    // ever reference earlier nodes of the topological order.
    for (int v : model.structure.dag().topological_order()) {
        if (v < n) {
            Eigen::VectorXd col = noise.col(v);
            for (int p : model.structure.dag().parents(v)) {
                if (p >= n) throw input_error("X variables cannot depend on Y");
                col += coeff_at(model, p, v) * values.col(p);
            }
            values.col(v) = col;
        } else {
            const int j = v - n;
            Eigen::VectorXd col = noise.col(v);
            for (int p : model.structure.dag().parents(v)) {
                if (p >= n) col += coeff_at(model, p, v) * eta.col(p - n);
            }
            eta.col(j) = col;
        }
    }

    Eigen::MatrixXd transmitted = values.leftCols(n);
    if (model.mechanism == Mechanism::Quadratic) {
        transmitted = transmitted.array().square().matrix();
    }
    values.rightCols(m) = transmitted * model.interaction.transpose() + eta;

    return stats::DataMatrix(std::move(values), column_names(n, m));
}

stats::DataMatrix example1_sample(double a, double b, double c, double d, int sample_size,
                                  Rng& rng) {
    if (!(std::abs(a) < 1.0) || !(std::abs(d) < 1.0)) {
        throw input_error("correlations a and d must lie strictly inside (-1, 1)");
    }
    if (!std::isfinite(b) || !std::isfinite(c)) throw input_error("effects must be finite");
    if (sample_size < 10) throw sample_size_error("need at least 10 rows");

    Eigen::MatrixXd draws(sample_size, 4);
    for (int v = 0; v < 4; ++v) {
        for (int row = 0; row < sample_size; ++row) draws(row, v) = rng.normal();
    }

    Eigen::MatrixXd values(sample_size, 4);
    values.col(0) = draws.col(0);
    values.col(1) = a * draws.col(0) + std::sqrt(1.0 - a * a) * draws.col(1);
    const Eigen::VectorXd eta1 = draws.col(2);
    const Eigen::VectorXd eta2 = d * draws.col(2) + std::sqrt(1.0 - d * d) * draws.col(3);
    values.col(2) = b * values.col(0) + eta1;
    values.col(3) = c * values.col(1) + eta2;

    return stats::DataMatrix(std::move(values), {"x1", "x2", "y1", "y2"});
}

}  // namespace vecci::synth
