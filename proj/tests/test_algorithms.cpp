#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "support/oracles.hpp"
#include "vecci/algorithms.hpp"
#include "vecci/citest.hpp"
#include "vecci/error.hpp"
#include "vecci/graph.hpp"
#include "vecci/rng.hpp"
#include "vecci/stats.hpp"

using vecci::Rng;
using vecci::algorithms::Decision;
using vecci::algorithms::DirectionReport;
using vecci::algorithms::ErrorKind;
using vecci::algorithms::Side;
using vecci::algorithms::TraceReport;
using vecci::algorithms::VanillaOptions;
using vecci::algorithms::VanillaReport;
using vecci::algorithms::VecciOptions;
using vecci::citest::CiQuery;
using vecci::citest::OracleBackend;
using vecci::graph::Dag;
using vecci::graph::GroupedDag;
using vecci::stats::DataMatrix;

namespace {

// Answers "dependent" until the counter passes `ok_calls`, then throws the
// configured error; used to exercise partial-result propagation.
class FlakyBackend final : public vecci::citest::CiBackend {
public:
    FlakyBackend(std::vector<int> xs, std::vector<int> ys, int universe, std::uint64_t ok_calls,
                 ErrorKind kind)
        : CiBackend(std::move(xs), std::move(ys), universe), ok_calls_(ok_calls), kind_(kind) {}

protected:
    bool decide_impl(const CiQuery&, const std::vector<int>&) const override {
        if (test_count() > ok_calls_) {
            if (kind_ == ErrorKind::Degenerate) throw vecci::degenerate_data_error("flat column");
            throw vecci::sample_size_error("too few rows");
        }
        return false;
    }

private:
    std::uint64_t ok_calls_;
    ErrorKind kind_;
};

DataMatrix gaussian_data(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd values(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) values(r, c) = rng.normal();
    std::vector<std::string> names;
    for (int c = 0; c < cols; ++c) names.push_back("c" + std::to_string(c + 1));
    return DataMatrix(values, names);
}

// Rescales columns so the sample covariance (ddof 1) is exactly the identity.
Eigen::MatrixXd whitened(const Eigen::MatrixXd& raw) {
    const Eigen::MatrixXd centered = raw.rowwise() - raw.colwise().mean();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(raw.rows() - 1);
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
    return centered * l.inverse().transpose();
}

}  // namespace

TEST_CASE("two shared children make conditioning dependence appear on the parent side") {
    // X = {0, 1} with the single Y child 2 of both: the groups are marginally
    // separated everywhere, and joining Y links the X pair.
    const auto fixtures = testsupport::figure_fixtures();
    const OracleBackend backend(fixtures[0].gd);
    REQUIRE(fixtures[0].name == std::string("cross_v_structure"));

    for (const DirectionReport& report :
         {vecci::algorithms::vecci_full(backend), vecci::algorithms::vecci_pc(backend)}) {
        CHECK(report.dens_x == 0.0);
        CHECK(report.dens_x_given_y == 1.0);
        CHECK(report.dens_y == 0.0);
        CHECK(report.dens_y_given_x == 0.0);
        CHECK(report.d_xy == 1.0);
        CHECK(report.d_yx == 0.0);
        CHECK(report.crit == 1.0);
        CHECK(report.decision == Decision::XcausesY);
        CHECK(report.ci_test_count == 2);
    }
}

TEST_CASE("a fully X-mediated child pair loses its link under joint conditioning") {
    const auto fixtures = testsupport::figure_fixtures();
    REQUIRE(fixtures[3].name == std::string("married_parents_chain"));
    const OracleBackend backend(fixtures[3].gd);
    const DirectionReport report = vecci::algorithms::vecci_full(backend);
    CHECK(report.dens_x == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(report.dens_x_given_y == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(report.d_xy == 0.0);
    CHECK(report.dens_y == 1.0);
    CHECK(report.dens_y_given_x == 0.0);
    CHECK(report.d_yx == -1.0);
    CHECK(report.crit == 1.0);
    CHECK(report.decision == Decision::XcausesY);
    CHECK(report.ci_test_count == 8);
}

TEST_CASE("a neutral structure yields a zero criterion and no decision") {
    const auto fixtures = testsupport::figure_fixtures();
    REQUIRE(fixtures[2].name == std::string("chain_with_y_chain"));
    const OracleBackend backend(fixtures[2].gd);
    const DirectionReport report = vecci::algorithms::vecci_full(backend);
    CHECK(report.d_xy == 0.0);
    CHECK(report.d_yx == 0.0);
    CHECK(report.crit == 0.0);
    CHECK(report.decision == Decision::Indeterminate);
    CHECK(report.ci_test_count == 8);
}

TEST_CASE("forward models never push the criterion negative") {
    // When every cross edge points from X into Y, joining the opposite group
    // can only add dependence on the X side and only remove it on the Y side.
    for (int trial = 0; trial < 30; ++trial) {
        Rng rng(vecci::derive_seed(848484, static_cast<std::uint64_t>(trial)));
        const int n = 2 + static_cast<int>(rng.below(3));
        const int m = 2 + static_cast<int>(rng.below(3));
        const GroupedDag gd =
            vecci::graph::random_grouped_dag(n, m, 0.3, 0.3, 0.2 + 0.2 * (trial % 3), rng);
        REQUIRE(gd.cross_edges_forward_only());
        const OracleBackend backend(gd);
        VecciOptions options;
        options.alpha = 0.0;
        for (const DirectionReport& report : {vecci::algorithms::vecci_full(backend, options),
                                              vecci::algorithms::vecci_pc(backend, options)}) {
            CHECK(report.d_xy >= 0.0);
            CHECK(report.d_yx <= 0.0);
            CHECK(report.crit == report.d_xy - report.d_yx);
            CHECK(report.decision != Decision::YcausesX);
        }
    }
}

TEST_CASE("swapping the groups negates the criterion exactly") {
    const auto fixtures = testsupport::figure_fixtures();
    for (const auto& fixture : fixtures) {
        const OracleBackend fwd(fixture.gd);
        const OracleBackend swp(fixture.gd.swapped());
        const DirectionReport a = vecci::algorithms::vecci_full(fwd);
        const DirectionReport b = vecci::algorithms::vecci_full(swp);
        CHECK(a.dens_x == b.dens_y);
        CHECK(a.dens_x_given_y == b.dens_y_given_x);
        CHECK(a.dens_y == b.dens_x);
        CHECK(a.dens_y_given_x == b.dens_x_given_y);
        CHECK(a.d_xy == b.d_yx);
        CHECK(a.crit == -b.crit);
        CHECK(a.ci_test_count == b.ci_test_count);
        if (a.decision == Decision::XcausesY) CHECK(b.decision == Decision::YcausesX);
        if (a.decision == Decision::Indeterminate) CHECK(b.decision == Decision::Indeterminate);
    }
}

TEST_CASE("the fixed-conditioning variant spends exactly n(n-1) + m(m-1) tests") {
    struct Shape {
        int n, m;
        std::uint64_t want;
    };
    for (const Shape shape : {Shape{3, 5, 26}, Shape{30, 30, 1740}}) {
        Rng rng(vecci::derive_seed(959595, static_cast<std::uint64_t>(shape.n)));
        const GroupedDag gd =
            vecci::graph::random_grouped_dag(shape.n, shape.m, 0.1, 0.1, 0.1, rng);
        const OracleBackend backend(gd);
        const DirectionReport report = vecci::algorithms::vecci_full(backend);
        CHECK(report.ci_test_count == shape.want);
        CHECK(backend.test_count() == shape.want);
    }
}

TEST_CASE("one-sided evaluation touches only the requested group") {
    const auto fixtures = testsupport::figure_fixtures();
    const OracleBackend parents(fixtures[0].gd);  // signal on the X side
    VecciOptions x_only;
    x_only.one_sided = Side::X;
    const DirectionReport rx = vecci::algorithms::vecci_full(parents, x_only);
    CHECK(rx.d_xy == 1.0);
    CHECK(rx.dens_y == 0.0);
    CHECK(rx.dens_y_given_x == 0.0);
    CHECK(rx.d_yx == 0.0);
    CHECK(rx.crit == 1.0);
    CHECK(rx.ci_test_count == 2);

    const OracleBackend children(fixtures[3].gd);  // signal on the Y side
    VecciOptions y_only;
    y_only.one_sided = Side::Y;
    const DirectionReport ry = vecci::algorithms::vecci_full(children, y_only);
    CHECK(ry.d_xy == 0.0);
    CHECK(ry.d_yx == -1.0);
    CHECK(ry.crit == 1.0);
    CHECK(ry.ci_test_count == 2);

    CHECK_THROWS_AS(vecci::algorithms::vecci_pc(parents, x_only), vecci::input_error);
}

TEST_CASE("decision thresholds are validated") {
    const auto fixtures = testsupport::figure_fixtures();
    const OracleBackend backend(fixtures[0].gd);
    VecciOptions negative;
    negative.alpha = -0.1;
    CHECK_THROWS_AS(vecci::algorithms::vecci_full(backend, negative), vecci::input_error);
    VecciOptions nan;
    nan.alpha = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(vecci::algorithms::vecci_pc(backend, nan), vecci::input_error);
    VanillaOptions bad;
    bad.alpha = -1.0;
    CHECK_THROWS_AS(vecci::algorithms::vanilla_pc(backend, bad), vecci::input_error);
}

TEST_CASE("backend failures surface as classified errors with the finished part") {
    // Universe {0,1} vs {2,3}, everything dependent, fourth call throws.
    const FlakyBackend full_flake({0, 1}, {2, 3}, 4, 3, ErrorKind::SampleSize);
    try {
        (void)vecci::algorithms::vecci_full(full_flake);
        FAIL("expected an error");
    } catch (const vecci::algorithms::algorithm_error& e) {
        CHECK(e.kind == ErrorKind::SampleSize);
        CHECK(e.partial.dens_x == 1.0);
        CHECK(e.partial.dens_x_given_y == 1.0);
        CHECK(e.partial.dens_y == 0.0);   // side never finished
        CHECK(e.partial.ci_test_count == 4);
        CHECK(e.partial.decision == Decision::Indeterminate);
    }

    const FlakyBackend pc_flake({0, 1}, {2, 3}, 4, 3, ErrorKind::SampleSize);
    try {
        (void)vecci::algorithms::vecci_pc(pc_flake);
        FAIL("expected an error");
    } catch (const vecci::algorithms::algorithm_error& e) {
        CHECK(e.kind == ErrorKind::SampleSize);
        CHECK(e.partial.dens_x == 1.0);
        CHECK(e.partial.dens_x_given_y == 1.0);
        CHECK(e.partial.dens_y == 1.0);
        CHECK(e.partial.dens_y_given_x == 0.0);  // zeroed: this run failed
        CHECK(e.partial.ci_test_count == 4);
    }

    const FlakyBackend degenerate({0, 1}, {2, 3}, 4, 0, ErrorKind::Degenerate);
    try {
        (void)vecci::algorithms::vecci_full(degenerate);
        FAIL("expected an error");
    } catch (const vecci::algorithms::algorithm_error& e) {
        CHECK(e.kind == ErrorKind::Degenerate);
        CHECK(e.partial.ci_test_count == 1);
    }
}

TEST_CASE("directed cross edges decide the scalar baseline") {
    // Collider 0 -> 2 <- 1 with the child in Y orients both cross edges.
    const GroupedDag forward = testsupport::make_grouped(2, 1, {{0, 2}, {1, 2}});
    const VanillaReport fwd = vecci::algorithms::vanilla_pc(OracleBackend(forward));
    CHECK(fwd.edge_x_to_y == 2);
    CHECK(fwd.edge_y_to_x == 0);
    CHECK(fwd.edge_diff == 1.0);
    CHECK(fwd.decision == Decision::XcausesY);

    // Same graph with the collider child as the X group: both arrows enter X.
    const Dag dag(3, {{0, 2}, {1, 2}});
    const VanillaReport rev = vecci::algorithms::vanilla_pc(OracleBackend(GroupedDag(dag, {2}, {0, 1})));
    CHECK(rev.edge_x_to_y == 0);
    CHECK(rev.edge_y_to_x == 2);
    CHECK(rev.edge_diff == -1.0);
    CHECK(rev.decision == Decision::YcausesX);

    // A chain shows no compelled cross edge at all.
    const GroupedDag chain = testsupport::make_grouped(2, 1, {{0, 1}, {1, 2}});
    const VanillaReport neutral = vecci::algorithms::vanilla_pc(OracleBackend(chain));
    CHECK(neutral.edge_x_to_y == 0);
    CHECK(neutral.edge_y_to_x == 0);
    CHECK(neutral.edge_diff == 0.0);
    CHECK(neutral.decision == Decision::Indeterminate);
}

TEST_CASE("undirected edge density counts pairs") {
    vecci::graph::UndirectedGraph g(3);
    CHECK(vecci::algorithms::edge_density(g) == 0.0);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    CHECK(vecci::algorithms::edge_density(g) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(vecci::algorithms::edge_density(vecci::graph::UndirectedGraph(1)) == 0.0);
}

TEST_CASE("decision labels render stably") {
    CHECK(vecci::algorithms::to_string(Decision::XcausesY) == "X->Y");
    CHECK(vecci::algorithms::to_string(Decision::YcausesX) == "Y->X");
    CHECK(vecci::algorithms::to_string(Decision::Indeterminate) == "indeterminate");
}

TEST_CASE("regression-trace deviation matches a hand-computed value") {
    Eigen::MatrixXd a(1, 2);
    a << 1.0, 2.0;
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2, 2);
    sigma(0, 0) = 1.0;
    sigma(1, 1) = 4.0;
    // traces: 17 / 1, 5 / 1, 5 / 2 -> log(17 / 12.5).
    CHECK(vecci::algorithms::trace_delta(a, sigma) ==
          doctest::Approx(0.30748469974796055).epsilon(1e-12));

    // An identity regression on any covariance is exactly neutral.
    Eigen::MatrixXd sigma3 = Eigen::MatrixXd::Zero(3, 3);
    sigma3.diagonal() << 1.0, 4.0, 2.0;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
    CHECK(vecci::algorithms::trace_delta(eye, sigma3) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("regression-trace deviation rejects bad shapes and degenerate inputs") {
    const Eigen::MatrixXd empty;
    const Eigen::MatrixXd eye2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(vecci::algorithms::trace_delta(empty, eye2), vecci::input_error);
    CHECK_THROWS_AS(vecci::algorithms::trace_delta(eye2, Eigen::MatrixXd::Identity(3, 3)),
                    vecci::input_error);
    CHECK_THROWS_AS(vecci::algorithms::trace_delta(Eigen::MatrixXd::Zero(2, 2), eye2),
                    vecci::degenerate_data_error);
    CHECK_THROWS_AS(vecci::algorithms::trace_delta(eye2, Eigen::MatrixXd::Zero(2, 2)),
                    vecci::degenerate_data_error);
}

TEST_CASE("an exact linear map is detected by the trace criterion") {
    // With whitened regressors and y = (x1, 2 x2), the forward deviation is
    // zero while the backward one is -log(0.625 * 2.5) = -log(25 / 16).
    Rng rng(13579);
    Eigen::MatrixXd raw(50, 2);
    for (int r = 0; r < 50; ++r)
        for (int c = 0; c < 2; ++c) raw(r, c) = rng.normal();
    const Eigen::MatrixXd x = whitened(raw);
    Eigen::MatrixXd values(50, 4);
    values.leftCols(2) = x;
    values.col(2) = x.col(0);
    values.col(3) = 2.0 * x.col(1);
    const DataMatrix data(values, {"x1", "x2", "y1", "y2"});

    const TraceReport report = vecci::algorithms::trace_method(data, {0, 1}, {2, 3});
    CHECK(std::abs(report.delta_xy) < 1e-10);
    CHECK(report.delta_yx == doctest::Approx(-0.4462871026284195).epsilon(1e-8));
    CHECK(report.decision == Decision::XcausesY);
}

TEST_CASE("identical groups tie the trace criterion") {
    const DataMatrix base = gaussian_data(20, 2, 8642);
    Eigen::MatrixXd values(20, 4);
    values.leftCols(2) = base.values();
    values.rightCols(2) = base.values();
    const DataMatrix data(values, {"x1", "x2", "y1", "y2"});
    const TraceReport report = vecci::algorithms::trace_method(data, {0, 1}, {2, 3});
    CHECK(std::abs(report.delta_xy) < 1e-10);
    CHECK(std::abs(report.delta_yx) < 1e-10);
    CHECK(report.decision == Decision::Indeterminate);
}

TEST_CASE("trace criterion input validation") {
    const DataMatrix data = gaussian_data(30, 4, 7531);
    CHECK_THROWS_AS(vecci::algorithms::trace_method(data, {}, {2, 3}), vecci::input_error);
    CHECK_THROWS_AS(vecci::algorithms::trace_method(data, {0, 1}, {9}), vecci::input_error);
    CHECK_THROWS_AS(vecci::algorithms::trace_method(data, {0, 1}, {1, 2}), vecci::input_error);
    CHECK_THROWS_AS(vecci::algorithms::trace_method(data, {0, 0}, {2, 3}), vecci::input_error);

    Eigen::MatrixXd flat = data.values();
    flat.col(0).setConstant(2.5);  // kills the regressor covariance
    const DataMatrix degenerate(flat, {"x1", "x2", "y1", "y2"});
    CHECK_THROWS_AS(vecci::algorithms::trace_method(degenerate, {0, 1}, {2, 3}),
                    vecci::degenerate_data_error);
}
