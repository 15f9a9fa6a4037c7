#include <doctest.h>

#include <algorithm>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "support/oracles.hpp"
#include "vecci/citest.hpp"
#include "vecci/error.hpp"
#include "vecci/graph.hpp"
#include "vecci/pc.hpp"
#include "vecci/rng.hpp"

using vecci::Rng;
using vecci::citest::Group;
using vecci::citest::OracleBackend;
using vecci::graph::Dag;
using vecci::graph::GroupedDag;
using vecci::graph::UndirectedGraph;
using vecci::pc::Cpdag;
using vecci::pc::SkeletonOptions;
using vecci::pc::SkeletonResult;

namespace {

std::set<std::pair<int, int>> id_edges(const SkeletonResult& skel) {
    std::set<std::pair<int, int>> out;
    for (auto [p, q] : skel.skeleton.edges()) {
        const int a = skel.vars[static_cast<std::size_t>(p)];
        const int b = skel.vars[static_cast<std::size_t>(q)];
        out.insert({std::min(a, b), std::max(a, b)});
    }
    return out;
}

std::set<std::pair<int, int>> id_edges(const UndirectedGraph& g, const std::vector<int>& vars) {
    std::set<std::pair<int, int>> out;
    for (auto [p, q] : g.edges()) {
        const int a = vars[static_cast<std::size_t>(p)];
        const int b = vars[static_cast<std::size_t>(q)];
        out.insert({std::min(a, b), std::max(a, b)});
    }
    return out;
}

bool is_acyclic(int k, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> children(static_cast<std::size_t>(k));
    std::vector<int> indeg(static_cast<std::size_t>(k), 0);
    for (auto [p, c] : edges) {
        children[static_cast<std::size_t>(p)].push_back(c);
        ++indeg[static_cast<std::size_t>(c)];
    }
    std::vector<int> ready;
    for (int v = 0; v < k; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    int seen = 0;
    while (!ready.empty()) {
        const int v = ready.back();
        ready.pop_back();
        ++seen;
        for (int c : children[static_cast<std::size_t>(v)])
            if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
    }
    return seen == k;
}

// Unshielded colliders (min-parent, max-parent, child) of a directed edge set.
std::set<std::tuple<int, int, int>> collider_triples(int k,
                                                     const std::vector<std::pair<int, int>>& edges) {
    std::set<std::pair<int, int>> adj;
    std::vector<std::vector<int>> parents(static_cast<std::size_t>(k));
    for (auto [p, c] : edges) {
        adj.insert({std::min(p, c), std::max(p, c)});
        parents[static_cast<std::size_t>(c)].push_back(p);
    }
    std::set<std::tuple<int, int, int>> out;
    for (int c = 0; c < k; ++c) {
        const auto& ps = parents[static_cast<std::size_t>(c)];
        for (std::size_t a = 0; a < ps.size(); ++a) {
            for (std::size_t b = a + 1; b < ps.size(); ++b) {
                const int lo = std::min(ps[a], ps[b]);
                const int hi = std::max(ps[a], ps[b]);
                if (!adj.count({lo, hi})) out.insert({lo, hi, c});
            }
        }
    }
    return out;
}

struct ReferenceCpdag {
    std::set<std::pair<int, int>> compelled;   // directed a -> b
    std::set<std::pair<int, int>> reversible;  // undirected (min, max)
};

// Equivalence class by brute force: enumerate every acyclic orientation of the
// true skeleton, keep those with the same unshielded colliders as the data-
// generating DAG, and read off which edges all members orient the same way.
ReferenceCpdag reference_cpdag(const Dag& dag) {
    const int k = dag.node_count();
    std::vector<std::pair<int, int>> skel;
    for (auto [p, c] : dag.edges()) skel.emplace_back(std::min(p, c), std::max(p, c));
    std::sort(skel.begin(), skel.end());
    const auto want = collider_triples(k, dag.edges());

    const std::size_t total = std::size_t{1} << skel.size();
    std::vector<std::vector<std::pair<int, int>>> members;
    for (std::size_t mask = 0; mask < total; ++mask) {
        std::vector<std::pair<int, int>> oriented;
        oriented.reserve(skel.size());
        for (std::size_t e = 0; e < skel.size(); ++e) {
            auto [a, b] = skel[e];
            if (mask & (std::size_t{1} << e))
                oriented.emplace_back(b, a);
            else
                oriented.emplace_back(a, b);
        }
        if (!is_acyclic(k, oriented)) continue;
        if (collider_triples(k, oriented) != want) continue;
        members.push_back(std::move(oriented));
    }
    REQUIRE(!members.empty());

    ReferenceCpdag ref;
    for (std::size_t e = 0; e < skel.size(); ++e) {
        bool forward = false;
        bool backward = false;
        for (const auto& member : members) {
            if (member[e] == std::make_pair(skel[e].first, skel[e].second))
                forward = true;
            else
                backward = true;
        }
        if (forward && backward)
            ref.reversible.insert(skel[e]);
        else if (forward)
            ref.compelled.insert(skel[e]);
        else
            ref.compelled.insert({skel[e].second, skel[e].first});
    }
    return ref;
}

}  // namespace

TEST_CASE("skeleton equals the exhaustive separator search on oracle backends") {
    for (int trial = 0; trial < 24; ++trial) {
        Rng rng(vecci::derive_seed(424242, static_cast<std::uint64_t>(trial)));
        const int n = 2 + static_cast<int>(rng.below(3));
        const int m = 2 + static_cast<int>(rng.below(3));
        const double dens = 0.2 + 0.15 * static_cast<double>(trial % 3);
        const GroupedDag gd = vecci::graph::random_grouped_dag(n, m, dens, dens, 0.4, rng);
        const OracleBackend backend(gd);

        std::vector<int> all(static_cast<std::size_t>(n + m));
        for (int v = 0; v < n + m; ++v) all[static_cast<std::size_t>(v)] = v;

        struct Pool {
            std::vector<int> vars;
            Group extra;
            std::vector<int> extra_ids;
        };
        const std::vector<Pool> pools = {
            {all, Group::None, {}},
            {gd.x_nodes(), Group::None, {}},
            {gd.x_nodes(), Group::Y, gd.y_nodes()},
            {gd.y_nodes(), Group::X, gd.x_nodes()},
        };
        for (std::size_t pk = 0; pk < pools.size(); ++pk) {
            const auto& pool = pools[pk];
            SkeletonOptions options;
            options.extra_group = pool.extra;
            const SkeletonResult got = vecci::pc::skeleton(backend, pool.vars, options);
            const UndirectedGraph want =
                testsupport::exhaustive_skeleton(gd.dag(), pool.vars, pool.extra_ids);
            CHECK_MESSAGE(id_edges(got) == id_edges(want, pool.vars), "trial ", trial, " pool ",
                          pk, " n=", n, " m=", m);
        }
    }
}

TEST_CASE("skeleton sepsets witness the recorded separations") {
    for (int trial = 0; trial < 10; ++trial) {
        Rng rng(vecci::derive_seed(515151, static_cast<std::uint64_t>(trial)));
        const GroupedDag gd = vecci::graph::random_grouped_dag(4, 4, 0.3, 0.3, 0.4, rng);
        const OracleBackend backend(gd);
        SkeletonOptions options;
        options.extra_group = Group::Y;
        const SkeletonResult skel = vecci::pc::skeleton(backend, gd.x_nodes(), options);
        for (const auto& [pair, sep] : skel.sepsets) {
            const int i = skel.vars[static_cast<std::size_t>(pair.first)];
            const int j = skel.vars[static_cast<std::size_t>(pair.second)];
            CHECK_FALSE(skel.skeleton.has_edge(pair.first, pair.second));
            std::vector<int> given;
            for (int pos : sep) given.push_back(skel.vars[static_cast<std::size_t>(pos)]);
            for (int y : gd.y_nodes())
                if (y != i && y != j) given.push_back(y);
            std::sort(given.begin(), given.end());
            given.erase(std::unique(given.begin(), given.end()), given.end());
            CHECK(vecci::graph::d_separated(gd.dag(), {i, j, given}));
        }
    }
}

TEST_CASE("skeleton on an edgeless oracle runs exactly one test per pair") {
    const GroupedDag gd = testsupport::make_grouped(3, 3, {});
    const OracleBackend backend(gd);
    std::vector<int> all{0, 1, 2, 3, 4, 5};
    const SkeletonResult skel = vecci::pc::skeleton(backend, all, {});
    CHECK(skel.skeleton.edge_count() == 0);
    CHECK(skel.test_count == 15);  // C(6,2), all separated by the empty set
    CHECK(skel.sepsets.size() == 15);
    for (const auto& [pair, sep] : skel.sepsets) {
        (void)pair;
        CHECK(sep.empty());
    }
}

TEST_CASE("skeleton output does not depend on the order of the variable pool") {
    for (int trial = 0; trial < 10; ++trial) {
        Rng rng(vecci::derive_seed(626262, static_cast<std::uint64_t>(trial)));
        const GroupedDag gd = vecci::graph::random_grouped_dag(4, 3, 0.35, 0.35, 0.5, rng);
        const OracleBackend backend(gd);
        std::vector<int> forward(7);
        for (int v = 0; v < 7; ++v) forward[static_cast<std::size_t>(v)] = v;
        std::vector<int> shuffled = forward;
        rng.shuffle(shuffled);
        const SkeletonResult a = vecci::pc::skeleton(backend, forward, {});
        const SkeletonResult b = vecci::pc::skeleton(backend, shuffled, {});
        CHECK(id_edges(a) == id_edges(b));
    }
}

TEST_CASE("conditioning cap keeps edges whose separators are larger") {
    // 0 and 1 share the two unrelated parents 2 and 3; only {2,3} separates.
    const GroupedDag gd = testsupport::make_grouped(4, 1, {{2, 0}, {3, 0}, {2, 1}, {3, 1}});
    const OracleBackend backend(gd);
    const std::vector<int> xs = gd.x_nodes();

    SkeletonOptions unlimited;
    const SkeletonResult full = vecci::pc::skeleton(backend, xs, unlimited);
    CHECK_FALSE(id_edges(full).count({0, 1}));

    SkeletonOptions capped;
    capped.max_cond = 1;
    const SkeletonResult small = vecci::pc::skeleton(backend, xs, capped);
    CHECK(id_edges(small).count({0, 1}));

    SkeletonOptions zero;
    zero.max_cond = 0;
    const SkeletonResult marginal = vecci::pc::skeleton(backend, xs, zero);
    // Level 0 only: every marginally dependent pair keeps its edge.
    CHECK(marginal.test_count == 6);
}

TEST_CASE("skeleton validates its inputs") {
    const GroupedDag gd = testsupport::make_grouped(2, 2, {});
    const OracleBackend backend(gd);
    CHECK_THROWS_AS(vecci::pc::skeleton(backend, {0, 0}, {}), vecci::input_error);
    CHECK_THROWS_AS(vecci::pc::skeleton(backend, {0, 9}, {}), vecci::input_error);
    SkeletonOptions bad;
    bad.max_cond = -1;
    CHECK_THROWS_AS(vecci::pc::skeleton(backend, {0, 1}, bad), vecci::input_error);
}

TEST_CASE("orientation recovers the exact equivalence class on random oracles") {
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(vecci::derive_seed(737373, static_cast<std::uint64_t>(trial)));
        const int k = trial < 40 ? 5 : 6;
        const Dag dag = testsupport::random_dag(k, 0.25 + 0.1 * (trial % 3), rng);
        // Group split is irrelevant here; the oracle only answers separations.
        std::vector<int> xs{0};
        std::vector<int> ys;
        for (int v = 1; v < k; ++v) ys.push_back(v);
        const OracleBackend backend(GroupedDag(dag, xs, ys));
        std::vector<int> all(static_cast<std::size_t>(k));
        for (int v = 0; v < k; ++v) all[static_cast<std::size_t>(v)] = v;

        const SkeletonResult skel = vecci::pc::skeleton(backend, all, {});
        const Cpdag got = vecci::pc::orient_cpdag(skel);
        const ReferenceCpdag want = reference_cpdag(dag);

        CHECK_FALSE(got.conflict());
        const auto dirs = got.directed_edges();
        const auto undirs = got.undirected_edges();
        const std::set<std::pair<int, int>> got_dir(dirs.begin(), dirs.end());
        const std::set<std::pair<int, int>> got_undir(undirs.begin(), undirs.end());
        CHECK_MESSAGE(got_dir == want.compelled, "trial ", trial);
        CHECK_MESSAGE(got_undir == want.reversible, "trial ", trial);
    }
}

TEST_CASE("collider triples orient while chains stay undirected") {
    // Pure collider 0 -> 2 <- 1.
    const GroupedDag collider = testsupport::make_grouped(2, 1, {{0, 2}, {1, 2}});
    const OracleBackend cb(collider);
    const SkeletonResult cs = vecci::pc::skeleton(cb, {0, 1, 2}, {});
    const Cpdag cg = vecci::pc::orient_cpdag(cs);
    CHECK(cg.has_directed(0, 2));
    CHECK(cg.has_directed(1, 2));
    CHECK(cg.undirected_edges().empty());
    CHECK_FALSE(cg.conflict());

    // Chain 0 -> 1 -> 2: the class contains all three orientations.
    const GroupedDag chain = testsupport::make_grouped(2, 1, {{0, 1}, {1, 2}});
    const OracleBackend hb(chain);
    const SkeletonResult hs = vecci::pc::skeleton(hb, {0, 1, 2}, {});
    const Cpdag hg = vecci::pc::orient_cpdag(hs);
    CHECK(hg.directed_edges().empty());
    CHECK(hg.undirected_edges() == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
}

TEST_CASE("propagation orients the tail edge behind a collider") {
    // 0 -> 2 <- 1 plus 2 - 3: once the collider orients, 2 -> 3 follows
    // because 3 is non-adjacent to the collider parents.
    const GroupedDag gd = testsupport::make_grouped(2, 2, {{0, 2}, {1, 2}, {2, 3}});
    const OracleBackend backend(gd);
    const SkeletonResult skel = vecci::pc::skeleton(backend, {0, 1, 2, 3}, {});
    const Cpdag g = vecci::pc::orient_cpdag(skel);
    CHECK(g.has_directed(0, 2));
    CHECK(g.has_directed(1, 2));
    CHECK(g.has_directed(2, 3));
    CHECK(g.undirected_edges().empty());
    CHECK_FALSE(g.conflict());
}

TEST_CASE("contradictory collider votes leave the edge undirected and flag a conflict") {
    SkeletonResult skel;
    skel.vars = {0, 1, 2, 3};
    skel.skeleton = UndirectedGraph(4);
    skel.skeleton.add_edge(0, 1);
    skel.skeleton.add_edge(1, 2);
    skel.skeleton.add_edge(2, 3);
    // (0,2) separated without 1 votes 0 -> 1 <- 2; (1,3) separated without 2
    // votes 1 -> 2 <- 3.  The votes disagree about the middle edge.
    skel.sepsets[{0, 2}] = {};
    skel.sepsets[{1, 3}] = {};
    const Cpdag g = vecci::pc::orient_cpdag(skel);
    CHECK(g.conflict());
    CHECK(g.has_undirected(1, 2));
    CHECK(g.has_directed(0, 1));
    CHECK(g.has_directed(3, 2));
}

TEST_CASE("cpdag refuses orientations that would close a directed cycle") {
    Cpdag g(3);
    g.set_undirected(0, 1);
    g.set_undirected(1, 2);
    g.set_undirected(2, 0);
    CHECK(g.try_orient(0, 1));
    CHECK(g.try_orient(1, 2));
    CHECK_FALSE(g.try_orient(2, 0));  // would close the cycle
    CHECK(g.conflict());
    CHECK(g.has_undirected(2, 0));
    CHECK(g.has_directed(0, 1));
    CHECK(g.has_directed(1, 2));
}

TEST_CASE("cpdag edge state transitions") {
    Cpdag g(3);
    CHECK_FALSE(g.adjacent(0, 1));
    g.set_undirected(0, 1);
    CHECK(g.adjacent(0, 1));
    CHECK(g.has_undirected(0, 1));
    CHECK_FALSE(g.try_orient(0, 2));  // no edge there
    CHECK(g.try_orient(0, 1));
    CHECK(g.has_directed(0, 1));
    CHECK_FALSE(g.has_directed(1, 0));
    CHECK_FALSE(g.has_undirected(0, 1));
    CHECK_FALSE(g.try_orient(0, 1));  // already oriented this way
    // Re-orienting against the arrow reverts to undirected and flags.
    CHECK(g.try_orient(1, 0));
    CHECK(g.conflict());
    CHECK(g.has_undirected(0, 1));
    CHECK_FALSE(g.try_orient(0, 1));  // locked now
    CHECK(g.has_undirected(0, 1));
}
