#pragma once

#include <utility>
#include <vector>

#include "vecci/rng.hpp"

namespace vecci::graph {

// Directed acyclic graph over nodes 0..node_count-1.  Edges are validated at
// construction: in-range endpoints, no self loops, no duplicates, no cycles.
class Dag {
public:
    Dag() = default;
    Dag(int node_count, std::vector<std::pair<int, int>> edges);

    int node_count() const { return node_count_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& parents(int node) const { return parents_[static_cast<std::size_t>(node)]; }
    const std::vector<int>& children(int node) const { return children_[static_cast<std::size_t>(node)]; }
    bool has_edge(int parent, int child) const;
    bool adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }

    // Some topological order (parents before children).
    std::vector<int> topological_order() const;

    // Mask of nodes that reach a seed by a directed path; seeds included.
    std::vector<char> ancestors_of(const std::vector<int>& seeds) const;

    // Dag induced on `keep` (relabelled by position in `keep`).
    Dag induced(const std::vector<int>& keep) const;

private:
    int node_count_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
};

class UndirectedGraph {
public:
    UndirectedGraph() = default;
    explicit UndirectedGraph(int node_count) : node_count_(node_count) {}

    int node_count() const { return node_count_; }
    void add_edge(int a, int b);
    bool has_edge(int a, int b) const;
    int edge_count() const;
    std::vector<std::pair<int, int>> edges() const;  // i < j, sorted

private:
    int node_count_ = 0;
    std::vector<std::pair<int, int>> edges_;  // normalized (min,max), kept sorted unique
};

struct SeparationQuery {
    int i = 0;
    int j = 0;
    std::vector<int> given;  // conditioning set; must not contain i or j
};

// d-separation decided by the reachable-nodes traversal (colliders open when
// they or one of their descendants is conditioned on).
bool d_separated(const Dag& dag, const SeparationQuery& query);

// Undirected graph connecting each node to parents, children and co-parents.
UndirectedGraph moralize(const Dag& dag);

// A DAG whose nodes are partitioned into an X group and a Y group.  The
// partition carries no orientation promise; generators produce cross edges
// X -> Y only, but hand-built instances may point anywhere.
class GroupedDag {
public:
    GroupedDag() = default;
    GroupedDag(Dag dag, std::vector<int> x_nodes, std::vector<int> y_nodes);

    const Dag& dag() const { return dag_; }
    const std::vector<int>& x_nodes() const { return x_nodes_; }
    const std::vector<int>& y_nodes() const { return y_nodes_; }
    int n() const { return static_cast<int>(x_nodes_.size()); }
    int m() const { return static_cast<int>(y_nodes_.size()); }

    // Roles exchanged; used by direction-equivariance checks.
    GroupedDag swapped() const { return GroupedDag(dag_, y_nodes_, x_nodes_); }

    // True when every cross edge points from the X group into the Y group.
    bool cross_edges_forward_only() const;

private:
    Dag dag_;
    std::vector<int> x_nodes_;
    std::vector<int> y_nodes_;
};

enum class Condition { MissingCrossLink, ExtraGroupLink };
// MissingCrossLink: some X pair is separated by an in-group set but becomes
//   dependent once the whole Y group joins the conditioning set.
// ExtraGroupLink: some Y pair is dependent given an in-group set but becomes
//   independent once the whole X group joins the conditioning set.

// Exhaustive subset-enumeration check of the two density-shift conditions.
// Graphs larger than `enumeration_cap` nodes raise capacity_error.
bool check_condition(const GroupedDag& gd, Condition which, int enumeration_cap = 16);

// Random grouped DAG: a uniformly random permutation per block fixes the
// topological order, forward in-block pairs appear independently with the
// block density, and each (x, y) cross pair appears with density dens_a.
GroupedDag random_grouped_dag(int n, int m, double dens_x, double dens_y, double dens_a, Rng& rng);

}  // namespace vecci::graph
