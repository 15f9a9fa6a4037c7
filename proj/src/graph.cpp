#include "vecci/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "vecci/error.hpp"

namespace vecci::graph {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw input_error(what);
}

}  // namespace

Dag::Dag(int node_count, std::vector<std::pair<int, int>> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
    require(node_count_ >= 0, "dag: negative node count");
    std::sort(edges_.begin(), edges_.end());
    parents_.assign(static_cast<std::size_t>(node_count_), {});
    children_.assign(static_cast<std::size_t>(node_count_), {});
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        auto [p, c] = edges_[k];
        require(p >= 0 && p < node_count_ && c >= 0 && c < node_count_, "dag: edge endpoint out of range");
        require(p != c, "dag: self loop");
        require(k == 0 || edges_[k] != edges_[k - 1], "dag: duplicate edge");
        parents_[static_cast<std::size_t>(c)].push_back(p);
        children_[static_cast<std::size_t>(p)].push_back(c);
    }
    // Kahn's algorithm doubles as the acyclicity check.
    std::vector<int> indeg(static_cast<std::size_t>(node_count_), 0);
    for (auto [p, c] : edges_) indeg[static_cast<std::size_t>(c)]++;
    std::queue<int> ready;
    for (int v = 0; v < node_count_; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
    int seen = 0;
    while (!ready.empty()) {
        int v = ready.front();
        ready.pop();
        ++seen;
        for (int c : children_[static_cast<std::size_t>(v)])
            if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push(c);
    }
    require(seen == node_count_, "dag: edge set contains a cycle");
}

bool Dag::has_edge(int parent, int child) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(parent, child));
}

std::vector<int> Dag::topological_order() const {
    std::vector<int> indeg(static_cast<std::size_t>(node_count_), 0);
    for (auto [p, c] : edges_) indeg[static_cast<std::size_t>(c)]++;
    std::queue<int> ready;
    for (int v = 0; v < node_count_; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(node_count_));
    while (!ready.empty()) {
        int v = ready.front();
        ready.pop();
        order.push_back(v);
        for (int c : children_[static_cast<std::size_t>(v)])
            if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push(c);
    }
    return order;
}

std::vector<char> Dag::ancestors_of(const std::vector<int>& seeds) const {
    std::vector<char> mark(static_cast<std::size_t>(node_count_), 0);
    std::queue<int> work;
    for (int s : seeds) {
        require(s >= 0 && s < node_count_, "dag: seed out of range");
        if (!mark[static_cast<std::size_t>(s)]) {
            mark[static_cast<std::size_t>(s)] = 1;
            work.push(s);
        }
    }
    while (!work.empty()) {
        int v = work.front();
        work.pop();
        for (int p : parents_[static_cast<std::size_t>(v)]) {
            if (!mark[static_cast<std::size_t>(p)]) {
                mark[static_cast<std::size_t>(p)] = 1;
                work.push(p);
            }
        }
    }
    return mark;
}

Dag Dag::induced(const std::vector<int>& keep) const {
    std::vector<int> label(static_cast<std::size_t>(node_count_), -1);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        require(keep[k] >= 0 && keep[k] < node_count_, "dag: induced node out of range");
        require(label[static_cast<std::size_t>(keep[k])] == -1, "dag: induced node repeated");
        label[static_cast<std::size_t>(keep[k])] = static_cast<int>(k);
    }
    std::vector<std::pair<int, int>> sub;
    for (auto [p, c] : edges_) {
        int lp = label[static_cast<std::size_t>(p)];
        int lc = label[static_cast<std::size_t>(c)];
        if (lp >= 0 && lc >= 0) sub.emplace_back(lp, lc);
    }
    return Dag(static_cast<int>(keep.size()), std::move(sub));
}

void UndirectedGraph::add_edge(int a, int b) {
    require(a >= 0 && a < node_count_ && b >= 0 && b < node_count_, "graph: edge endpoint out of range");
    require(a != b, "graph: self loop");
    auto e = std::minmax(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(e.first, e.second));
    if (it == edges_.end() || *it != std::make_pair(e.first, e.second))
        edges_.insert(it, {e.first, e.second});
}

bool UndirectedGraph::has_edge(int a, int b) const {
    auto e = std::minmax(a, b);
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(e.first, e.second));
}

int UndirectedGraph::edge_count() const { return static_cast<int>(edges_.size()); }

std::vector<std::pair<int, int>> UndirectedGraph::edges() const { return edges_; }

bool d_separated(const Dag& dag, const SeparationQuery& query) {
    const int n = dag.node_count();
    require(query.i >= 0 && query.i < n && query.j >= 0 && query.j < n, "d_separated: node out of range");
    require(query.i != query.j, "d_separated: identical endpoints");
    std::vector<char> given(static_cast<std::size_t>(n), 0);
    for (int g : query.given) {
        require(g >= 0 && g < n, "d_separated: conditioning node out of range");
        require(g != query.i && g != query.j, "d_separated: conditioning set contains an endpoint");
        given[static_cast<std::size_t>(g)] = 1;
    }
    const std::vector<char> opens = dag.ancestors_of(query.given);

    // Reachability over (node, arrival-direction) states.  FromParent means the
    // trail enters along an arrow (possible collider); FromChild means it
    // enters against an arrow (always a non-collider).
    enum : int { FromChild = 0, FromParent = 1 };
    std::vector<char> visited(static_cast<std::size_t>(2 * n), 0);
    std::queue<std::pair<int, int>> work;
    auto push = [&](int node, int dir) {
        if (node == query.j) return true;
        char& v = visited[static_cast<std::size_t>(2 * node + dir)];
        if (!v) {
            v = 1;
            work.emplace(node, dir);
        }
        return false;
    };
    for (int p : dag.parents(query.i))
        if (push(p, FromChild)) return false;
    for (int c : dag.children(query.i))
        if (push(c, FromParent)) return false;
    while (!work.empty()) {
        auto [v, dir] = work.front();
        work.pop();
        const bool conditioned = given[static_cast<std::size_t>(v)];
        if (dir == FromChild) {
            if (conditioned) continue;
            for (int p : dag.parents(v))
                if (push(p, FromChild)) return false;
            for (int c : dag.children(v))
                if (push(c, FromParent)) return false;
        } else {
            if (!conditioned) {
                for (int c : dag.children(v))
                    if (push(c, FromParent)) return false;
            }
            if (opens[static_cast<std::size_t>(v)]) {
                for (int p : dag.parents(v))
                    if (push(p, FromChild)) return false;
            }
        }
    }
    return true;
}

UndirectedGraph moralize(const Dag& dag) {
    UndirectedGraph g(dag.node_count());
    for (auto [p, c] : dag.edges()) g.add_edge(p, c);
    for (int v = 0; v < dag.node_count(); ++v) {
        const auto& ps = dag.parents(v);
        for (std::size_t a = 0; a < ps.size(); ++a)
            for (std::size_t b = a + 1; b < ps.size(); ++b) g.add_edge(ps[a], ps[b]);
    }
    return g;
}

GroupedDag::GroupedDag(Dag dag, std::vector<int> x_nodes, std::vector<int> y_nodes)
    : dag_(std::move(dag)), x_nodes_(std::move(x_nodes)), y_nodes_(std::move(y_nodes)) {
    std::sort(x_nodes_.begin(), x_nodes_.end());
    std::sort(y_nodes_.begin(), y_nodes_.end());
    require(!x_nodes_.empty() && !y_nodes_.empty(), "grouped dag: both groups must be non-empty");
    std::vector<char> seen(static_cast<std::size_t>(dag_.node_count()), 0);
    for (int v : x_nodes_) {
        require(v >= 0 && v < dag_.node_count(), "grouped dag: x node out of range");
        require(!seen[static_cast<std::size_t>(v)], "grouped dag: node assigned twice");
        seen[static_cast<std::size_t>(v)] = 1;
    }
    for (int v : y_nodes_) {
        require(v >= 0 && v < dag_.node_count(), "grouped dag: y node out of range");
        require(!seen[static_cast<std::size_t>(v)], "grouped dag: node assigned twice");
        seen[static_cast<std::size_t>(v)] = 1;
    }
    require(static_cast<int>(x_nodes_.size() + y_nodes_.size()) == dag_.node_count(),
            "grouped dag: groups must cover all nodes");
}

bool GroupedDag::cross_edges_forward_only() const {
    std::vector<char> in_x(static_cast<std::size_t>(dag_.node_count()), 0);
    for (int v : x_nodes_) in_x[static_cast<std::size_t>(v)] = 1;
    for (auto [p, c] : dag_.edges())
        if (!in_x[static_cast<std::size_t>(p)] && in_x[static_cast<std::size_t>(c)]) return false;
    return true;
}

namespace {

// Shared body of the two condition checks: scan pairs (a, b) inside `pool`,
// all subsets S of pool \ {a, b}, and report whether some pair flips from
// separated-to-connected (want_flip_open) or connected-to-separated when the
// whole `other` group joins the conditioning set.
bool subset_scan(const Dag& dag, const std::vector<int>& pool, const std::vector<int>& other,
                 bool want_flip_open) {
    const std::size_t g = pool.size();
    if (g < 2) return false;
    std::vector<int> rest;
    std::vector<int> cond;
    for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t b = a + 1; b < g; ++b) {
            rest.clear();
            for (std::size_t k = 0; k < g; ++k)
                if (k != a && k != b) rest.push_back(pool[k]);
            const std::size_t subsets = std::size_t{1} << rest.size();
            for (std::size_t mask = 0; mask < subsets; ++mask) {
                cond.clear();
                for (std::size_t k = 0; k < rest.size(); ++k)
                    if (mask & (std::size_t{1} << k)) cond.push_back(rest[k]);
                const bool sep_plain = d_separated(dag, {pool[a], pool[b], cond});
                cond.insert(cond.end(), other.begin(), other.end());
                const bool sep_joint = d_separated(dag, {pool[a], pool[b], cond});
                if (want_flip_open ? (sep_plain && !sep_joint) : (!sep_plain && sep_joint)) return true;
            }
        }
    }
    return false;
}

}  // namespace

bool check_condition(const GroupedDag& gd, Condition which, int enumeration_cap) {
    if (gd.dag().node_count() > enumeration_cap)
        throw capacity_error("check_condition: graph exceeds the enumeration cap of " +
                             std::to_string(enumeration_cap) + " nodes");
    if (which == Condition::MissingCrossLink)
        return subset_scan(gd.dag(), gd.x_nodes(), gd.y_nodes(), /*want_flip_open=*/true);
    return subset_scan(gd.dag(), gd.y_nodes(), gd.x_nodes(), /*want_flip_open=*/false);
}

GroupedDag random_grouped_dag(int n, int m, double dens_x, double dens_y, double dens_a, Rng& rng) {
    require(n >= 1 && m >= 1, "random_grouped_dag: both groups need at least one node");
    for (double d : {dens_x, dens_y, dens_a})
        require(d >= 0.0 && d <= 1.0, "random_grouped_dag: density outside [0, 1]");
    std::vector<std::pair<int, int>> edges;
    auto block = [&](int base, int count, double dens) {
        std::vector<int> order = rng.permutation(count);
        for (int i = 0; i < count; ++i)
            for (int j = i + 1; j < count; ++j)
                if (rng.bernoulli(dens)) edges.emplace_back(base + order[static_cast<std::size_t>(i)],
                                                            base + order[static_cast<std::size_t>(j)]);
    };
    block(0, n, dens_x);
    block(n, m, dens_y);
    for (int x = 0; x < n; ++x)
        for (int y = n; y < n + m; ++y)
            if (rng.bernoulli(dens_a)) edges.emplace_back(x, y);
    std::vector<int> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = i;
    for (int j = 0; j < m; ++j) ys[static_cast<std::size_t>(j)] = n + j;
    return GroupedDag(Dag(n + m, std::move(edges)), std::move(xs), std::move(ys));
}

}  // namespace vecci::graph
