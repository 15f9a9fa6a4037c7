#include "vecci/pc.hpp"

#include <algorithm>

#include "vecci/error.hpp"

namespace vecci::pc {

namespace {

// Lexicographic size-k combination walker over [0, pool_size).
bool next_combination(std::vector<int>& c, int pool_size) {
    const int k = static_cast<int>(c.size());
    for (int idx = k - 1; idx >= 0; --idx) {
        if (c[static_cast<std::size_t>(idx)] < pool_size - (k - idx)) {
            ++c[static_cast<std::size_t>(idx)];
            for (int t = idx + 1; t < k; ++t)
                c[static_cast<std::size_t>(t)] = c[static_cast<std::size_t>(t - 1)] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace

SkeletonResult skeleton(const citest::CiBackend& backend, const std::vector<int>& vars,
                        const SkeletonOptions& options) {
    const int q = static_cast<int>(vars.size());
    {
        std::vector<int> sorted = vars;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw input_error("skeleton: repeated variable");
        for (int v : vars)
            if (v < 0 || v >= backend.universe_size())
                throw input_error("skeleton: variable outside the backend universe");
    }
    if (options.max_cond && *options.max_cond < 0) throw input_error("skeleton: negative max_cond");

    SkeletonResult result;
    result.vars = vars;
    result.skeleton = graph::UndirectedGraph(q);
    const std::uint64_t count0 = backend.test_count();

    std::vector<char> adj(static_cast<std::size_t>(q) * static_cast<std::size_t>(q), 1);
    for (int i = 0; i < q; ++i) adj[static_cast<std::size_t>(i * q + i)] = 0;
    auto adjacent = [&](int a, int b) { return adj[static_cast<std::size_t>(a * q + b)] != 0; };
    auto remove_edge = [&](int a, int b) {
        adj[static_cast<std::size_t>(a * q + b)] = 0;
        adj[static_cast<std::size_t>(b * q + a)] = 0;
    };

    std::vector<int> cset;
    for (int level = 0;; ++level) {
        if (options.max_cond && level > *options.max_cond) break;
        // Neighbor sets frozen per level: removals inside the level change the
        // graph but not the candidate pools, making the result order-free.
        std::vector<std::vector<int>> frozen(static_cast<std::size_t>(q));
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                if (j != i && adjacent(i, j)) frozen[static_cast<std::size_t>(i)].push_back(j);

        bool any_pool_big_enough = false;
        for (int i = 0; i < q && !any_pool_big_enough; ++i)
            for (int j : frozen[static_cast<std::size_t>(i)])
                if (static_cast<int>(frozen[static_cast<std::size_t>(i)].size()) - 1 >= level) {
                    any_pool_big_enough = true;
                    (void)j;
                    break;
                }
        if (!any_pool_big_enough) break;

        for (int i = 0; i < q; ++i) {
            for (int j = i + 1; j < q; ++j) {
                if (!adjacent(i, j)) continue;
                bool removed = false;
                std::vector<int> pool_first;
                for (int side = 0; side < 2 && !removed; ++side) {
                    if (side == 1 && level == 0) break;  // only the empty set at level 0
                    std::vector<int> pool;
                    for (int v : frozen[static_cast<std::size_t>(side == 0 ? i : j)])
                        if (v != i && v != j) pool.push_back(v);
                    if (static_cast<int>(pool.size()) < level) continue;
                    std::vector<char> in_first(static_cast<std::size_t>(q), 0);
                    if (side == 1)
                        for (int v : pool_first) in_first[static_cast<std::size_t>(v)] = 1;
                    else
                        pool_first = pool;

                    std::vector<int> comb(static_cast<std::size_t>(level));
                    for (int t = 0; t < level; ++t) comb[static_cast<std::size_t>(t)] = t;
                    bool more = true;
                    while (more && !removed) {
                        bool duplicate = side == 1;
                        cset.clear();
                        for (int t : comb) {
                            const int pos = pool[static_cast<std::size_t>(t)];
                            cset.push_back(pos);
                            if (duplicate && !in_first[static_cast<std::size_t>(pos)]) duplicate = false;
                        }
                        if (!duplicate) {
                            citest::CiQuery query;
                            query.i = vars[static_cast<std::size_t>(i)];
                            query.j = vars[static_cast<std::size_t>(j)];
                            for (int pos : cset) query.cond.push_back(vars[static_cast<std::size_t>(pos)]);
                            query.extra_group = options.extra_group;
                            if (backend.decide(query)) {
                                remove_edge(i, j);
                                std::vector<int> sep = cset;
                                std::sort(sep.begin(), sep.end());
                                result.sepsets.emplace(std::make_pair(i, j), std::move(sep));
                                removed = true;
                            }
                        }
                        more = next_combination(comb, static_cast<int>(pool.size()));
                    }
                }
            }
        }
    }

    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j)
            if (adjacent(i, j)) result.skeleton.add_edge(i, j);
    result.test_count = backend.test_count() - count0;
    return result;
}

std::vector<std::pair<int, int>> Cpdag::directed_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < node_count_; ++a)
        for (int b = 0; b < node_count_; ++b)
            if (at(a, b) == 2) out.emplace_back(a, b);
    return out;
}

std::vector<std::pair<int, int>> Cpdag::undirected_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < node_count_; ++a)
        for (int b = a + 1; b < node_count_; ++b)
            if (at(a, b) == 1) out.emplace_back(a, b);
    return out;
}

void Cpdag::set_undirected(int a, int b) {
    set(a, b, 1);
    set(b, a, 1);
}

bool Cpdag::directed_path(int from, int to) const {
    std::vector<char> seen(static_cast<std::size_t>(node_count_), 0);
    std::vector<int> stack{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (v == to) return true;
        for (int w = 0; w < node_count_; ++w)
            if (at(v, w) == 2 && !seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                stack.push_back(w);
            }
    }
    return false;
}

bool Cpdag::try_orient(int from, int to) {
    const std::size_t key = static_cast<std::size_t>(from * node_count_ + to);
    const std::size_t mirror = static_cast<std::size_t>(to * node_count_ + from);
    if (locked_[key]) return false;
    const char cur = at(from, to);
    if (cur == 0 || cur == 2) return false;
    if (cur == 3) {
        // Contradicts an existing orientation: revert and lock.
        set_undirected(from, to);
        locked_[key] = locked_[mirror] = 1;
        conflict_ = true;
        return true;
    }
    if (directed_path(to, from)) {
        // Would close a directed cycle: keep undirected and lock.
        locked_[key] = locked_[mirror] = 1;
        conflict_ = true;
        return false;
    }
    set(from, to, 2);
    set(to, from, 3);
    return true;
}

Cpdag orient_cpdag(const SkeletonResult& skel) {
    const int q = skel.skeleton.node_count();
    Cpdag g(q);
    for (auto [a, b] : skel.skeleton.edges()) g.set_undirected(a, b);

    // Unshielded colliders: i - k - j with i, j non-adjacent and k outside
    // the recorded separating set of (i, j).
    for (int i = 0; i < q; ++i) {
        for (int j = i + 1; j < q; ++j) {
            if (skel.skeleton.has_edge(i, j)) continue;
            auto sep = skel.sepsets.find({i, j});
            if (sep == skel.sepsets.end()) continue;
            for (int k = 0; k < q; ++k) {
                if (k == i || k == j) continue;
                if (!skel.skeleton.has_edge(i, k) || !skel.skeleton.has_edge(j, k)) continue;
                if (std::binary_search(sep->second.begin(), sep->second.end(), k)) continue;
                g.try_orient(i, k);
                g.try_orient(j, k);
            }
        }
    }

    // Orientation rules applied to closure.
    bool changed = true;
    while (changed) {
        changed = false;
        // R1: a -> b - c with a, c non-adjacent orients b -> c.
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b)
                if (g.has_directed(a, b))
                    for (int c = 0; c < q; ++c)
                        if (c != a && g.has_undirected(b, c) && !g.adjacent(a, c))
                            changed |= g.try_orient(b, c);
        // R2: a -> b -> c with a - c orients a -> c.
        for (int a = 0; a < q; ++a)
            for (int c = 0; c < q; ++c)
                if (g.has_undirected(a, c))
                    for (int b = 0; b < q; ++b)
                        if (g.has_directed(a, b) && g.has_directed(b, c)) {
                            changed |= g.try_orient(a, c);
                            break;
                        }
        // R3: a - b with two non-adjacent c, d, both a - c, a - d, c -> b, d -> b.
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b)
                if (g.has_undirected(a, b)) {
                    bool done = false;
                    for (int c = 0; c < q && !done; ++c) {
                        if (!g.has_undirected(a, c) || !g.has_directed(c, b)) continue;
                        for (int d = c + 1; d < q && !done; ++d) {
                            if (!g.has_undirected(a, d) || !g.has_directed(d, b)) continue;
                            if (g.adjacent(c, d)) continue;
                            changed |= g.try_orient(a, b);
                            done = true;
                        }
                    }
                }
        // R4: a - b with a - w1, w1 -> w2 -> b and w1, b non-adjacent.
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b)
                if (g.has_undirected(a, b)) {
                    bool done = false;
                    for (int w1 = 0; w1 < q && !done; ++w1) {
                        if (w1 == b || !g.has_undirected(a, w1) || g.adjacent(w1, b)) continue;
                        for (int w2 = 0; w2 < q && !done; ++w2) {
                            if (g.has_directed(w1, w2) && g.has_directed(w2, b)) {
                                changed |= g.try_orient(a, b);
                                done = true;
                            }
                        }
                    }
                }
    }
    return g;
}

}  // namespace vecci::pc
