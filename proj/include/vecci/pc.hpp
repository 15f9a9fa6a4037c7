#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "vecci/citest.hpp"
#include "vecci/graph.hpp"

namespace vecci::pc {

struct SkeletonOptions {
    std::optional<int> max_cond;                      // unbounded when unset
    citest::Group extra_group = citest::Group::None;  // joined to every test
};

// Skeleton over `vars` (result graph indexed by position in `vars`).
struct SkeletonResult {
    std::vector<int> vars;
    graph::UndirectedGraph skeleton;
    // First separating set found per removed edge, keyed by (min, max)
    // positions; values are positions into `vars`.
    std::map<std::pair<int, int>, std::vector<int>> sepsets;
    std::uint64_t test_count = 0;
};

// Order-independent (stable) PC skeleton phase: level-wise search over
// subsets of the neighbor sets frozen at the start of each level.
SkeletonResult skeleton(const citest::CiBackend& backend, const std::vector<int>& vars,
                        const SkeletonOptions& options = {});

// Partially directed graph produced by the orientation phase.
class Cpdag {
public:
    explicit Cpdag(int node_count)
        : node_count_(node_count),
          mark_(static_cast<std::size_t>(node_count * node_count), 0),
          locked_(static_cast<std::size_t>(node_count * node_count), 0) {}

    int node_count() const { return node_count_; }
    bool has_directed(int from, int to) const { return at(from, to) == 2; }
    bool has_undirected(int a, int b) const { return at(a, b) == 1; }
    bool adjacent(int a, int b) const { return at(a, b) != 0; }
    std::vector<std::pair<int, int>> directed_edges() const;
    std::vector<std::pair<int, int>> undirected_edges() const;
    bool conflict() const { return conflict_; }

    void set_undirected(int a, int b);
    // Attempts from -> to; on a contradiction with an existing orientation the
    // edge reverts to undirected, locks, and the conflict flag is set.  An
    // orientation that would close a directed cycle is treated the same way.
    // Returns true when a mark changed.
    bool try_orient(int from, int to);

private:
    char at(int a, int b) const { return mark_[static_cast<std::size_t>(a * node_count_ + b)]; }
    void set(int a, int b, char v) { mark_[static_cast<std::size_t>(a * node_count_ + b)] = v; }
    bool directed_path(int from, int to) const;

    int node_count_ = 0;
    std::vector<char> mark_;  // 0 none, 1 undirected, 2 directed a->b (and 3 on the mirror)
    std::vector<char> locked_;
    bool conflict_ = false;
};

// v-structure orientation from the sepsets followed by the four orientation
// rules applied to closure.  Conflicting v-structure votes leave the edge
// undirected and set the conflict flag.
Cpdag orient_cpdag(const SkeletonResult& skel);

}  // namespace vecci::pc
