#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "amble/geo_grid.hpp"

namespace amble::routing {

/// Edge weights in integer micrometres. Path lengths are compared exactly, so
/// equal-length walks tie regardless of summation order.
using Length = std::int64_t;

inline constexpr double kUnitsPerMeter = 1e6;
inline constexpr Length kUnreachable = INT64_MAX;

Length to_units(double meters);
inline double to_meters(Length units) { return static_cast<double>(units) / kUnitsPerMeter; }

struct Arc {
    int from = 0;
    int to = 0;
    Length weight = 0;
    double length_m = 0.0;
};

/// Directed graph with strictly positive integer weights.
class Digraph {
public:
    explicit Digraph(int node_count = 0);
    static Digraph from_location_graph(const geo::LocationGraph& graph);

    /// Throws InvalidArgument for bad endpoints or weight < 1.
    void add_arc(int from, int to, Length weight, double length_m);
    void add_arc(int from, int to, Length weight) { add_arc(from, to, weight, to_meters(weight)); }

    int size() const { return static_cast<int>(out_.size()); }
    const Arc& arc(int id) const { return arcs_[static_cast<std::size_t>(id)]; }
    std::span<const int> out_arcs(int node) const { return out_[static_cast<std::size_t>(node)]; }
    const std::vector<Arc>& arcs() const { return arcs_; }

private:
    std::vector<Arc> arcs_;
    std::vector<std::vector<int>> out_;
};

/// Shortest-path tree towards a fixed target. For each node the tree arc is
/// the tight arc with the smallest head id (then smallest arc id), so the tree
/// path from any node is its lexicographically smallest shortest path.
struct ShortestPathTree {
    int target = 0;
    std::vector<Length> dist;
    std::vector<int> next_arc;

    static ShortestPathTree build(const Digraph& graph, int target);
    bool reaches(int node) const { return dist[static_cast<std::size_t>(node)] != kUnreachable; }
    /// Node sequence from `node` to the target along the tree.
    std::vector<int> path_from(const Digraph& graph, int node) const;
};

/// One emitted walk. `value_sum` adds the per-node values given to the
/// enumerator once per visit; `node_count` counts visits.
struct WalkHandle {
    Length length = 0;
    std::int64_t value_sum = 0;
    int node_count = 0;
    /// 1-based position in the stream.
    std::int64_t index = 0;
    int state = 0;
};

/// Lazy enumeration of source -> target walks in nondecreasing length
/// (Eppstein's algorithm over persistent leftist heaps of sidetrack arcs).
/// Walks may revisit nodes, including the target, unless `simple_only` is set,
/// in which case walks with a repeated node are skipped on emission and the
/// stream ends once lengths exceed the longest possible simple path.
/// Equal-length walks come out in a fixed order determined by the heap
/// structure; the first walk is the lexicographically smallest shortest path.
/// The graph must outlive the enumerator.
class KShortestPaths {
public:
    KShortestPaths(const Digraph& graph, int source, int target, bool simple_only = false,
                   std::span<const std::int64_t> node_values = {});

    std::optional<WalkHandle> next();
    std::vector<int> nodes(const WalkHandle& walk) const;
    /// As nodes(), reusing the storage of `out`.
    void nodes_into(const WalkHandle& walk, std::vector<int>& out) const;

    const ShortestPathTree& tree() const { return tree_; }

private:
    struct HeapNode {
        Length key;
        int arc;
        int left;
        int right;
        int rank;
    };
    struct State {
        int heap_node;
        int prefix;
        std::int64_t value_sum;
        int node_count;
    };
    /// Queue entry; `seq` indexes candidates_ and breaks cost ties first-in first-out.
    struct Pending {
        Length cost;
        std::uint64_t seq;
        bool operator>(const Pending& o) const { return cost != o.cost ? cost > o.cost : seq > o.seq; }
    };
    struct Candidate {
        int heap_node;
        int prefix;
    };

    void push(Length cost, int heap_node, int prefix);
    bool heap_less(int a, int b) const;
    int meld(int a, int b);
    int singleton(Length key, int arc);
    void build_heaps();
    std::optional<WalkHandle> next_walk();
    bool is_simple(const WalkHandle& walk) const;
    std::int64_t value(int node) const;

    const Digraph* graph_;
    int source_;
    int target_;
    bool simple_only_;
    std::vector<std::int64_t> node_values_;
    ShortestPathTree tree_;
    std::vector<std::int64_t> tree_value_;
    std::vector<int> tree_count_;
    std::vector<HeapNode> heap_;
    std::vector<int> heap_root_;
    std::vector<State> states_;
    mutable std::vector<int> sidetrack_scratch_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
    std::vector<Candidate> candidates_;
    std::int64_t emitted_ = 0;
    bool started_ = false;
    Length simple_bound_ = kUnreachable;
};

}  // namespace amble::routing
