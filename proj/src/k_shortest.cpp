#include "amble/k_shortest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>

#include "amble/error.hpp"

namespace amble::routing {

Length to_units(double meters) {
    if (!(meters >= 0.0) || !std::isfinite(meters)) {
        throw Error(ErrorCode::InvalidArgument, "edge length must be finite and non-negative");
    }
    return static_cast<Length>(std::llround(meters * kUnitsPerMeter));
}

Digraph::Digraph(int node_count) : out_(static_cast<std::size_t>(std::max(node_count, 0))) {}

Digraph Digraph::from_location_graph(const geo::LocationGraph& graph) {
    Digraph g(graph.size());
    for (int u = 0; u < graph.size(); ++u) {
        for (const geo::Edge& e : graph.neighbors(u)) {
            g.add_arc(u, e.to, to_units(e.length_m), e.length_m);
        }
    }
    return g;
}

void Digraph::add_arc(int from, int to, Length weight, double length_m) {
    if (from < 0 || to < 0 || from >= size() || to >= size()) {
        throw Error(ErrorCode::InvalidArgument, "arc endpoint out of range");
    }
    if (weight < 1) {
        throw Error(ErrorCode::InvalidArgument, "arc weights must be positive");
    }
    out_[static_cast<std::size_t>(from)].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({from, to, weight, length_m});
}

ShortestPathTree ShortestPathTree::build(const Digraph& graph, int target) {
    const auto n = static_cast<std::size_t>(graph.size());
    if (target < 0 || target >= graph.size()) {
        throw Error(ErrorCode::InvalidArgument, "target node out of range");
    }
    std::vector<std::vector<int>> in_arcs(n);
    for (std::size_t a = 0; a < graph.arcs().size(); ++a) {
        in_arcs[static_cast<std::size_t>(graph.arcs()[a].to)].push_back(static_cast<int>(a));
    }

    ShortestPathTree tree;
    tree.target = target;
    tree.dist.assign(n, kUnreachable);
    tree.next_arc.assign(n, -1);

    using Entry = std::pair<Length, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    tree.dist[static_cast<std::size_t>(target)] = 0;
    queue.emplace(0, target);
    while (!queue.empty()) {
        const auto [d, v] = queue.top();
        queue.pop();
        if (d != tree.dist[static_cast<std::size_t>(v)]) continue;
        for (int a : in_arcs[static_cast<std::size_t>(v)]) {
            const Arc& arc = graph.arc(a);
            const Length cand = d + arc.weight;
            Length& du = tree.dist[static_cast<std::size_t>(arc.from)];
            if (cand < du) {
                du = cand;
                queue.emplace(cand, arc.from);
            }
        }
    }

    for (int v = 0; v < graph.size(); ++v) {
        if (v == target || !tree.reaches(v)) continue;
        int best = -1;
        for (int a : graph.out_arcs(v)) {
            const Arc& arc = graph.arc(a);
            if (!tree.reaches(arc.to) ||
                arc.weight + tree.dist[static_cast<std::size_t>(arc.to)] != tree.dist[static_cast<std::size_t>(v)]) {
                continue;
            }
            if (best < 0 || arc.to < graph.arc(best).to) best = a;
        }
        tree.next_arc[static_cast<std::size_t>(v)] = best;
    }
    return tree;
}

std::vector<int> ShortestPathTree::path_from(const Digraph& graph, int node) const {
    std::vector<int> path;
    if (!reaches(node)) return path;
    path.push_back(node);
    while (node != target) {
        node = graph.arc(next_arc[static_cast<std::size_t>(node)]).to;
        path.push_back(node);
    }
    return path;
}

KShortestPaths::KShortestPaths(const Digraph& graph, int source, int target, bool simple_only,
                               std::span<const std::int64_t> node_values)
    : graph_(&graph),
      source_(source),
      target_(target),
      simple_only_(simple_only),
      node_values_(node_values.begin(), node_values.end()),
      tree_(ShortestPathTree::build(graph, target)) {
    if (source < 0 || source >= graph.size()) {
        throw Error(ErrorCode::InvalidArgument, "source node out of range");
    }
    if (!node_values_.empty() && node_values_.size() != static_cast<std::size_t>(graph.size())) {
        throw Error(ErrorCode::InvalidArgument, "node values must cover every node");
    }
    build_heaps();

    if (simple_only_) {
        std::vector<Length> weights;
        weights.reserve(graph.arcs().size());
        for (const Arc& a : graph.arcs()) weights.push_back(a.weight);
        const auto take = std::min<std::size_t>(weights.size(), static_cast<std::size_t>(graph.size() - 1));
        std::partial_sort(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(take), weights.end(),
                          std::greater<>());
        simple_bound_ = std::accumulate(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(take),
                                        Length{0});
    }
}

std::int64_t KShortestPaths::value(int node) const {
    return node_values_.empty() ? 0 : node_values_[static_cast<std::size_t>(node)];
}

bool KShortestPaths::heap_less(int a, int b) const {
    const HeapNode& x = heap_[static_cast<std::size_t>(a)];
    const HeapNode& y = heap_[static_cast<std::size_t>(b)];
    return x.key != y.key ? x.key < y.key : x.arc < y.arc;
}

int KShortestPaths::singleton(Length key, int arc) {
    heap_.push_back({key, arc, -1, -1, 1});
    return static_cast<int>(heap_.size()) - 1;
}

// Persistent meld: copies the right spine of the smaller root, leaves both
// inputs intact.
int KShortestPaths::meld(int a, int b) {
    if (a < 0) return b;
    if (b < 0) return a;
    if (heap_less(b, a)) std::swap(a, b);
    HeapNode node = heap_[static_cast<std::size_t>(a)];
    node.right = meld(node.right, b);
    const auto rank_of = [this](int h) { return h < 0 ? 0 : heap_[static_cast<std::size_t>(h)].rank; };
    if (rank_of(node.left) < rank_of(node.right)) std::swap(node.left, node.right);
    node.rank = rank_of(node.right) + 1;
    heap_.push_back(node);
    return static_cast<int>(heap_.size()) - 1;
}

void KShortestPaths::build_heaps() {
    const Digraph& g = *graph_;
    const auto n = static_cast<std::size_t>(g.size());
    heap_root_.assign(n, -1);
    tree_value_.assign(n, 0);
    tree_count_.assign(n, 0);

    std::vector<int> order;
    for (int v = 0; v < g.size(); ++v) {
        if (tree_.reaches(v)) order.push_back(v);
    }
    // Positive weights: a tree parent is strictly closer to the target.
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Length da = tree_.dist[static_cast<std::size_t>(a)];
        const Length db = tree_.dist[static_cast<std::size_t>(b)];
        return da != db ? da < db : a < b;
    });

    for (int v : order) {
        const auto vi = static_cast<std::size_t>(v);
        int own = -1;
        for (int a : g.out_arcs(v)) {
            const Arc& arc = g.arc(a);
            if (a == tree_.next_arc[vi] || !tree_.reaches(arc.to)) continue;
            const Length delta = arc.weight + tree_.dist[static_cast<std::size_t>(arc.to)] - tree_.dist[vi];
            own = meld(own, singleton(delta, a));
        }
        if (v == target_) {
            heap_root_[vi] = own;
            tree_value_[vi] = value(v);
            tree_count_[vi] = 1;
        } else {
            const auto parent = static_cast<std::size_t>(g.arc(tree_.next_arc[vi]).to);
            heap_root_[vi] = meld(own, heap_root_[parent]);
            tree_value_[vi] = value(v) + tree_value_[parent];
            tree_count_[vi] = 1 + tree_count_[parent];
        }
    }
}

void KShortestPaths::push(Length cost, int heap_node, int prefix) {
    queue_.push({cost, candidates_.size()});
    candidates_.push_back({heap_node, prefix});
}

std::optional<WalkHandle> KShortestPaths::next_walk() {
    if (!started_) {
        started_ = true;
        if (!tree_.reaches(source_)) return std::nullopt;
        const auto s = static_cast<std::size_t>(source_);
        states_.push_back({-1, -1, tree_value_[s], tree_count_[s]});
        if (const int root = heap_root_[s]; root >= 0) {
            push(tree_.dist[s] + heap_[static_cast<std::size_t>(root)].key, root, 0);
        }
        return WalkHandle{tree_.dist[s], tree_value_[s], tree_count_[s], 0, 0};
    }
    if (queue_.empty()) return std::nullopt;

    const Pending top = queue_.top();
    queue_.pop();
    const Candidate cand = candidates_[static_cast<std::size_t>(top.seq)];
    const HeapNode node = heap_[static_cast<std::size_t>(cand.heap_node)];
    const Arc& arc = graph_->arc(node.arc);
    const State prefix = states_[static_cast<std::size_t>(cand.prefix)];
    const auto tail = static_cast<std::size_t>(arc.from);
    const auto head = static_cast<std::size_t>(arc.to);

    // Swap the tree run tail->target for the sidetrack plus head->target.
    State state{cand.heap_node, cand.prefix,
                prefix.value_sum - tree_value_[tail] + value(arc.from) + tree_value_[head],
                prefix.node_count - tree_count_[tail] + 1 + tree_count_[head]};
    const int id = static_cast<int>(states_.size());
    states_.push_back(state);

    for (int child : {node.left, node.right}) {
        if (child < 0) continue;
        push(top.cost - node.key + heap_[static_cast<std::size_t>(child)].key, child, cand.prefix);
    }
    if (const int root = heap_root_[head]; root >= 0) {
        push(top.cost + heap_[static_cast<std::size_t>(root)].key, root, id);
    }
    return WalkHandle{top.cost, state.value_sum, state.node_count, 0, id};
}

std::vector<int> KShortestPaths::nodes(const WalkHandle& walk) const {
    std::vector<int> out;
    nodes_into(walk, out);
    return out;
}

void KShortestPaths::nodes_into(const WalkHandle& walk, std::vector<int>& out) const {
    std::vector<int>& sidetracks = sidetrack_scratch_;
    sidetracks.clear();
    for (int st = walk.state; states_[static_cast<std::size_t>(st)].heap_node >= 0;
         st = states_[static_cast<std::size_t>(st)].prefix) {
        sidetracks.push_back(heap_[static_cast<std::size_t>(states_[static_cast<std::size_t>(st)].heap_node)].arc);
    }
    std::reverse(sidetracks.begin(), sidetracks.end());

    const Digraph& g = *graph_;
    out.clear();
    out.reserve(static_cast<std::size_t>(walk.node_count));
    int cur = source_;
    out.push_back(cur);
    const auto follow_tree_to = [&](int stop) {
        while (cur != stop) {
            cur = g.arc(tree_.next_arc[static_cast<std::size_t>(cur)]).to;
            out.push_back(cur);
        }
    };
    for (int a : sidetracks) {
        follow_tree_to(g.arc(a).from);
        cur = g.arc(a).to;
        out.push_back(cur);
    }
    follow_tree_to(target_);
}

bool KShortestPaths::is_simple(const WalkHandle& walk) const {
    if (walk.node_count > graph_->size()) return false;
    std::vector<char> seen(static_cast<std::size_t>(graph_->size()), 0);
    for (int v : nodes(walk)) {
        if (seen[static_cast<std::size_t>(v)]) return false;
        seen[static_cast<std::size_t>(v)] = 1;
    }
    return true;
}

std::optional<WalkHandle> KShortestPaths::next() {
    // A closed walk of positive length repeats its endpoint.
    if (simple_only_ && source_ == target_ && emitted_ > 0) return std::nullopt;
    while (true) {
        std::optional<WalkHandle> walk = next_walk();
        if (!walk) return std::nullopt;
        if (simple_only_) {
            if (walk->length > simple_bound_) {
                // Nothing longer can be simple; drain so later calls stay empty.
                queue_ = {};
                return std::nullopt;
            }
            if (!is_simple(*walk)) continue;
        }
        walk->index = ++emitted_;
        return walk;
    }
}

}  // namespace amble::routing
