#include "amble/route_engine.hpp"

#include <algorithm>
#include <string>

#include "amble/error.hpp"

namespace amble::routing {

namespace {

void check_cells(const geo::LocationGraph& graph, int source, int target) {
    if (!graph.valid_cell(source) || !graph.valid_cell(target)) {
        throw Error(ErrorCode::InvalidArgument, "route endpoints must be valid cell ids (got " +
                                                    std::to_string(source) + ", " + std::to_string(target) +
                                                    ")");
    }
}

void check_ranks(const geo::LocationGraph& graph, std::span<const int> ranks, bool required) {
    if ((required || !ranks.empty()) && ranks.size() != static_cast<std::size_t>(graph.size())) {
        throw Error(ErrorCode::InvalidArgument, "rank field must cover every cell");
    }
}

Digraph checked_digraph(const geo::LocationGraph& graph, int source, int target, std::span<const int> ranks) {
    check_cells(graph, source, target);
    check_ranks(graph, ranks, false);
    return Digraph::from_location_graph(graph);
}

std::vector<std::int64_t> widen(std::span<const int> ranks) {
    return {ranks.begin(), ranks.end()};
}

/// Running minimum over emitted walks under the selection order.
class BestWalk {
public:
    explicit BestWalk(const KShortestPaths& enumerator) : enumerator_(&enumerator) {}

    void offer(const WalkHandle& walk) {
        if (!has_) {
            take(walk, enumerator_->nodes(walk));
            return;
        }
        // Mean ranks compared exactly by cross-multiplying.
        const std::int64_t lhs = walk.value_sum * best_.node_count;
        const std::int64_t rhs = best_.value_sum * walk.node_count;
        if (lhs != rhs) {
            if (lhs < rhs) take(walk, enumerator_->nodes(walk));
            return;
        }
        if (walk.length != best_.length) {
            if (walk.length < best_.length) take(walk, enumerator_->nodes(walk));
            return;
        }
        enumerator_->nodes_into(walk, scratch_);
        if (scratch_ < cells_) {
            best_ = walk;
            std::swap(cells_, scratch_);
        }
    }

    bool has() const { return has_; }
    const WalkHandle& walk() const { return best_; }
    const std::vector<int>& cells() const { return cells_; }
    double avg_rank() const {
        return static_cast<double>(best_.value_sum) / static_cast<double>(best_.node_count);
    }

private:
    void take(const WalkHandle& walk, std::vector<int> cells) {
        best_ = walk;
        cells_ = std::move(cells);
        has_ = true;
    }

    const KShortestPaths* enumerator_;
    WalkHandle best_;
    std::vector<int> cells_;
    std::vector<int> scratch_;
    bool has_ = false;
};

PathCandidate to_candidate(const geo::LocationGraph& graph, const BestWalk& best) {
    PathCandidate c;
    c.cells = best.cells();
    c.length_m = path_length(graph, c.cells);
    c.avg_rank = best.avg_rank();
    c.index_in_enumeration = best.walk().index;
    return c;
}

}  // namespace

void ExplorationPolicy::validate() const {
    if (batch_size < 1) {
        throw Error(ErrorCode::InvalidArgument, "batch_size must be at least 1");
    }
    if (m_max < batch_size) {
        throw Error(ErrorCode::InvalidArgument, "m_max must be at least batch_size");
    }
    if (!(epsilon >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");
    }
}

double path_length(const geo::LocationGraph& graph, std::span<const int> cells) {
    double total = 0.0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const double len = graph.edge_length(cells[i - 1], cells[i]);
        if (len < 0.0) {
            throw Error(ErrorCode::Internal, "consecutive path cells " + std::to_string(cells[i - 1]) + " and " +
                                                 std::to_string(cells[i]) + " are not adjacent");
        }
        total += len;
    }
    return total;
}

double average_rank(std::span<const int> cells, std::span<const int> ranks) {
    if (cells.empty() || ranks.empty()) return 0.0;
    std::int64_t sum = 0;
    for (int c : cells) sum += ranks[static_cast<std::size_t>(c)];
    return static_cast<double>(sum) / static_cast<double>(cells.size());
}

PathCandidate shortest_path(const geo::LocationGraph& graph, int source, int target,
                            std::span<const int> ranks) {
    check_cells(graph, source, target);
    check_ranks(graph, ranks, false);
    const Digraph digraph = Digraph::from_location_graph(graph);
    const ShortestPathTree tree = ShortestPathTree::build(digraph, target);
    PathCandidate c;
    c.cells = tree.path_from(digraph, source);
    if (c.cells.empty()) {
        throw Error(ErrorCode::Internal, "target unreachable in location graph");
    }
    c.length_m = path_length(graph, c.cells);
    c.avg_rank = average_rank(c.cells, ranks);
    return c;
}

RoutePlan shortest_plan(const geo::LocationGraph& graph, int source, int target, std::span<const int> ranks) {
    RoutePlan plan;
    plan.path = shortest_path(graph, source, target, ranks);
    plan.walk_min = plan.path.length_m / geo::kWalkingSpeedMPerMin;
    plan.paths_explored = 1;
    plan.best_rank_trace.push_back({1, plan.path.avg_rank});
    return plan;
}

PathStream::PathStream(const geo::LocationGraph& graph, int source, int target, bool simple_paths_only,
                       std::span<const int> ranks)
    : graph_(&graph),
      digraph_(checked_digraph(graph, source, target, ranks)),
      ranks_(ranks.begin(), ranks.end()),
      enumerator_(digraph_, source, target, simple_paths_only) {}

std::optional<PathCandidate> PathStream::next() {
    const std::optional<WalkHandle> walk = enumerator_.next();
    if (!walk) return std::nullopt;
    PathCandidate c;
    c.cells = enumerator_.nodes(*walk);
    c.length_m = path_length(*graph_, c.cells);
    c.avg_rank = average_rank(c.cells, ranks_);
    c.index_in_enumeration = walk->index;
    return c;
}

bool mvt_should_stop(std::span<const GainCheckpoint> trace, double epsilon) {
    if (trace.size() < 2) return false;
    const GainCheckpoint& last = trace[trace.size() - 1];
    const GainCheckpoint& prev = trace[trace.size() - 2];
    const double batch_gain = last.gain - prev.gain;
    if (batch_gain < epsilon) return true;
    if (last.gain <= 0.0 || last.m <= prev.m) return false;
    const double marginal = batch_gain / static_cast<double>(last.m - prev.m);
    const double average = last.gain / static_cast<double>(last.m);
    return marginal <= average;
}

RoutePlan best_pleasant_path(const geo::LocationGraph& graph, std::span<const int> ranks, int source,
                             int target, const ExplorationPolicy& policy,
                             std::optional<perception::Quality> quality) {
    check_cells(graph, source, target);
    return best_pleasant_path(graph, Digraph::from_location_graph(graph), ranks, source, target, policy,
                              quality);
}

RoutePlan best_pleasant_path(const geo::LocationGraph& graph, const Digraph& digraph,
                             std::span<const int> ranks, int source, int target,
                             const ExplorationPolicy& policy, std::optional<perception::Quality> quality) {
    check_cells(graph, source, target);
    check_ranks(graph, ranks, true);
    policy.validate();

    RoutePlan plan;
    plan.quality = quality;
    if (source == target) {
        plan.path.cells = {source};
        plan.path.avg_rank = ranks[static_cast<std::size_t>(source)];
        plan.paths_explored = 1;
        plan.best_rank_trace.push_back({1, plan.path.avg_rank});
        return plan;
    }

    const std::vector<std::int64_t> values = widen(ranks);
    KShortestPaths enumerator(digraph, source, target, policy.simple_paths_only, values);
    BestWalk best(enumerator);
    std::vector<GainCheckpoint> gains;

    std::int64_t m = 0;
    while (m < policy.m_max) {
        const std::optional<WalkHandle> walk = enumerator.next();
        if (!walk) break;
        ++m;
        best.offer(*walk);
        if (m % policy.batch_size != 0) continue;

        plan.best_rank_trace.push_back({m, best.avg_rank()});
        gains.push_back({m, plan.best_rank_trace.front().best_avg_rank - best.avg_rank()});
        const bool stop = policy.mvt_enabled
                              ? mvt_should_stop(gains, policy.epsilon)
                              : policy.epsilon > 0.0 && gains.size() >= 2 &&
                                    gains[gains.size() - 1].gain - gains[gains.size() - 2].gain < policy.epsilon;
        if (stop) break;
    }
    if (!best.has()) {
        throw Error(ErrorCode::Internal, "no walk between cells " + std::to_string(source) + " and " +
                                             std::to_string(target));
    }
    if (plan.best_rank_trace.empty() || plan.best_rank_trace.back().m != m) {
        plan.best_rank_trace.push_back({m, best.avg_rank()});
    }

    plan.path = to_candidate(graph, best);
    plan.walk_min = plan.path.length_m / geo::kWalkingSpeedMPerMin;
    plan.paths_explored = m;
    return plan;
}

std::vector<ExplorationSample> explore_checkpoints(const geo::LocationGraph& graph, const Digraph& digraph,
                                                   std::span<const int> ranks, int source, int target,
                                                   std::span<const std::int64_t> checkpoints,
                                                   bool simple_paths_only) {
    check_cells(graph, source, target);
    check_ranks(graph, ranks, true);
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
        throw Error(ErrorCode::InvalidArgument, "checkpoints must be ascending");
    }

    const std::vector<std::int64_t> values = widen(ranks);
    KShortestPaths enumerator(digraph, source, target, simple_paths_only, values);
    BestWalk best(enumerator);
    std::vector<ExplorationSample> samples;
    std::int64_t m = 0;
    bool dry = false;
    for (std::int64_t checkpoint : checkpoints) {
        while (!dry && m < checkpoint) {
            const std::optional<WalkHandle> walk = enumerator.next();
            if (!walk) {
                dry = true;
                break;
            }
            ++m;
            best.offer(*walk);
        }
        if (!best.has()) {
            throw Error(ErrorCode::Internal, "no walk between the requested cells");
        }
        samples.push_back({checkpoint, best.avg_rank(), path_length(graph, best.cells())});
    }
    return samples;
}

}  // namespace amble::routing
