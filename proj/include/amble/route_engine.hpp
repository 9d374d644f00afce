#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "amble/geo_grid.hpp"
#include "amble/k_shortest.hpp"
#include "amble/perception.hpp"

namespace amble::routing {

struct PathCandidate {
    std::vector<int> cells;
    double length_m = 0.0;
    /// Mean rank over visits (repeated cells count each time); 0 without a rank field.
    double avg_rank = 0.0;
    std::int64_t index_in_enumeration = 1;
};

struct ExplorationPolicy {
    std::int64_t m_max = 1'000'000;
    std::int64_t batch_size = 100;
    double epsilon = 0.0;
    bool mvt_enabled = true;
    bool simple_paths_only = false;

    /// Throws InvalidArgument.
    void validate() const;
};

struct RankCheckpoint {
    std::int64_t m = 0;
    double best_avg_rank = 0.0;
};

struct RoutePlan {
    /// Empty for the shortest-path baseline.
    std::optional<perception::Quality> quality;
    PathCandidate path;
    double walk_min = 0.0;
    std::int64_t paths_explored = 0;
    std::vector<RankCheckpoint> best_rank_trace;
};

/// Sum of edge lengths along a cell sequence; throws if two consecutive
/// cells are not linked.
double path_length(const geo::LocationGraph& graph, std::span<const int> cells);
double average_rank(std::span<const int> cells, std::span<const int> ranks);

/// Minimum-length path; equal-length paths resolve to the lexicographically
/// smallest cell sequence. `ranks` may be empty.
PathCandidate shortest_path(const geo::LocationGraph& graph, int source, int target,
                            std::span<const int> ranks = {});

/// Materialising view of the walk enumeration over a location graph.
class PathStream {
public:
    PathStream(const geo::LocationGraph& graph, int source, int target, bool simple_paths_only = false,
               std::span<const int> ranks = {});

    std::optional<PathCandidate> next();

private:
    const geo::LocationGraph* graph_;
    Digraph digraph_;
    std::vector<int> ranks_;
    KShortestPaths enumerator_;
};

inline PathStream k_shortest_paths(const geo::LocationGraph& graph, int source, int target,
                                   bool simple_paths_only = false, std::span<const int> ranks = {}) {
    return PathStream(graph, source, target, simple_paths_only, ranks);
}

/// Cumulative rank gain at a batch boundary.
struct GainCheckpoint {
    std::int64_t m = 0;
    double gain = 0.0;
};

/// Marginal-value stop: true when the last batch's gain rate is no better
/// than the average rate so far (only once some gain exists), or when the
/// last batch gained less than epsilon. Needs two or more checkpoints.
bool mvt_should_stop(std::span<const GainCheckpoint> trace, double epsilon = 0.0);

/// Scans the enumeration in batches, keeping the walk with the lowest mean
/// rank (then shorter, then lexicographically smaller). Throws InvalidArgument
/// for bad cells or a rank field of the wrong size.
RoutePlan best_pleasant_path(const geo::LocationGraph& graph, std::span<const int> ranks, int source,
                             int target, const ExplorationPolicy& policy = {},
                             std::optional<perception::Quality> quality = std::nullopt);

/// Same search over a prepared digraph (reused across queries).
RoutePlan best_pleasant_path(const geo::LocationGraph& graph, const Digraph& digraph,
                             std::span<const int> ranks, int source, int target,
                             const ExplorationPolicy& policy,
                             std::optional<perception::Quality> quality = std::nullopt);

struct ExplorationSample {
    std::int64_t m = 0;
    double best_avg_rank = 0.0;
    double best_length_m = 0.0;
};

/// Best walk after exactly m candidates for each requested m (ascending),
/// without any early stopping. Stops early only if the stream runs dry.
std::vector<ExplorationSample> explore_checkpoints(const geo::LocationGraph& graph, const Digraph& digraph,
                                                   std::span<const int> ranks, int source, int target,
                                                   std::span<const std::int64_t> checkpoints,
                                                   bool simple_paths_only = false);

RoutePlan shortest_plan(const geo::LocationGraph& graph, int source, int target,
                        std::span<const int> ranks = {});

}  // namespace amble::routing
