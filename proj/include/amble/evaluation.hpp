#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amble/geo_grid.hpp"
#include "amble/k_shortest.hpp"
#include "amble/perception.hpp"
#include "amble/route_engine.hpp"
#include "amble/stats.hpp"

namespace amble::evaluation {

struct Landmark {
    std::string name;
    geo::LatLon location;
    int cell = -1;
};

/// Landmarks snapped to distinct cells.
class LandmarkSet {
public:
    /// Throws OutOfBounds for a landmark outside the grid and InvalidArgument
    /// when two landmarks share a cell.
    static LandmarkSet snap(const geo::LocationGraph& graph, std::vector<Landmark> landmarks);

    const std::vector<Landmark>& landmarks() const { return landmarks_; }
    std::size_t size() const { return landmarks_.size(); }
    /// Unordered index pairs (i < j), n(n-1)/2 of them.
    std::vector<std::pair<int, int>> pairs() const;

private:
    std::vector<Landmark> landmarks_;
};

/// The three quality fields of one graph, indexed by Quality.
using FieldSet = std::array<perception::QualityField, 3>;

/// Throws InvalidArgument unless each slot holds its own quality and every
/// field covers the graph.
void check_fields(const geo::LocationGraph& graph, const FieldSet& fields);

inline constexpr std::size_t index_of(perception::Quality q) { return static_cast<std::size_t>(q); }

/// Means along a path, per quality.
struct PathScores {
    std::array<double, 3> raw{};
    std::array<double, 3> prob{};
    std::array<double, 3> rank{};
};

PathScores score_path(const FieldSet& fields, std::span<const int> cells);

struct VariantRecord {
    std::vector<int> cells;
    double length_m = 0.0;
    std::int64_t paths_explored = 0;
    PathScores scores;
    /// Relative change against the shortest path, in percent; empty where the
    /// shortest path's mean is 0. Ranks count an improvement as positive.
    std::array<std::optional<double>, 3> delta_raw_pct;
    std::array<std::optional<double>, 3> delta_prob_pct;
    std::array<std::optional<double>, 3> delta_rank_pct;
    double delta_length_pct = 0.0;
};

struct PairRecord {
    std::string name_a;
    std::string name_b;
    /// Canonical orientation: cell_a < cell_b.
    int cell_a = 0;
    int cell_b = 0;
    std::vector<int> shortest_cells;
    double shortest_length_m = 0.0;
    PathScores shortest;
    /// Indexed by the quality the route was recommended for.
    std::array<VariantRecord, 3> recommended;
};

/// Evaluates one endpoint pair; the result does not depend on its orientation.
PairRecord evaluate_pair(const geo::LocationGraph& graph, const routing::Digraph& digraph, const FieldSet& fields,
                         int cell_a, int cell_b, const routing::ExplorationPolicy& policy);

using Matrix = std::array<std::array<double, 3>, 3>;
using CountMatrix = std::array<std::array<int, 3>, 3>;

struct ImprovementReport {
    /// [recommended-for][measured quality], mean percent change over pairs.
    Matrix raw_pct{};
    Matrix prob_pct{};
    Matrix rank_pct{};
    /// Pairs left out of each raw_pct entry because the shortest mean was 0.
    CountMatrix excluded{};
    double mean_delta_length_pct = 0.0;
    double mean_extra_minutes = 0.0;
    std::vector<PairRecord> pairs;
};

/// Table of mean improvements of each recommended variant over the shortest
/// path across every landmark pair. Pairs are evaluated on `threads` workers
/// (0 picks the hardware concurrency); the result is independent of it.
ImprovementReport improvement_matrix(const geo::LocationGraph& graph, const FieldSet& fields,
                                     const LandmarkSet& landmarks, const routing::ExplorationPolicy& policy,
                                     unsigned threads = 0);

struct LengthSample {
    double shortest_m = 0.0;
    double recommended_m = 0.0;
};

struct LengthBin {
    double lo_km = 0.0;
    double hi_km = 0.0;
    double mean_delta_pct = 0.0;
    int count = 0;
};

struct LengthTradeoff {
    double mean_delta_length_pct = 0.0;
    double mean_extra_cells = 0.0;
    double mean_extra_minutes = 0.0;
    /// Nonempty 0.5 km bins of shortest-path length, ascending.
    std::vector<LengthBin> curve;
};

inline constexpr double kLengthBinKm = 0.5;

LengthTradeoff length_tradeoff(std::span<const LengthSample> samples, double cell_size_m = geo::kDefaultCellSizeM);
/// Every recommended variant of every pair.
LengthTradeoff length_tradeoff(const ImprovementReport& report, double cell_size_m = geo::kDefaultCellSizeM);

struct QualityCorrelation {
    perception::Quality a;
    perception::Quality b;
    stats::Correlation correlation;
};

/// Pearson correlation of raw scores for every pair of the given fields.
std::vector<QualityCorrelation> quality_correlations(std::span<const perception::QualityField> fields);

/// 1, 2, 5, 10, 20, 50, ... up to and including m_max when it falls on the grid.
std::vector<std::int64_t> geometric_grid(std::int64_t m_max);

struct CurvePoint {
    std::int64_t m = 0;
    double mean_delta_rank = 0.0;
    double mean_delta_length_pct = 0.0;
};

struct ExplorationCurve {
    std::vector<CurvePoint> points;
    /// [pair][m index] absolute best-rank improvement over the shortest path.
    std::vector<std::vector<double>> delta_rank;
    std::vector<std::vector<double>> delta_length_pct;
};

/// Best rank and length overhead after exactly m candidates, for every m on
/// the geometric grid up to policy.m_max. Throws InvalidArgument when
/// policy.mvt_enabled is set.
ExplorationCurve exploration_curve(const geo::LocationGraph& graph, const perception::QualityField& field,
                                   std::span<const std::pair<int, int>> cell_pairs,
                                   const routing::ExplorationPolicy& policy);

}  // namespace amble::evaluation
