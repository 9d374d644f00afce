#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amble/geo_grid.hpp"

namespace amble::perception {

enum class Quality { Beauty, Quiet, Happy };

inline constexpr Quality kAllQualities[] = {Quality::Beauty, Quality::Quiet, Quality::Happy};

std::string_view to_string(Quality q);
/// Accepts beauty|quiet|happy (case-insensitive).
std::optional<Quality> parse_quality(std::string_view text);

enum class SceneSource { StreetView, Geograph };

std::string_view to_string(SceneSource s);
std::optional<SceneSource> parse_scene_source(std::string_view text);

struct Scene {
    std::string scene_id;
    geo::LatLon location;
    SceneSource source = SceneSource::StreetView;
};

/// "Can't tell" answers are recorded as Tie.
enum class Outcome { A, B, Tie };

std::optional<Outcome> parse_outcome(std::string_view text);

struct VoteRecord {
    Quality quality = Quality::Beauty;
    std::string scene_a;
    std::string scene_b;
    Outcome outcome = Outcome::Tie;
};

struct SceneScore {
    std::string scene_id;
    Quality quality = Quality::Beauty;
    int wins = 0;
    int losses = 0;
    int ties = 0;
    /// wins / (wins + losses); meaningless when !scored.
    double score = 0.0;
    bool scored = false;
};

struct VoteAggregation {
    /// One entry per known scene, sorted by scene id.
    std::vector<SceneScore> scores;
    /// Votes for this quality that named an unknown scene or the same scene twice.
    std::size_t rejected = 0;

    std::size_t scored_count() const;
};

/// Win fraction per scene for one quality. Ties are counted but kept out of
/// the denominator.
VoteAggregation aggregate_votes(std::span<const VoteRecord> votes, std::span<const Scene> scenes,
                                Quality quality);

struct IdwOptions {
    int k = 3;
    double power = 2.0;
};

struct CellInfill {
    std::vector<double> raw;
    /// Cells whose value came from their own scenes (the rest are interpolated).
    std::vector<bool> observed;
    std::size_t scenes_outside_bbox = 0;
};

/// Per-cell raw score: mean of the scored scenes inside the cell, otherwise an
/// inverse-distance-weighted mean of the k nearest scored scenes. With fewer
/// than k scored scenes overall, empty cells take the median scene score.
/// Throws NoScoredScenes.
CellInfill scenes_to_cells(const geo::LocationGraph& graph, std::span<const Scene> scenes,
                           std::span<const SceneScore> scores, IdwOptions options = {});

enum class ScoringCurve { Linear, Cubic, Exponential, SquareRoot, Sigmoid };

inline constexpr ScoringCurve kAllCurves[] = {ScoringCurve::Linear, ScoringCurve::Cubic,
                                              ScoringCurve::Exponential, ScoringCurve::SquareRoot,
                                              ScoringCurve::Sigmoid};

std::string_view to_string(ScoringCurve c);
std::optional<ScoringCurve> parse_curve(std::string_view text);

double apply_curve(ScoringCurve curve, double raw);

struct Probabilities {
    std::vector<double> prob;
    /// 1 / max f(raw).
    double k = 1.0;
};

/// prob_i = f(raw_i) / max_j f(raw_j). Throws DegenerateField when max f is 0.
Probabilities score_to_probability(std::span<const double> raw, ScoringCurve curve);

/// Rank 1 is the most probable cell; ties go to the lower cell id.
std::vector<int> rank_cells(std::span<const double> prob);
/// As above, but equal probabilities are first separated by raw score. Curves
/// can round distinct raw scores onto the same probability; this keeps the
/// rank order identical across curves.
std::vector<int> rank_cells(std::span<const double> prob, std::span<const double> raw);

struct QualityField {
    Quality quality = Quality::Beauty;
    ScoringCurve curve = ScoringCurve::Cubic;
    std::vector<double> raw;
    std::vector<double> prob;
    std::vector<int> rank;
    double k = 1.0;

    std::size_t size() const { return raw.size(); }
};

QualityField make_quality_field(Quality quality, std::vector<double> raw,
                                ScoringCurve curve = ScoringCurve::Cubic);

/// Same raw scores, different curve.
QualityField with_curve(const QualityField& field, ScoringCurve curve);

}  // namespace amble::perception
