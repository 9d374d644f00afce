#include "amble/perception.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "amble/error.hpp"

namespace amble::perception {

namespace {

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string_view to_string(Quality q) {
    switch (q) {
    case Quality::Beauty: return "beauty";
    case Quality::Quiet: return "quiet";
    case Quality::Happy: return "happy";
    }
    return "?";
}

std::optional<Quality> parse_quality(std::string_view text) {
    const std::string t = lowercase(text);
    if (t == "beauty" || t == "beautiful") return Quality::Beauty;
    if (t == "quiet") return Quality::Quiet;
    if (t == "happy" || t == "happiness") return Quality::Happy;
    return std::nullopt;
}

std::string_view to_string(SceneSource s) {
    return s == SceneSource::StreetView ? "streetview" : "geograph";
}

std::optional<SceneSource> parse_scene_source(std::string_view text) {
    const std::string t = lowercase(text);
    if (t == "streetview" || t == "street_view" || t == "google") return SceneSource::StreetView;
    if (t == "geograph") return SceneSource::Geograph;
    return std::nullopt;
}

std::optional<Outcome> parse_outcome(std::string_view text) {
    const std::string t = lowercase(text);
    if (t == "a") return Outcome::A;
    if (t == "b") return Outcome::B;
    if (t == "tie" || t == "cant_tell" || t == "can't tell" || t == "cant tell") return Outcome::Tie;
    return std::nullopt;
}

std::size_t VoteAggregation::scored_count() const {
    return static_cast<std::size_t>(
        std::count_if(scores.begin(), scores.end(), [](const SceneScore& s) { return s.scored; }));
}

VoteAggregation aggregate_votes(std::span<const VoteRecord> votes, std::span<const Scene> scenes,
                                Quality quality) {
    std::map<std::string, SceneScore, std::less<>> by_id;
    for (const Scene& scene : scenes) {
        by_id.try_emplace(scene.scene_id, SceneScore{scene.scene_id, quality});
    }

    VoteAggregation result;
    for (const VoteRecord& vote : votes) {
        if (vote.quality != quality) {
            continue;
        }
        auto a = by_id.find(vote.scene_a);
        auto b = by_id.find(vote.scene_b);
        if (a == by_id.end() || b == by_id.end() || a == b) {
            ++result.rejected;
            continue;
        }
        switch (vote.outcome) {
        case Outcome::A:
            ++a->second.wins;
            ++b->second.losses;
            break;
        case Outcome::B:
            ++b->second.wins;
            ++a->second.losses;
            break;
        case Outcome::Tie:
            ++a->second.ties;
            ++b->second.ties;
            break;
        }
    }

    result.scores.reserve(by_id.size());
    for (auto& [id, s] : by_id) {
        const int decided = s.wins + s.losses;
        s.scored = decided > 0;
        s.score = s.scored ? static_cast<double>(s.wins) / decided : 0.0;
        result.scores.push_back(std::move(s));
    }
    return result;
}

CellInfill scenes_to_cells(const geo::LocationGraph& graph, std::span<const Scene> scenes,
                           std::span<const SceneScore> scores, IdwOptions options) {
    if (options.k < 1 || !(options.power >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "IDW needs k >= 1 and a non-negative power");
    }
    std::map<std::string_view, double> score_of;
    for (const SceneScore& s : scores) {
        if (s.scored) {
            score_of.emplace(s.scene_id, s.score);
        }
    }

    struct Located {
        geo::PointM xy;
        int cell;
        double score;
    };
    CellInfill out;
    std::vector<Located> located;
    for (const Scene& scene : scenes) {
        auto it = score_of.find(scene.scene_id);
        if (it == score_of.end()) {
            continue;
        }
        if (!graph.spec().bbox.contains(scene.location)) {
            ++out.scenes_outside_bbox;
            continue;
        }
        located.push_back({geo::project(graph.spec().bbox, scene.location),
                           geo::cell_of(graph, scene.location), it->second});
    }
    if (located.empty()) {
        throw Error(ErrorCode::NoScoredScenes, "zero scored scenes");
    }

    const auto n = static_cast<std::size_t>(graph.size());
    std::vector<double> sum(n, 0.0);
    std::vector<int> count(n, 0);
    for (const Located& l : located) {
        sum[static_cast<std::size_t>(l.cell)] += l.score;
        ++count[static_cast<std::size_t>(l.cell)];
    }

    std::optional<double> median;
    if (located.size() < static_cast<std::size_t>(options.k)) {
        std::vector<double> all;
        all.reserve(located.size());
        for (const Located& l : located) all.push_back(l.score);
        median = median_of(std::move(all));
    }

    out.raw.assign(n, 0.0);
    out.observed.assign(n, false);
    std::vector<std::pair<double, std::size_t>> nearest;
    for (std::size_t c = 0; c < n; ++c) {
        if (count[c] > 0) {
            out.raw[c] = sum[c] / count[c];
            out.observed[c] = true;
            continue;
        }
        if (median) {
            out.raw[c] = *median;
            continue;
        }
        const geo::PointM centre = graph.cell(static_cast<int>(c)).centroid_m;
        nearest.clear();
        for (std::size_t i = 0; i < located.size(); ++i) {
            nearest.emplace_back(std::hypot(located[i].xy.x_m - centre.x_m, located[i].xy.y_m - centre.y_m), i);
        }
        const auto k = static_cast<std::ptrdiff_t>(options.k);
        std::partial_sort(nearest.begin(), nearest.begin() + k, nearest.end());
        double weighted = 0.0;
        double weights = 0.0;
        for (std::ptrdiff_t i = 0; i < k; ++i) {
            const auto& [dist, idx] = nearest[static_cast<std::size_t>(i)];
            // An empty cell's centroid is at least half a cell from any scene.
            const double w = 1.0 / std::pow(dist, options.power);
            weighted += w * located[idx].score;
            weights += w;
        }
        out.raw[c] = weighted / weights;
    }
    return out;
}

std::string_view to_string(ScoringCurve c) {
    switch (c) {
    case ScoringCurve::Linear: return "linear";
    case ScoringCurve::Cubic: return "cubic";
    case ScoringCurve::Exponential: return "exponential";
    case ScoringCurve::SquareRoot: return "sqrt";
    case ScoringCurve::Sigmoid: return "sigmoid";
    }
    return "?";
}

std::optional<ScoringCurve> parse_curve(std::string_view text) {
    const std::string t = lowercase(text);
    if (t == "linear") return ScoringCurve::Linear;
    if (t == "cubic") return ScoringCurve::Cubic;
    if (t == "exponential" || t == "exp") return ScoringCurve::Exponential;
    if (t == "sqrt" || t == "squareroot" || t == "square_root") return ScoringCurve::SquareRoot;
    if (t == "sigmoid") return ScoringCurve::Sigmoid;
    return std::nullopt;
}

double apply_curve(ScoringCurve curve, double h) {
    switch (curve) {
    case ScoringCurve::Linear: return h;
    case ScoringCurve::Cubic: return h * h * h;
    case ScoringCurve::Exponential: return std::exp(h);
    case ScoringCurve::SquareRoot: return std::sqrt(h);
    case ScoringCurve::Sigmoid: return 1.0 / (1.0 + std::exp(-h));
    }
    return h;
}

Probabilities score_to_probability(std::span<const double> raw, ScoringCurve curve) {
    if (raw.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot score an empty field");
    }
    Probabilities out;
    out.prob.reserve(raw.size());
    double max_f = 0.0;
    for (double h : raw) {
        if (!(h >= 0.0 && h <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "raw scores must lie in [0, 1]");
        }
        const double f = apply_curve(curve, h);
        out.prob.push_back(f);
        max_f = std::max(max_f, f);
    }
    if (!(max_f > 0.0)) {
        throw Error(ErrorCode::DegenerateField,
                    "curve " + std::string(to_string(curve)) + " maps every cell to 0");
    }
    // Divide rather than multiply by k so the maximum lands on exactly 1.
    for (double& p : out.prob) {
        p /= max_f;
    }
    out.k = 1.0 / max_f;
    return out;
}

namespace {

std::vector<int> ranks_from_order(const std::vector<int>& order) {
    std::vector<int> rank(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i) + 1;
    }
    return rank;
}

}  // namespace

std::vector<int> rank_cells(std::span<const double> prob) {
    std::vector<int> order(prob.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return prob[static_cast<std::size_t>(a)] > prob[static_cast<std::size_t>(b)];
    });
    return ranks_from_order(order);
}

std::vector<int> rank_cells(std::span<const double> prob, std::span<const double> raw) {
    if (raw.size() != prob.size()) {
        throw Error(ErrorCode::InvalidArgument, "raw and probability fields differ in size");
    }
    std::vector<int> order(prob.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ia = static_cast<std::size_t>(a);
        const auto ib = static_cast<std::size_t>(b);
        if (prob[ia] != prob[ib]) return prob[ia] > prob[ib];
        return raw[ia] > raw[ib];
    });
    return ranks_from_order(order);
}

QualityField make_quality_field(Quality quality, std::vector<double> raw, ScoringCurve curve) {
    QualityField field;
    field.quality = quality;
    field.curve = curve;
    Probabilities p = score_to_probability(raw, curve);
    field.raw = std::move(raw);
    field.prob = std::move(p.prob);
    field.k = p.k;
    field.rank = rank_cells(field.prob, field.raw);
    return field;
}

QualityField with_curve(const QualityField& field, ScoringCurve curve) {
    return make_quality_field(field.quality, field.raw, curve);
}

}  // namespace amble::perception
