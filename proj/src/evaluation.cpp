#include "amble/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "amble/error.hpp"

namespace amble::evaluation {

namespace {

using perception::Quality;

std::optional<double> relative_pct(double recommended, double baseline) {
    if (baseline == 0.0) return std::nullopt;
    return 100.0 * (recommended - baseline) / baseline;
}

}  // namespace

LandmarkSet LandmarkSet::snap(const geo::LocationGraph& graph, std::vector<Landmark> landmarks) {
    std::map<int, std::string> taken;
    for (Landmark& lm : landmarks) {
        lm.cell = geo::cell_of(graph, lm.location);
        const auto [it, fresh] = taken.emplace(lm.cell, lm.name);
        if (!fresh) {
            throw Error(ErrorCode::InvalidArgument, "landmarks '" + it->second + "' and '" + lm.name +
                                                        "' share cell " + std::to_string(lm.cell));
        }
    }
    LandmarkSet set;
    set.landmarks_ = std::move(landmarks);
    return set;
}

std::vector<std::pair<int, int>> LandmarkSet::pairs() const {
    std::vector<std::pair<int, int>> out;
    const int n = static_cast<int>(landmarks_.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
    }
    return out;
}

void check_fields(const geo::LocationGraph& graph, const FieldSet& fields) {
    for (Quality q : perception::kAllQualities) {
        const auto& f = fields[index_of(q)];
        if (f.quality != q) {
            throw Error(ErrorCode::InvalidArgument, std::string("field slot for ") +
                                                        std::string(perception::to_string(q)) +
                                                        " holds another quality");
        }
        const auto n = static_cast<std::size_t>(graph.size());
        if (f.raw.size() != n || f.prob.size() != n || f.rank.size() != n) {
            throw Error(ErrorCode::InvalidArgument, std::string(perception::to_string(q)) +
                                                        " field does not cover the graph");
        }
    }
}

PathScores score_path(const FieldSet& fields, std::span<const int> cells) {
    PathScores s;
    if (cells.empty()) return s;
    const double n = static_cast<double>(cells.size());
    for (std::size_t q = 0; q < 3; ++q) {
        double raw = 0.0;
        double prob = 0.0;
        double rank = 0.0;
        for (int c : cells) {
            const auto i = static_cast<std::size_t>(c);
            raw += fields[q].raw[i];
            prob += fields[q].prob[i];
            rank += fields[q].rank[i];
        }
        s.raw[q] = raw / n;
        s.prob[q] = prob / n;
        s.rank[q] = rank / n;
    }
    return s;
}

PairRecord evaluate_pair(const geo::LocationGraph& graph, const routing::Digraph& digraph, const FieldSet& fields,
                         int cell_a, int cell_b, const routing::ExplorationPolicy& policy) {
    if (cell_a > cell_b) std::swap(cell_a, cell_b);
    PairRecord rec;
    rec.cell_a = cell_a;
    rec.cell_b = cell_b;
    const routing::PathCandidate sp = routing::shortest_path(graph, cell_a, cell_b);
    rec.shortest_cells = sp.cells;
    rec.shortest_length_m = sp.length_m;
    rec.shortest = score_path(fields, sp.cells);

    for (Quality q : perception::kAllQualities) {
        const std::size_t row = index_of(q);
        const routing::RoutePlan plan =
            routing::best_pleasant_path(graph, digraph, fields[row].rank, cell_a, cell_b, policy, q);
        VariantRecord& v = rec.recommended[row];
        v.cells = plan.path.cells;
        v.length_m = plan.path.length_m;
        v.paths_explored = plan.paths_explored;
        v.scores = score_path(fields, v.cells);
        for (std::size_t col = 0; col < 3; ++col) {
            v.delta_raw_pct[col] = relative_pct(v.scores.raw[col], rec.shortest.raw[col]);
            v.delta_prob_pct[col] = relative_pct(v.scores.prob[col], rec.shortest.prob[col]);
            // Lower rank is better.
            if (const auto d = relative_pct(v.scores.rank[col], rec.shortest.rank[col])) v.delta_rank_pct[col] = -*d;
        }
        v.delta_length_pct = rec.shortest_length_m > 0.0
                                 ? 100.0 * (v.length_m - rec.shortest_length_m) / rec.shortest_length_m
                                 : 0.0;
    }
    return rec;
}

ImprovementReport improvement_matrix(const geo::LocationGraph& graph, const FieldSet& fields,
                                     const LandmarkSet& landmarks, const routing::ExplorationPolicy& policy,
                                     unsigned threads) {
    check_fields(graph, fields);
    policy.validate();
    const routing::Digraph digraph = routing::Digraph::from_location_graph(graph);
    const auto pairs = landmarks.pairs();

    ImprovementReport report;
    report.pairs.resize(pairs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
        for (std::size_t i = next++; i < pairs.size(); i = next++) {
            try {
                const Landmark& a = landmarks.landmarks()[static_cast<std::size_t>(pairs[i].first)];
                const Landmark& b = landmarks.landmarks()[static_cast<std::size_t>(pairs[i].second)];
                PairRecord rec = evaluate_pair(graph, digraph, fields, a.cell, b.cell, policy);
                const bool swapped = a.cell > b.cell;
                rec.name_a = swapped ? b.name : a.name;
                rec.name_b = swapped ? a.name : b.name;
                report.pairs[i] = std::move(rec);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(pairs.size(), 1)));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);

    Matrix raw_sum{};
    Matrix prob_sum{};
    Matrix rank_sum{};
    CountMatrix raw_n{};
    CountMatrix prob_n{};
    CountMatrix rank_n{};
    double length_sum = 0.0;
    double extra_m_sum = 0.0;
    int variants = 0;
    for (const PairRecord& rec : report.pairs) {
        for (std::size_t row = 0; row < 3; ++row) {
            const VariantRecord& v = rec.recommended[row];
            for (std::size_t col = 0; col < 3; ++col) {
                if (v.delta_raw_pct[col]) {
                    raw_sum[row][col] += *v.delta_raw_pct[col];
                    ++raw_n[row][col];
                } else {
                    ++report.excluded[row][col];
                }
                if (v.delta_prob_pct[col]) {
                    prob_sum[row][col] += *v.delta_prob_pct[col];
                    ++prob_n[row][col];
                }
                if (v.delta_rank_pct[col]) {
                    rank_sum[row][col] += *v.delta_rank_pct[col];
                    ++rank_n[row][col];
                }
            }
            length_sum += v.delta_length_pct;
            extra_m_sum += v.length_m - rec.shortest_length_m;
            ++variants;
        }
    }
    for (std::size_t row = 0; row < 3; ++row) {
        for (std::size_t col = 0; col < 3; ++col) {
            report.raw_pct[row][col] = raw_n[row][col] ? raw_sum[row][col] / raw_n[row][col] : 0.0;
            report.prob_pct[row][col] = prob_n[row][col] ? prob_sum[row][col] / prob_n[row][col] : 0.0;
            report.rank_pct[row][col] = rank_n[row][col] ? rank_sum[row][col] / rank_n[row][col] : 0.0;
        }
    }
    if (variants > 0) {
        report.mean_delta_length_pct = length_sum / variants;
        report.mean_extra_minutes = extra_m_sum / variants / geo::kWalkingSpeedMPerMin;
    }
    return report;
}

LengthTradeoff length_tradeoff(std::span<const LengthSample> samples, double cell_size_m) {
    if (!(cell_size_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "cell size must be positive");
    LengthTradeoff out;
    std::map<long, std::pair<double, int>> bins;
    int counted = 0;
    double pct_sum = 0.0;
    double extra_sum = 0.0;
    for (const LengthSample& s : samples) {
        if (!(s.shortest_m > 0.0)) continue;
        const double pct = 100.0 * (s.recommended_m - s.shortest_m) / s.shortest_m;
        pct_sum += pct;
        extra_sum += s.recommended_m - s.shortest_m;
        ++counted;
        auto& bin = bins[static_cast<long>(std::floor(s.shortest_m / 1000.0 / kLengthBinKm))];
        bin.first += pct;
        ++bin.second;
    }
    if (counted == 0) return out;
    out.mean_delta_length_pct = pct_sum / counted;
    const double extra_m = extra_sum / counted;
    out.mean_extra_cells = extra_m / cell_size_m;
    out.mean_extra_minutes = extra_m / geo::kWalkingSpeedMPerMin;
    for (const auto& [index, bin] : bins) {
        out.curve.push_back({static_cast<double>(index) * kLengthBinKm, static_cast<double>(index + 1) * kLengthBinKm,
                             bin.first / bin.second, bin.second});
    }
    return out;
}

LengthTradeoff length_tradeoff(const ImprovementReport& report, double cell_size_m) {
    std::vector<LengthSample> samples;
    for (const PairRecord& rec : report.pairs) {
        for (const VariantRecord& v : rec.recommended) samples.push_back({rec.shortest_length_m, v.length_m});
    }
    return length_tradeoff(samples, cell_size_m);
}

std::vector<QualityCorrelation> quality_correlations(std::span<const perception::QualityField> fields) {
    std::vector<QualityCorrelation> out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        for (std::size_t j = i + 1; j < fields.size(); ++j) {
            out.push_back({fields[i].quality, fields[j].quality, stats::pearson(fields[i].raw, fields[j].raw)});
        }
    }
    return out;
}

std::vector<std::int64_t> geometric_grid(std::int64_t m_max) {
    if (m_max < 1) throw Error(ErrorCode::InvalidArgument, "m_max must be at least 1");
    std::vector<std::int64_t> grid;
    for (std::int64_t decade = 1; decade <= m_max; decade *= 10) {
        for (std::int64_t step : {1, 2, 5}) {
            if (decade * step <= m_max) grid.push_back(decade * step);
        }
        if (decade > m_max / 10) break;
    }
    return grid;
}

ExplorationCurve exploration_curve(const geo::LocationGraph& graph, const perception::QualityField& field,
                                   std::span<const std::pair<int, int>> cell_pairs,
                                   const routing::ExplorationPolicy& policy) {
    if (policy.mvt_enabled) {
        throw Error(ErrorCode::InvalidArgument, "exploration_curve sweeps m explicitly; disable MVT");
    }
    policy.validate();
    const routing::Digraph digraph = routing::Digraph::from_location_graph(graph);
    const std::vector<std::int64_t> grid = geometric_grid(policy.m_max);

    ExplorationCurve curve;
    curve.points.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) curve.points[k].m = grid[k];
    for (auto [a, b] : cell_pairs) {
        if (a > b) std::swap(a, b);
        const auto samples = routing::explore_checkpoints(graph, digraph, field.rank, a, b, grid,
                                                          policy.simple_paths_only);
        const double base_rank = samples.front().best_avg_rank;
        const double base_len = routing::shortest_path(graph, a, b).length_m;
        std::vector<double> dr;
        std::vector<double> dl;
        for (const auto& s : samples) {
            dr.push_back(base_rank - s.best_avg_rank);
            dl.push_back(base_len > 0.0 ? 100.0 * (s.best_length_m - base_len) / base_len : 0.0);
        }
        curve.delta_rank.push_back(std::move(dr));
        curve.delta_length_pct.push_back(std::move(dl));
    }
    if (!curve.delta_rank.empty()) {
        const double n = static_cast<double>(curve.delta_rank.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            double r = 0.0;
            double l = 0.0;
            for (std::size_t p = 0; p < curve.delta_rank.size(); ++p) {
                r += curve.delta_rank[p][k];
                l += curve.delta_length_pct[p][k];
            }
            curve.points[k].mean_delta_rank = r / n;
            curve.points[k].mean_delta_length_pct = l / n;
        }
    }
    return curve;
}

}  // namespace amble::evaluation
