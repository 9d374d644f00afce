#include "amble/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "amble/error.hpp"

namespace amble::synth {

namespace {

using perception::Quality;

constexpr std::array kPositiveTags = {"beautiful", "lovely", "happy", "pretty", "sunny",
                                      "peaceful", "charming", "wonderful", "love", "delightful"};
constexpr std::array kNegativeTags = {"ugly", "awful", "hate", "damn", "scary",
                                      "sad", "angry", "dirty", "gloomy", "nervous"};
constexpr std::array kNeutralTags = {"london", "street", "building", "bus", "uk",
                                     "city", "architecture", "england", "road", "shop"};
constexpr std::array kStopTags = {"the", "a", "of", "and"};

double segment_distance(geo::PointM p, geo::PointM a, geo::PointM b) {
    const double dx = b.x_m - a.x_m;
    const double dy = b.y_m - a.y_m;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((p.x_m - a.x_m) * dx + (p.y_m - a.y_m) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x_m - (a.x_m + t * dx), p.y_m - (a.y_m + t * dy));
}

geo::PointM random_point(std::mt19937_64& rng, const geo::GridSpec& spec) {
    std::uniform_real_distribution<double> x(0.0, spec.cols * spec.cell_size_m);
    std::uniform_real_distribution<double> y(0.0, spec.rows * spec.cell_size_m);
    return {x(rng), y(rng)};
}

}  // namespace

geo::BoundingBox london_bbox() { return {51.4975, -0.1555, 51.5316, -0.0750}; }

std::vector<evaluation::Landmark> london_landmarks() {
    return {
        {"Euston Square", {51.5257, -0.1359}, -1},    {"Tate Modern", {51.5076, -0.0994}, -1},
        {"British Museum", {51.5194, -0.1270}, -1},   {"Trafalgar Square", {51.5080, -0.1281}, -1},
        {"St Paul's Cathedral", {51.5138, -0.0984}, -1}, {"Covent Garden", {51.5117, -0.1240}, -1},
        {"Buckingham Palace", {51.5014, -0.1419}, -1}, {"Westminster Abbey", {51.4993, -0.1273}, -1},
        {"Big Ben", {51.5007, -0.1246}, -1},          {"London Eye", {51.5033, -0.1196}, -1},
        {"King's Cross", {51.5308, -0.1238}, -1},     {"Piccadilly Circus", {51.5100, -0.1347}, -1},
        {"Oxford Circus", {51.5152, -0.1418}, -1},    {"Leicester Square", {51.5103, -0.1301}, -1},
        {"Somerset House", {51.5111, -0.1174}, -1},   {"Borough Market", {51.5055, -0.0910}, -1},
        {"Tower of London", {51.5081, -0.0759}, -1},  {"Barbican Centre", {51.5202, -0.0938}, -1},
        {"Hyde Park Corner", {51.5027, -0.1527}, -1}, {"Liverpool Street", {51.5178, -0.0823}, -1},
    };
}

double LatentField::at(geo::PointM p) const {
    const double k = 2.0 * std::numbers::pi / wavelength_m;
    double v = base + wave_amplitude * std::sin(k * p.x_m + wave_phase_x) * std::cos(k * p.y_m + wave_phase_y);
    for (const Corridor& c : corridors) {
        const double d = segment_distance(p, c.a, c.b);
        v += c.boost * std::exp(-d * d / (2.0 * c.sigma_m * c.sigma_m));
    }
    return std::clamp(v, 0.0, 1.0);
}

std::array<LatentField, 3> demo_latent(const geo::GridSpec& spec, std::uint64_t seed) {
    const double w = spec.cols * spec.cell_size_m;
    const double h = spec.rows * spec.cell_size_m;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const auto at = [&](double fx, double fy) { return geo::PointM{fx * w, fy * h}; };

    std::array<LatentField, 3> f;
    for (LatentField& field : f) {
        field.wave_phase_x = phase(rng);
        field.wave_phase_y = phase(rng);
    }
    auto& beauty = f[static_cast<std::size_t>(Quality::Beauty)];
    beauty.corridors = {{at(0.05, 0.30), at(0.95, 0.42), 160.0, 0.55}, {at(0.30, 0.95), at(0.38, 0.08), 140.0, 0.45}};
    auto& quiet = f[static_cast<std::size_t>(Quality::Quiet)];
    quiet.corridors = {{at(0.10, 0.78), at(0.90, 0.66), 160.0, 0.5}, {at(0.12, 0.30), at(0.20, 0.40), 260.0, 0.45}};
    auto& happy = f[static_cast<std::size_t>(Quality::Happy)];
    happy.corridors = {{at(0.62, 0.95), at(0.55, 0.05), 150.0, 0.5}, {at(0.05, 0.30), at(0.95, 0.42), 160.0, 0.3}};
    return f;
}

std::vector<double> sample_latent(const geo::LocationGraph& graph, const LatentField& field) {
    std::vector<double> raw;
    raw.reserve(static_cast<std::size_t>(graph.size()));
    for (const geo::Cell& c : graph.cells()) raw.push_back(field.at(c.centroid_m));
    return raw;
}

DemoInputs make_demo_inputs(const geo::LocationGraph& graph, std::uint64_t seed, const DemoOptions& options) {
    if (options.scenes_per_cell_x10 < 1 || options.votes_per_scene < 1 || options.photos_per_cell < 0) {
        throw Error(ErrorCode::InvalidArgument, "synthetic fixture sizes must be positive");
    }
    const geo::GridSpec& spec = graph.spec();
    const auto latent = demo_latent(spec, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    DemoInputs out;

    const int n_scenes = std::max(2, graph.size() * options.scenes_per_cell_x10 / 10);
    std::vector<geo::PointM> where;
    std::bernoulli_distribution geograph(0.55);
    for (int i = 0; i < n_scenes; ++i) {
        const geo::PointM p = random_point(rng, spec);
        where.push_back(p);
        char id[16];
        std::snprintf(id, sizeof id, "s%05d", i);
        out.scenes.push_back({id, geo::unproject(spec.bbox, p),
                              geograph(rng) ? perception::SceneSource::Geograph
                                            : perception::SceneSource::StreetView});
    }

    std::uniform_int_distribution<int> pick(0, n_scenes - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n_votes = n_scenes * options.votes_per_scene / 2;
    for (Quality q : perception::kAllQualities) {
        const LatentField& field = latent[static_cast<std::size_t>(q)];
        for (int v = 0; v < n_votes; ++v) {
            const int a = pick(rng);
            int b = pick(rng);
            while (b == a) b = pick(rng);
            const double diff = field.at(where[static_cast<std::size_t>(a)]) - field.at(where[static_cast<std::size_t>(b)]);
            perception::Outcome o;
            if (unit(rng) < options.tie_share) {
                o = perception::Outcome::Tie;
            } else {
                const double p_a = 1.0 / (1.0 + std::exp(-options.vote_sharpness * diff));
                o = unit(rng) < p_a ? perception::Outcome::A : perception::Outcome::B;
            }
            out.votes.push_back({q, out.scenes[static_cast<std::size_t>(a)].scene_id,
                                 out.scenes[static_cast<std::size_t>(b)].scene_id, o});
        }
    }

    const LatentField& beauty = latent[static_cast<std::size_t>(Quality::Beauty)];
    int photo_id = 0;
    for (const geo::Cell& cell : graph.cells()) {
        const double b = beauty.at(cell.centroid_m);
        std::poisson_distribution<int> count(options.photos_per_cell * (0.4 + b));
        const int n = count(rng);
        for (int k = 0; k < n; ++k) {
            flickr::PhotoMeta photo;
            char id[16];
            std::snprintf(id, sizeof id, "p%06d", photo_id++);
            photo.photo_id = id;
            std::uniform_real_distribution<double> jitter(-0.45 * spec.cell_size_m, 0.45 * spec.cell_size_m);
            photo.location =
                geo::unproject(spec.bbox, {cell.centroid_m.x_m + jitter(rng), cell.centroid_m.y_m + jitter(rng)});
            std::geometric_distribution<int> views(0.01);
            photo.n_views = views(rng);
            photo.n_favorites = photo.n_views / 25;
            photo.n_comments = photo.n_views / 60;
            const int n_tags = 3 + static_cast<int>(rng() % 5);
            for (int t = 0; t < n_tags; ++t) {
                const double u = unit(rng);
                const auto draw = [&](const auto& list) { return std::string(list[rng() % list.size()]); };
                if (u < 0.45 * b) {
                    photo.tags.push_back(draw(kPositiveTags));
                } else if (u < 0.45 * b + 0.35 * (1.0 - b)) {
                    photo.tags.push_back(draw(kNegativeTags));
                } else if (u < 0.9) {
                    photo.tags.push_back(draw(kNeutralTags));
                } else {
                    photo.tags.push_back(draw(kStopTags));
                }
            }
            out.photos.push_back(std::move(photo));
        }
    }
    return out;
}

}  // namespace amble::synth
