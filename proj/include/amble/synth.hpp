#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "amble/evaluation.hpp"
#include "amble/flickr_proxy.hpp"
#include "amble/geo_grid.hpp"
#include "amble/perception.hpp"

// Seeded synthetic inputs with known structure: smooth background scores plus
// bands of pleasant cells that run beside, not along, typical shortest routes.
namespace amble::synth {

/// Central London box that tiles to 19 x 28 cells of 200 m.
geo::BoundingBox london_bbox();

/// Twenty well-known central London sites, each in its own cell of london_bbox().
std::vector<evaluation::Landmark> london_landmarks();

/// A straight band of width sigma_m around the segment a-b (projected metres).
struct Corridor {
    geo::PointM a;
    geo::PointM b;
    double sigma_m = 150.0;
    double boost = 0.5;
};

/// Latent pleasantness in [0, 1] over the projected plane.
struct LatentField {
    double base = 0.3;
    double wave_amplitude = 0.1;
    double wave_phase_x = 0.0;
    double wave_phase_y = 0.0;
    double wavelength_m = 1500.0;
    std::vector<Corridor> corridors;

    double at(geo::PointM p) const;
};

/// One latent field per quality. Corridors are laid out relative to the grid
/// extent, so any box works.
std::array<LatentField, 3> demo_latent(const geo::GridSpec& spec, std::uint64_t seed);

struct DemoInputs {
    std::vector<perception::Scene> scenes;
    std::vector<perception::VoteRecord> votes;
    std::vector<flickr::PhotoMeta> photos;
};

struct DemoOptions {
    int scenes_per_cell_x10 = 12;
    int votes_per_scene = 24;
    double tie_share = 0.1;
    /// Logistic sharpness of a vote given the latent difference.
    double vote_sharpness = 8.0;
    int photos_per_cell = 6;
};

/// Scenes at random points, pairwise votes drawn from the latent fields, and
/// photos whose tags lean positive in beautiful cells. Deterministic in seed.
DemoInputs make_demo_inputs(const geo::LocationGraph& graph, std::uint64_t seed, const DemoOptions& options = {});

/// Raw per-cell field sampled at the centroids, for direct use without votes.
std::vector<double> sample_latent(const geo::LocationGraph& graph, const LatentField& field);

}  // namespace amble::synth
