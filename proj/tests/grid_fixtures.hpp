#pragma once

#include <cmath>
#include <numbers>

#include "amble/geo_grid.hpp"

namespace amble::testing {

/// Box of roughly height_m x width_m metres with its south-west corner at
/// (lat0, lon0), sized with the same local projection the grid uses.
inline geo::BoundingBox box_of_meters(double lat0, double lon0, double height_m, double width_m) {
    const double deg = std::numbers::pi / 180.0;
    const double max_lat = lat0 + height_m / (geo::kEarthRadiusM * deg);
    const double mid = 0.5 * (lat0 + max_lat);
    const double max_lon = lon0 + width_m / (geo::kEarthRadiusM * std::cos(mid * deg) * deg);
    return {lat0, lon0, max_lat, max_lon};
}

/// rows x cols grid of 200 m cells anchored in central London.
inline geo::LocationGraph london_grid(int rows, int cols) {
    const auto box = box_of_meters(51.5, -0.13, rows * 200.0, cols * 200.0);
    return geo::build_graph(geo::build_grid(box, 200.0));
}

}  // namespace amble::testing
