#include "amble/geo_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "amble/error.hpp"

namespace amble::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Relative slack when deciding whether an extent is an exact multiple of the
// cell size; degree round trips lose a few ulps.
constexpr double kTilingSlack = 1e-9;

double meters_per_degree_lat() { return kEarthRadiusM * kDegToRad; }

double meters_per_degree_lon(double at_lat) {
    return kEarthRadiusM * std::cos(at_lat * kDegToRad) * kDegToRad;
}

int tiles_needed(double extent_m, double cell_size_m) {
    return std::max(1, static_cast<int>(std::ceil(extent_m / cell_size_m - kTilingSlack)));
}

// x / cell with values a hair below an integer snapped onto it, so points
// reconstructed from tile corners land on the higher tile.
int tile_index(double coord_m, double cell_size_m, int count) {
    double f = coord_m / cell_size_m;
    const double nearest = std::round(f);
    if (std::abs(f - nearest) < kTilingSlack) {
        f = nearest;
    }
    return std::clamp(static_cast<int>(std::floor(f)), 0, count - 1);
}

}  // namespace

void BoundingBox::validate() const {
    const bool finite = std::isfinite(min_lat) && std::isfinite(min_lon) &&
                        std::isfinite(max_lat) && std::isfinite(max_lon);
    if (!finite) {
        throw Error(ErrorCode::InvalidArgument, "bounding box has non-finite coordinates");
    }
    if (!(min_lat < max_lat) || !(min_lon < max_lon)) {
        throw Error(ErrorCode::DegenerateBox, "bounding box has zero or negative area");
    }
    if (max_lat - min_lat >= 2.0 || max_lon - min_lon >= 2.0) {
        throw Error(ErrorCode::InvalidArgument, "bounding box spans 2 degrees or more");
    }
    if (min_lat < -89.0 || max_lat > 89.0) {
        throw Error(ErrorCode::InvalidArgument, "bounding box too close to a pole");
    }
}

bool BoundingBox::contains(LatLon p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
}

PointM project(const BoundingBox& bbox, LatLon p) {
    if (!bbox.contains(p)) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "point (" << p.lat << ", " << p.lon << ") is outside the bounding box";
        throw Error(ErrorCode::OutOfBounds, msg.str());
    }
    return {kEarthRadiusM * (p.lon - bbox.min_lon) * std::cos(bbox.mid_lat() * kDegToRad) * kDegToRad,
            kEarthRadiusM * (p.lat - bbox.min_lat) * kDegToRad};
}

LatLon unproject(const BoundingBox& bbox, PointM p) {
    return {bbox.min_lat + p.y_m / meters_per_degree_lat(),
            bbox.min_lon + p.x_m / meters_per_degree_lon(bbox.mid_lat())};
}

Grid build_grid(const BoundingBox& bbox, double cell_size_m) {
    bbox.validate();
    if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) {
        throw Error(ErrorCode::InvalidArgument, "cell size must be positive");
    }

    const double height_m = (bbox.max_lat - bbox.min_lat) * meters_per_degree_lat();
    const int rows = tiles_needed(height_m, cell_size_m);

    // Latitude extent first: it fixes the mid latitude and hence the x scale.
    BoundingBox snapped = bbox;
    snapped.max_lat = bbox.min_lat + rows * cell_size_m / meters_per_degree_lat();
    const double width_m = (bbox.max_lon - bbox.min_lon) * meters_per_degree_lon(snapped.mid_lat());
    const int cols = tiles_needed(width_m, cell_size_m);
    snapped.max_lon = bbox.min_lon + cols * cell_size_m / meters_per_degree_lon(snapped.mid_lat());
    snapped.validate();

    Grid grid;
    grid.spec = GridSpec{snapped, cell_size_m, rows, cols};
    grid.cells.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            Cell cell;
            cell.id = row * cols + col;
            cell.row = row;
            cell.col = col;
            cell.centroid_m = {(col + 0.5) * cell_size_m, (row + 0.5) * cell_size_m};
            cell.centroid = unproject(snapped, cell.centroid_m);
            grid.cells.push_back(cell);
        }
    }
    return grid;
}

double centroid_distance(const Cell& a, const Cell& b) {
    return std::hypot(a.centroid_m.x_m - b.centroid_m.x_m, a.centroid_m.y_m - b.centroid_m.y_m);
}

LocationGraph::LocationGraph(GridSpec spec, std::vector<Cell> cells,
                             std::vector<std::vector<Edge>> adjacency)
    : spec_(spec), cells_(std::move(cells)), adjacency_(std::move(adjacency)) {
    if (adjacency_.size() != cells_.size()) {
        throw Error(ErrorCode::InvalidArgument, "adjacency size does not match cell count");
    }
}

double LocationGraph::edge_length(int u, int v) const {
    for (const Edge& e : neighbors(u)) {
        if (e.to == v) {
            return e.length_m;
        }
    }
    return -1.0;
}

LocationGraph build_graph(const Grid& grid) {
    const GridSpec& spec = grid.spec;
    const int n = spec.cell_count();
    if (n < 9) {
        throw Error(ErrorCode::GraphTooSmall,
                    "graph needs at least 9 cells to give every cell 8 neighbours, got " +
                        std::to_string(n));
    }

    std::vector<std::vector<int>> links(static_cast<std::size_t>(n));
    for (const Cell& cell : grid.cells) {
        auto& out = links[static_cast<std::size_t>(cell.id)];
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                const int r = cell.row + dr;
                const int c = cell.col + dc;
                if ((dr == 0 && dc == 0) || r < 0 || c < 0 || r >= spec.rows || c >= spec.cols) {
                    continue;
                }
                out.push_back(r * spec.cols + c);
            }
        }
        if (out.size() >= 8) {
            continue;
        }

        std::vector<std::pair<double, int>> candidates;
        for (const Cell& other : grid.cells) {
            if (other.id == cell.id || std::find(out.begin(), out.end(), other.id) != out.end()) {
                continue;
            }
            candidates.emplace_back(centroid_distance(cell, other), other.id);
        }
        const auto missing = static_cast<std::ptrdiff_t>(8 - out.size());
        std::partial_sort(candidates.begin(), candidates.begin() + missing, candidates.end());
        for (std::ptrdiff_t i = 0; i < missing; ++i) {
            out.push_back(candidates[static_cast<std::size_t>(i)].second);
        }
    }

    // Mirror augmented links.
    for (int u = 0; u < n; ++u) {
        for (int v : links[static_cast<std::size_t>(u)]) {
            auto& back = links[static_cast<std::size_t>(v)];
            if (std::find(back.begin(), back.end(), u) == back.end()) {
                back.push_back(u);
            }
        }
    }

    std::vector<std::vector<Edge>> adjacency(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) {
        auto& ids = links[static_cast<std::size_t>(u)];
        std::sort(ids.begin(), ids.end());
        auto& out = adjacency[static_cast<std::size_t>(u)];
        out.reserve(ids.size());
        for (int v : ids) {
            out.push_back({v, centroid_distance(grid.cells[static_cast<std::size_t>(u)],
                                                grid.cells[static_cast<std::size_t>(v)])});
        }
    }
    return LocationGraph(spec, grid.cells, std::move(adjacency));
}

int cell_of(const GridSpec& spec, LatLon p) {
    const PointM xy = project(spec.bbox, p);
    const int col = tile_index(xy.x_m, spec.cell_size_m, spec.cols);
    const int row = tile_index(xy.y_m, spec.cell_size_m, spec.rows);
    return row * spec.cols + col;
}

}  // namespace amble::geo
