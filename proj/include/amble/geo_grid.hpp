#pragma once

#include <cstddef>
#include <vector>

namespace amble::geo {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDefaultCellSizeM = 200.0;
/// 200 m covered by a 2.5 minute walk.
inline constexpr double kWalkingSpeedMPerMin = 80.0;

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

struct PointM {
    double x_m = 0.0;
    double y_m = 0.0;
};

/// WGS84 box at city scale. Spans must stay under 2 degrees so the local
/// equirectangular projection is usable.
struct BoundingBox {
    double min_lat = 0.0;
    double min_lon = 0.0;
    double max_lat = 0.0;
    double max_lon = 0.0;

    /// Throws DegenerateBox / InvalidArgument.
    void validate() const;
    bool contains(LatLon p) const;
    double mid_lat() const { return 0.5 * (min_lat + max_lat); }
};

/// Equirectangular projection relative to the south-west corner, scaled by
/// cos(mid latitude). Throws OutOfBounds for points outside the box.
PointM project(const BoundingBox& bbox, LatLon p);
/// Inverse of project(); does not check bounds.
LatLon unproject(const BoundingBox& bbox, PointM p);

struct GridSpec {
    BoundingBox bbox;
    double cell_size_m = kDefaultCellSizeM;
    int rows = 0;
    int cols = 0;

    int cell_count() const { return rows * cols; }
};

struct Cell {
    int id = 0;
    int row = 0;
    int col = 0;
    LatLon centroid;
    PointM centroid_m;
};

struct Grid {
    GridSpec spec;
    std::vector<Cell> cells;
};

/// Tiles the box row-major from its south-west corner. Row 0 is the southern
/// row. When the box is not an exact multiple of the cell size, the north and
/// east edges are pushed outward so the stored box is tiled exactly and every
/// centroid stays inside it.
Grid build_grid(const BoundingBox& bbox, double cell_size_m = kDefaultCellSizeM);

struct Edge {
    int to = 0;
    double length_m = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

class LocationGraph {
public:
    LocationGraph() = default;
    LocationGraph(GridSpec spec, std::vector<Cell> cells, std::vector<std::vector<Edge>> adjacency);

    const GridSpec& spec() const { return spec_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const Cell& cell(int id) const { return cells_.at(static_cast<std::size_t>(id)); }
    const std::vector<Edge>& neighbors(int id) const { return adjacency_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::vector<Edge>>& adjacency() const { return adjacency_; }
    int size() const { return static_cast<int>(cells_.size()); }
    bool valid_cell(int id) const { return id >= 0 && id < size(); }

    /// Length of the edge u -> v, or a negative value when they are not linked.
    double edge_length(int u, int v) const;

private:
    GridSpec spec_;
    std::vector<Cell> cells_;
    std::vector<std::vector<Edge>> adjacency_;
};

/// Links every cell to its 8 geometric neighbours. Boundary cells are topped
/// up to 8 with their closest non-adjacent cells (centroid distance, ties by
/// ascending id) and every augmented link is mirrored, so a few cells end up
/// with more than 8 neighbours. Throws GraphTooSmall below 9 cells.
LocationGraph build_graph(const Grid& grid);

/// Cell whose tile contains the point. Points on a shared tile border belong
/// to the higher row/col. Throws OutOfBounds.
int cell_of(const GridSpec& spec, LatLon p);
inline int cell_of(const LocationGraph& graph, LatLon p) { return cell_of(graph.spec(), p); }

/// Planar distance between two cell centroids.
double centroid_distance(const Cell& a, const Cell& b);

}  // namespace amble::geo
