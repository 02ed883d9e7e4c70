#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geowise/agreement.hpp"
#include "geowise/dataset.hpp"
#include "geowise/geometry.hpp"

// Multi-scale assessment: aggregate truth and estimate onto grids of
// polygons, then evaluate metrics on the per-cell means.
namespace geowise {

// A regular grid request: either `n` cells per side or square cells of
// `cellsize`, over `bbox` (defaults to the data's bounding box).
struct GridSpec {
    std::optional<Eigen::Index> n;
    std::optional<double> cellsize;
    std::optional<BoundingBox> bbox;

    static GridSpec cells(Eigen::Index n) { return {n, std::nullopt, std::nullopt}; }
    static GridSpec size(double cellsize) { return {std::nullopt, cellsize, std::nullopt}; }

    // Name/value pairs describing the request, e.g. {"n", 5}.
    std::vector<std::pair<std::string, double>> args() const;
};

// Column/row edge coordinates of a regular grid; the polygons of the grid
// use exactly these values.
struct RegularLayout {
    std::vector<double> x_edges;  // n_cols + 1, increasing
    std::vector<double> y_edges;  // n_rows + 1, increasing
    Eigen::Index n_cols() const { return static_cast<Eigen::Index>(x_edges.size()) - 1; }
    Eigen::Index n_rows() const { return static_cast<Eigen::Index>(y_edges.size()) - 1; }
};

struct Grid {
    std::vector<Polygon> cells;
    std::optional<RegularLayout> layout;
};

// Cells ordered row-major starting at (xmin, ymin): index = row * n_cols + col
// with row 0 at the bottom. With `n` the cells tile the box exactly; with a
// cellsize, ceil(extent / cellsize) cells per side start at (xmin, ymin).
Grid make_grid(const BoundingBox& bbox, const GridSpec& spec);

struct GridCell {
    Polygon polygon;
    double truth_mean = 0.0;
    Eigen::Index truth_count = 0;
    double estimate_mean = 0.0;
    Eigen::Index estimate_count = 0;
};

struct Aggregation {
    std::vector<GridCell> cells;
    // Index of the containing cell per input row, −1 when outside the grid.
    std::vector<Eigen::Index> assignment;
    std::vector<Note> notes;
};

// Each point goes to exactly one cell: cells are half-open
// [xmin, xmax) × [ymin, ymax) except along the grid's outer top and right
// edges, which are closed. Points outside every cell get a "outside_grid"
// note; cells with only one of truth/estimate observed get "unpaired_cells".
Aggregation aggregate_points(const Dataset& data, const Grid& grid);

struct MultiScaleRow {
    MetricResult result;
    std::vector<std::pair<std::string, double>> grid_args;
    // Position of the grid in the request list.
    std::size_t grid_index = 0;
    std::vector<GridCell> grid;
    std::vector<Note> notes;
};

// rmse then mae.
MetricSet default_multiscale_metrics();

// Rows ordered group → grid → metric. Grids from specs without a bbox span
// the whole dataset (all groups). A metric that cannot be evaluated on a
// grid yields NaN and an "undefined_metric" note in that row.
std::vector<MultiScaleRow> multi_scale(const Dataset& data, const MetricSet& metrics,
                                       const std::vector<GridSpec>& specs);
std::vector<MultiScaleRow> multi_scale(const Dataset& data, const MetricSet& metrics,
                                       const std::vector<std::vector<Polygon>>& grids);

// Raster cells become points at their centres carrying the cell value; the
// assessment grids default to the raster extent.
Dataset raster_to_points(const RasterGrid& truth, const RasterGrid& estimate);
std::vector<MultiScaleRow> multi_scale_raster(const RasterGrid& truth, const RasterGrid& estimate,
                                              const MetricSet& metrics, const std::vector<GridSpec>& specs);
std::vector<MultiScaleRow> multi_scale_raster(const RasterGrid& truth, const RasterGrid& estimate,
                                              const MetricSet& metrics,
                                              const std::vector<std::vector<Polygon>>& grids);

// FeatureCollection of cell polygons with truth_mean, truth_count,
// estimate_mean and estimate_count properties (null means for empty cells).
std::string grid_to_geojson(const std::vector<GridCell>& cells);

}  // namespace geowise
