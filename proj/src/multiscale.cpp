#include "geowise/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <stdexcept>

#include "geowise/error.hpp"

namespace geowise {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> edges_from_count(double lo, double hi, Eigen::Index n) {
    std::vector<double> edges(static_cast<std::size_t>(n) + 1);
    const double step = (hi - lo) / static_cast<double>(n);
    for (Eigen::Index c = 0; c < n; ++c) edges[static_cast<std::size_t>(c)] = lo + static_cast<double>(c) * step;
    edges.back() = hi;
    return edges;
}

std::vector<double> edges_from_size(double lo, double hi, double size) {
    const double ratio = (hi - lo) / size;
    const auto n = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(ratio * (1.0 - 1e-12))));
    std::vector<double> edges(static_cast<std::size_t>(n) + 1);
    for (Eigen::Index c = 0; c <= n; ++c) edges[static_cast<std::size_t>(c)] = lo + static_cast<double>(c) * size;
    // The near-integer tolerance above may leave the last edge a rounding
    // error short of hi; the outermost cell absorbs that sliver.
    edges.back() = std::max(edges.back(), hi);
    return edges;
}

// Largest c with edges[c] <= v, treating the last edge as closed.
Eigen::Index locate(const std::vector<double>& edges, double v) {
    if (v < edges.front() || v > edges.back()) return -1;
    const auto last_cell = static_cast<Eigen::Index>(edges.size()) - 2;
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    return std::min(static_cast<Eigen::Index>(it - edges.begin()) - 1, last_cell);
}

Eigen::Index locate_regular(const RegularLayout& layout, const Point& p) {
    const Eigen::Index col = locate(layout.x_edges, p.x);
    const Eigen::Index row = locate(layout.y_edges, p.y);
    if (col < 0 || row < 0) return -1;
    return row * layout.n_cols() + col;
}

Eigen::Index locate_polygons(const std::vector<Polygon>& cells, const std::vector<std::optional<BoundingBox>>& rects,
                             const Point& p) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const bool inside = rects[c] ? (p.x >= rects[c]->xmin && p.x < rects[c]->xmax && p.y >= rects[c]->ymin &&
                                        p.y < rects[c]->ymax)
                                     : contains_half_open(cells[c], p);
        if (inside) return static_cast<Eigen::Index>(c);
    }
    // Outer boundary of the union is closed.
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (rects[c] ? rects[c]->contains(p) : contains_closed(cells[c], p)) return static_cast<Eigen::Index>(c);
    return -1;
}

MultiScaleRow undefined_row(const std::string& metric, const std::string& why) {
    MultiScaleRow row;
    row.result.metric = metric;
    row.result.estimate = kNaN;
    row.result.note = why;
    row.notes.push_back({"undefined_metric", metric + ": " + why, {}});
    return row;
}

std::vector<MultiScaleRow> evaluate_grids(const Dataset& data, const MetricSet& metrics,
                                          const std::vector<Grid>& grids,
                                          const std::vector<std::vector<std::pair<std::string, double>>>& args) {
    data.check();
    if (!data.geometry) throw InputError("multi-scale assessment needs point geometry");
    std::vector<MultiScaleRow> rows;
    for (const GroupPartition& part : partition_by_group(data)) {
        const Dataset sub = data.group ? data.subset(part.rows) : data;
        for (std::size_t g = 0; g < grids.size(); ++g) {
            const Aggregation agg = aggregate_points(sub, grids[g]);
            std::vector<double> t, e;
            for (const GridCell& cell : agg.cells)
                if (cell.truth_count > 0 && cell.estimate_count > 0) {
                    t.push_back(cell.truth_mean);
                    e.push_back(cell.estimate_mean);
                }
            const Eigen::VectorXd truth = Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
            const Eigen::VectorXd estimate =
                Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
            for (const Metric& metric : metrics.metrics()) {
                MultiScaleRow row;
                if (truth.size() == 0) {
                    row = undefined_row(metric.name, "no grid cell has both truth and estimate values");
                } else {
                    try {
                        row.result.metric = metric.name;
                        row.result.estimate = metric.fn(truth, estimate);
                    } catch (const Error& err) {
                        row = undefined_row(metric.name, err.what());
                    }
                }
                row.result.group = part.label;
                row.result.n = truth.size();
                row.grid_args = args[g];
                row.grid_index = g;
                row.grid = agg.cells;
                std::vector<Note> notes = agg.notes;
                notes.insert(notes.end(), row.notes.begin(), row.notes.end());
                row.notes = std::move(notes);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

}  // namespace

std::vector<std::pair<std::string, double>> GridSpec::args() const {
    std::vector<std::pair<std::string, double>> out;
    if (n) out.emplace_back("n", static_cast<double>(*n));
    if (cellsize) out.emplace_back("cellsize", *cellsize);
    return out;
}

Grid make_grid(const BoundingBox& bbox, const GridSpec& spec) {
    if (!bbox.is_valid()) throw std::invalid_argument("grid bounding box is degenerate");
    if (spec.n.has_value() == spec.cellsize.has_value())
        throw std::invalid_argument("grid spec needs exactly one of n or cellsize");
    RegularLayout layout;
    if (spec.n) {
        if (*spec.n < 1) throw std::invalid_argument("grid n must be at least 1");
        layout.x_edges = edges_from_count(bbox.xmin, bbox.xmax, *spec.n);
        layout.y_edges = edges_from_count(bbox.ymin, bbox.ymax, *spec.n);
    } else {
        if (!(*spec.cellsize > 0.0) || !std::isfinite(*spec.cellsize))
            throw std::invalid_argument("grid cellsize must be positive");
        layout.x_edges = edges_from_size(bbox.xmin, bbox.xmax, *spec.cellsize);
        layout.y_edges = edges_from_size(bbox.ymin, bbox.ymax, *spec.cellsize);
    }
    Grid grid;
    for (Eigen::Index r = 0; r < layout.n_rows(); ++r)
        for (Eigen::Index c = 0; c < layout.n_cols(); ++c) {
            const auto cu = static_cast<std::size_t>(c), ru = static_cast<std::size_t>(r);
            grid.cells.push_back(
                make_rectangle(layout.x_edges[cu], layout.y_edges[ru], layout.x_edges[cu + 1], layout.y_edges[ru + 1]));
        }
    grid.layout = std::move(layout);
    return grid;
}

Aggregation aggregate_points(const Dataset& data, const Grid& grid) {
    data.check();
    if (!data.geometry) throw InputError("aggregation needs point geometry");
    const std::size_t n_cells = grid.cells.size();
    std::vector<std::optional<BoundingBox>> rects(n_cells);
    if (!grid.layout)
        for (std::size_t c = 0; c < n_cells; ++c) {
            BoundingBox box;
            if (as_rectangle(grid.cells[c], box)) rects[c] = box;
        }

    Aggregation out;
    out.assignment.resize(static_cast<std::size_t>(data.n_rows()));
    std::vector<double> t_sum(n_cells, 0.0), e_sum(n_cells, 0.0);
    std::vector<Eigen::Index> t_count(n_cells, 0), e_count(n_cells, 0);
    Note outside{"outside_grid", "observations fell outside the boundaries of the grid", {}};

    for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
        const Point& p = (*data.geometry)[static_cast<std::size_t>(i)];
        const Eigen::Index cell = grid.layout ? locate_regular(*grid.layout, p) : locate_polygons(grid.cells, rects, p);
        out.assignment[static_cast<std::size_t>(i)] = cell;
        if (cell < 0) {
            outside.rows.push_back(i);
            continue;
        }
        const auto cu = static_cast<std::size_t>(cell);
        if (!std::isnan(data.truth[i])) {
            t_sum[cu] += data.truth[i];
            ++t_count[cu];
        }
        if (!std::isnan(data.estimate[i])) {
            e_sum[cu] += data.estimate[i];
            ++e_count[cu];
        }
    }

    Note unpaired{"unpaired_cells", "cells with only one of truth/estimate observed were excluded", {}};
    out.cells.reserve(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        GridCell cell;
        cell.polygon = grid.cells[c];
        cell.truth_count = t_count[c];
        cell.estimate_count = e_count[c];
        cell.truth_mean = t_count[c] > 0 ? t_sum[c] / static_cast<double>(t_count[c]) : kNaN;
        cell.estimate_mean = e_count[c] > 0 ? e_sum[c] / static_cast<double>(e_count[c]) : kNaN;
        if ((t_count[c] > 0) != (e_count[c] > 0)) unpaired.rows.push_back(static_cast<Eigen::Index>(c));
        out.cells.push_back(std::move(cell));
    }
    if (!outside.rows.empty()) {
        outside.message = std::to_string(outside.rows.size()) + " " + outside.message;
        out.notes.push_back(std::move(outside));
    }
    if (!unpaired.rows.empty()) out.notes.push_back(std::move(unpaired));
    return out;
}

MetricSet default_multiscale_metrics() { return metric_set(std::vector<std::string>{"rmse", "mae"}); }

std::vector<MultiScaleRow> multi_scale(const Dataset& data, const MetricSet& metrics,
                                       const std::vector<GridSpec>& specs) {
    if (specs.empty()) throw std::invalid_argument("multi_scale needs at least one grid spec");
    if (!data.geometry) throw InputError("multi-scale assessment needs point geometry");
    std::vector<Grid> grids;
    std::vector<std::vector<std::pair<std::string, double>>> args;
    for (const GridSpec& spec : specs) {
        grids.push_back(make_grid(spec.bbox.value_or(bbox_of(*data.geometry)), spec));
        args.push_back(spec.args());
    }
    return evaluate_grids(data, metrics, grids, args);
}

std::vector<MultiScaleRow> multi_scale(const Dataset& data, const MetricSet& metrics,
                                       const std::vector<std::vector<Polygon>>& polygons) {
    if (polygons.empty()) throw std::invalid_argument("multi_scale needs at least one grid");
    std::vector<Grid> grids;
    for (const auto& cells : polygons) {
        for (const Polygon& p : cells) validate(p);
        grids.push_back(Grid{cells, std::nullopt});
    }
    return evaluate_grids(data, metrics, grids, std::vector<std::vector<std::pair<std::string, double>>>(grids.size()));
}

Dataset raster_to_points(const RasterGrid& truth, const RasterGrid& estimate) {
    truth.check();
    estimate.check();
    if (!truth.same_geometry(estimate)) throw std::invalid_argument("truth and estimate rasters differ in geometry");
    Dataset out;
    const Eigen::Index n = truth.n_cols * truth.n_rows;
    out.truth = truth.values;
    out.estimate = estimate.values;
    out.geometry.emplace();
    out.geometry->reserve(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < truth.n_rows; ++r)
        for (Eigen::Index c = 0; c < truth.n_cols; ++c) out.geometry->push_back(truth.cell_center(r, c));
    return out;
}

std::vector<MultiScaleRow> multi_scale_raster(const RasterGrid& truth, const RasterGrid& estimate,
                                              const MetricSet& metrics, const std::vector<GridSpec>& specs) {
    const Dataset points = raster_to_points(truth, estimate);
    std::vector<GridSpec> bounded = specs;
    for (GridSpec& spec : bounded)
        if (!spec.bbox) spec.bbox = truth.extent;
    return multi_scale(points, metrics, bounded);
}

std::vector<MultiScaleRow> multi_scale_raster(const RasterGrid& truth, const RasterGrid& estimate,
                                              const MetricSet& metrics,
                                              const std::vector<std::vector<Polygon>>& grids) {
    return multi_scale(raster_to_points(truth, estimate), metrics, grids);
}

std::string grid_to_geojson(const std::vector<GridCell>& cells) {
    using nlohmann::json;
    auto number = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    json features = json::array();
    for (const GridCell& cell : cells) {
        json rings = json::array();
        for (const Ring& ring : cell.polygon.rings) {
            json coords = json::array();
            for (const Point& p : ring) coords.push_back({p.x, p.y});
            rings.push_back(std::move(coords));
        }
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(rings)}}},
                            {"properties",
                             {{"truth_mean", number(cell.truth_mean)},
                              {"truth_count", cell.truth_count},
                              {"estimate_mean", number(cell.estimate_mean)},
                              {"estimate_count", cell.estimate_count}}}});
    }
    json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
    return doc.dump(2) + "\n";
}

}  // namespace geowise
