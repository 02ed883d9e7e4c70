#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geowise/geometry.hpp"

namespace geowise {

// Columnar observations: a truth column, an estimate column, optional point
// geometry, an optional group label and any number of extra numeric columns.
// Missing values are NaN and are carried, never dropped.
struct Dataset {
    Eigen::VectorXd truth;
    Eigen::VectorXd estimate;
    std::optional<std::vector<Point>> geometry;
    std::optional<std::vector<std::string>> group;
    std::vector<std::pair<std::string, Eigen::VectorXd>> extra;

    Eigen::Index n_rows() const { return truth.size(); }
    bool has_geometry() const { return geometry.has_value(); }
    bool is_grouped() const { return group.has_value(); }

    // Throws std::invalid_argument if column lengths disagree.
    void check() const;

    // Rows selected by index, in the order given.
    Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

// Group labels in sorted order with the rows belonging to each (rows kept in
// input order). An ungrouped dataset yields one unlabeled partition.
struct GroupPartition {
    std::optional<std::string> label;
    std::vector<Eigen::Index> rows;
};
std::vector<GroupPartition> partition_by_group(const Dataset& data);

// Shared result shape of every metric.
struct MetricResult {
    std::string metric;
    std::string estimator = "standard";
    double estimate = 0.0;
    std::optional<std::string> group;
    // Complete pairs that entered the computation.
    Eigen::Index n = 0;
    // Diagnostic text; empty when nothing noteworthy happened.
    std::string note;
};

// Diagnostic record attached to multi-scale rows and local statistics.
struct Note {
    std::string kind;
    std::string message;
    std::vector<Eigen::Index> rows;
};

// Regular raster with row-major values; row 0 is the top (ymax) row.
struct RasterGrid {
    Eigen::Index n_cols = 0;
    Eigen::Index n_rows = 0;
    BoundingBox extent;
    Eigen::VectorXd values;

    double cell_width() const { return extent.width() / static_cast<double>(n_cols); }
    double cell_height() const { return extent.height() / static_cast<double>(n_rows); }
    double at(Eigen::Index row, Eigen::Index col) const { return values[row * n_cols + col]; }
    Point cell_center(Eigen::Index row, Eigen::Index col) const;

    // Throws std::invalid_argument on a degenerate extent or wrong value count.
    void check() const;
    bool same_geometry(const RasterGrid& other) const;
};

}  // namespace geowise
