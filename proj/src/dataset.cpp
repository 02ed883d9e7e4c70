#include "geowise/dataset.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace geowise {

void Dataset::check() const {
    const Eigen::Index n = truth.size();
    if (estimate.size() != n) throw std::invalid_argument("truth and estimate lengths differ");
    if (geometry && static_cast<Eigen::Index>(geometry->size()) != n)
        throw std::invalid_argument("geometry length differs from row count");
    if (group && static_cast<Eigen::Index>(group->size()) != n)
        throw std::invalid_argument("group length differs from row count");
    for (const auto& [name, column] : extra)
        if (column.size() != n) throw std::invalid_argument("column '" + name + "' has the wrong length");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Dataset out;
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.truth.resize(m);
    out.estimate.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        out.truth[k] = truth[rows[k]];
        out.estimate[k] = estimate[rows[k]];
    }
    if (geometry) {
        out.geometry.emplace();
        out.geometry->reserve(rows.size());
        for (Eigen::Index r : rows) out.geometry->push_back((*geometry)[r]);
    }
    if (group) {
        out.group.emplace();
        out.group->reserve(rows.size());
        for (Eigen::Index r : rows) out.group->push_back((*group)[r]);
    }
    for (const auto& [name, column] : extra) {
        Eigen::VectorXd sub(m);
        for (Eigen::Index k = 0; k < m; ++k) sub[k] = column[rows[k]];
        out.extra.emplace_back(name, std::move(sub));
    }
    return out;
}

std::vector<GroupPartition> partition_by_group(const Dataset& data) {
    std::vector<GroupPartition> parts;
    if (!data.group) {
        GroupPartition all;
        all.rows.resize(static_cast<std::size_t>(data.n_rows()));
        for (Eigen::Index i = 0; i < data.n_rows(); ++i) all.rows[static_cast<std::size_t>(i)] = i;
        parts.push_back(std::move(all));
        return parts;
    }
    std::map<std::string, std::vector<Eigen::Index>> by_label;
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) by_label[(*data.group)[static_cast<std::size_t>(i)]].push_back(i);
    for (auto& [label, rows] : by_label) parts.push_back({label, std::move(rows)});
    return parts;
}

Point RasterGrid::cell_center(Eigen::Index row, Eigen::Index col) const {
    return {extent.xmin + (static_cast<double>(col) + 0.5) * cell_width(),
            extent.ymax - (static_cast<double>(row) + 0.5) * cell_height()};
}

void RasterGrid::check() const {
    if (!extent.is_valid()) throw std::invalid_argument("raster extent is degenerate");
    if (n_cols < 1 || n_rows < 1) throw std::invalid_argument("raster must have at least one cell");
    if (values.size() != n_cols * n_rows) throw std::invalid_argument("raster value count != ncols * nrows");
}

bool RasterGrid::same_geometry(const RasterGrid& other) const {
    return n_cols == other.n_cols && n_rows == other.n_rows && extent.xmin == other.extent.xmin &&
           extent.ymin == other.extent.ymin && extent.xmax == other.extent.xmax &&
           extent.ymax == other.extent.ymax;
}

}  // namespace geowise
