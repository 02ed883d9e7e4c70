#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "geowise/geometry.hpp"

namespace geowise {

// Per-observation neighbour indices (0-based, no self-neighbours).
struct NeighborList {
    std::vector<std::vector<Eigen::Index>> neighbors;
    bool symmetric_hint = false;

    Eigen::Index size() const { return static_cast<Eigen::Index>(neighbors.size()); }
    // Throws std::invalid_argument on self-neighbours or out-of-range indices.
    void check() const;
};

enum class WeightsStyle {
    RowStandardized,  // w_ij = 1 / |N(i)|
    Binary,           // w_ij = 1
    Custom,           // imported weights that fit neither convention
};

// Sparse spatial weights; row i holds (j, w_ij) for each neighbour j.
struct WeightsMatrix {
    Eigen::SparseMatrix<double, Eigen::RowMajor> w;
    WeightsStyle style = WeightsStyle::RowStandardized;

    Eigen::Index size() const { return w.rows(); }
    double total() const { return w.sum(); }
    Eigen::Index row_count(Eigen::Index i) const { return w.outerIndexPtr()[i + 1] - w.outerIndexPtr()[i]; }
    Eigen::Index nonempty_rows() const;
};

// k nearest neighbours by planar Euclidean distance, sorted by distance then
// index. Requires more than k points.
NeighborList build_neighbors_points(std::span<const Point> points, Eigen::Index k = 1);

// Polygons are neighbours when they have vertices whose coordinates each
// differ by at most `epsilon` (default: 1e-9 times the diagonal of the
// layer's bounding box). Point-on-segment contact without a
// shared vertex is not detected.
NeighborList build_neighbors_polygons(std::span<const Polygon> polygons, double epsilon = 0.0);

struct WeightsOptions {
    WeightsStyle style = WeightsStyle::RowStandardized;
    // Emit an all-zero row for observations without neighbours instead of
    // raising ComputationError.
    bool allow_empty = false;
};

WeightsMatrix build_weights(const NeighborList& neighbors, WeightsOptions options = {});

NeighborList neighbors_of(const WeightsMatrix& weights);

// Three-column "i,j,w" CSV, one line per stored entry in row-major order.
void write_weights_csv(std::ostream& os, const WeightsMatrix& weights);
// `n` is the observation count; rows without entries are empty. The style is
// inferred: all weights 1 -> Binary, non-empty rows summing to 1 (1e-12) ->
// RowStandardized, otherwise Custom.
WeightsMatrix parse_weights_csv(const std::string& text, Eigen::Index n);
WeightsMatrix read_weights_csv(const std::string& path, Eigen::Index n);

}  // namespace geowise
