#include "geowise/weights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "geowise/error.hpp"
#include "geowise/io.hpp"
#include "geowise/nearest.hpp"
#include "geowise/numeric_format.hpp"
#include "geowise/parallel.hpp"

namespace geowise {

void NeighborList::check() const {
    const Eigen::Index n = size();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j : neighbors[static_cast<std::size_t>(i)]) {
            if (j == i) throw std::invalid_argument("neighbour list contains a self-neighbour at " + std::to_string(i));
            if (j < 0 || j >= n) throw std::invalid_argument("neighbour index out of range at " + std::to_string(i));
        }
}

Eigen::Index WeightsMatrix::nonempty_rows() const {
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        if (row_count(i) > 0) ++count;
    return count;
}

NeighborList build_neighbors_points(std::span<const Point> points, Eigen::Index k) {
    const auto n = static_cast<Eigen::Index>(points.size());
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (n <= k) throw std::invalid_argument("need more than k points to find k neighbours");
    KdTree<double>::Matrix coords(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point& p = points[static_cast<std::size_t>(i)];
        if (!is_finite(p)) throw std::invalid_argument("non-finite coordinate at row " + std::to_string(i));
        coords(i, 0) = p.x;
        coords(i, 1) = p.y;
    }
    const KdTree<double> tree(std::move(coords));
    NeighborList out;
    out.neighbors.resize(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            const auto hits = tree.knn(tree.points().row(row), k, row);
            auto& list = out.neighbors[i];
            list.reserve(hits.size());
            for (const auto& h : hits) list.push_back(h.index);
        }
    });
    return out;
}

NeighborList build_neighbors_polygons(std::span<const Polygon> polygons, double epsilon) {
    if (polygons.size() < 2) throw std::invalid_argument("need at least 2 polygons");
    for (const Polygon& p : polygons) validate(p);
    if (epsilon <= 0.0) {
        const BoundingBox box = bbox_of(polygons);
        const double diagonal = std::hypot(box.width(), box.height());
        epsilon = diagonal > 0.0 ? diagonal * 1e-9 : 1e-9;
    }
    // Vertices match when both coordinates differ by at most epsilon. Buckets
    // of side epsilon hold the vertices; a match can only lie in the same or
    // an adjacent bucket.
    using Key = std::pair<long long, long long>;
    struct Vertex {
        Point p;
        Eigen::Index owner;
    };
    std::map<Key, std::vector<Vertex>> buckets;
    for (std::size_t i = 0; i < polygons.size(); ++i)
        for (const Ring& ring : polygons[i].rings)
            for (const Point& p : ring)
                buckets[{static_cast<long long>(std::floor(p.x / epsilon)),
                         static_cast<long long>(std::floor(p.y / epsilon))}]
                    .push_back({p, static_cast<Eigen::Index>(i)});
    std::vector<std::set<Eigen::Index>> adjacency(polygons.size());
    for (const auto& [key, here] : buckets)
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = buckets.find({key.first + dx, key.second + dy});
                if (it == buckets.end()) continue;
                for (const Vertex& a : here)
                    for (const Vertex& b : it->second)
                        if (a.owner != b.owner && std::abs(a.p.x - b.p.x) <= epsilon &&
                            std::abs(a.p.y - b.p.y) <= epsilon)
                            adjacency[static_cast<std::size_t>(a.owner)].insert(b.owner);
            }
    NeighborList out;
    out.symmetric_hint = true;
    for (const auto& set : adjacency) out.neighbors.emplace_back(set.begin(), set.end());
    return out;
}

WeightsMatrix build_weights(const NeighborList& neighbors, WeightsOptions options) {
    neighbors.check();
    if (options.style == WeightsStyle::Custom) throw std::invalid_argument("cannot build Custom-style weights");
    const Eigen::Index n = neighbors.size();
    std::vector<Eigen::Triplet<double>> entries;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& list = neighbors.neighbors[static_cast<std::size_t>(i)];
        if (list.empty()) {
            if (!options.allow_empty)
                throw ComputationError("observation " + std::to_string(i) +
                                       " has no neighbours (enable allow_empty to keep an empty row)");
            continue;
        }
        const double value = options.style == WeightsStyle::Binary ? 1.0 : 1.0 / static_cast<double>(list.size());
        for (Eigen::Index j : list) entries.emplace_back(i, j, value);
    }
    WeightsMatrix out;
    out.style = options.style;
    out.w.resize(n, n);
    out.w.setFromTriplets(entries.begin(), entries.end());
    out.w.makeCompressed();
    return out;
}

NeighborList neighbors_of(const WeightsMatrix& weights) {
    NeighborList out;
    out.neighbors.resize(static_cast<std::size_t>(weights.size()));
    for (Eigen::Index i = 0; i < weights.w.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(weights.w, i); it; ++it)
            out.neighbors[static_cast<std::size_t>(i)].push_back(it.col());
    return out;
}

void write_weights_csv(std::ostream& os, const WeightsMatrix& weights) {
    os << "i,j,w\n";
    for (Eigen::Index i = 0; i < weights.w.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(weights.w, i); it; ++it)
            os << it.row() << ',' << it.col() << ',' << format_double(it.value()) << '\n';
}

WeightsMatrix parse_weights_csv(const std::string& text, Eigen::Index n) {
    const CsvTable table = parse_csv(text);
    const std::size_t ci = table.column("i"), cj = table.column("j"), cw = table.column("w");
    std::vector<Eigen::Triplet<double>> entries;
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto i = parse_double(row[ci]), j = parse_double(row[cj]), w = parse_double(row[cw]);
        const std::string where = "weights CSV row " + std::to_string(r + 1);
        if (!i || !j || !w || !std::isfinite(*w)) throw InputError(where + ": non-numeric field");
        if (*w < 0.0) throw InputError(where + ": negative weight");
        const auto ii = static_cast<Eigen::Index>(*i), jj = static_cast<Eigen::Index>(*j);
        if (static_cast<double>(ii) != *i || static_cast<double>(jj) != *j || ii < 0 || jj < 0 || ii >= n || jj >= n)
            throw InputError(where + ": index out of range for " + std::to_string(n) + " observations");
        if (ii == jj) throw InputError(where + ": self-neighbour");
        if (!seen.insert({ii, jj}).second) throw InputError(where + ": duplicate entry");
        entries.emplace_back(ii, jj, *w);
    }
    WeightsMatrix out;
    out.w.resize(n, n);
    out.w.setFromTriplets(entries.begin(), entries.end());
    out.w.makeCompressed();

    bool binary = true, standardized = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(out.w, i); it; ++it) {
            row_sum += it.value();
            if (it.value() != 1.0) binary = false;
        }
        if (out.row_count(i) > 0 && std::abs(row_sum - 1.0) > 1e-12) standardized = false;
    }
    out.style = binary ? WeightsStyle::Binary : standardized ? WeightsStyle::RowStandardized : WeightsStyle::Custom;
    if (binary && standardized && entries.size() == static_cast<std::size_t>(out.nonempty_rows()))
        out.style = WeightsStyle::RowStandardized;
    return out;
}

WeightsMatrix read_weights_csv(const std::string& path, Eigen::Index n) {
    return parse_weights_csv(read_text_file(path), n);
}

}  // namespace geowise
