#include "geowise/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "geowise/error.hpp"

namespace geowise {

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
    return cross(a, b, p) == 0.0 && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
           p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
    const int d1 = sign(cross(q1, q2, p1));
    const int d2 = sign(cross(q1, q2, p2));
    const int d3 = sign(cross(p1, p2, q1));
    const int d4 = sign(cross(p1, p2, q2));
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
           (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

bool crossing_parity(const Ring& ring, const Point& p) {
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

bool on_ring(const Ring& ring, const Point& p) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        if (on_segment(ring[i], ring[i + 1], p)) return true;
    return false;
}

}  // namespace

BoundingBox Polygon::bbox() const {
    BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Point& p : exterior()) {
        box.xmin = std::min(box.xmin, p.x);
        box.ymin = std::min(box.ymin, p.y);
        box.xmax = std::max(box.xmax, p.x);
        box.ymax = std::max(box.ymax, p.y);
    }
    return box;
}

void validate(const Polygon& polygon) {
    if (polygon.rings.empty()) throw InputError("polygon has no rings");
    for (std::size_t r = 0; r < polygon.rings.size(); ++r) {
        const Ring& ring = polygon.rings[r];
        if (ring.size() < 4)
            throw InputError("polygon ring " + std::to_string(r) + " has fewer than 4 vertices");
        if (!(ring.front() == ring.back()))
            throw InputError("polygon ring " + std::to_string(r) + " is not closed");
        for (const Point& p : ring)
            if (!is_finite(p)) throw InputError("polygon ring " + std::to_string(r) + " has a non-finite vertex");
    }
    const Ring& ext = polygon.exterior();
    const std::size_t edges = ext.size() - 1;
    for (std::size_t i = 0; i < edges; ++i) {
        for (std::size_t j = i + 1; j < edges; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == edges - 1);
            if (adjacent) continue;
            if (segments_intersect(ext[i], ext[i + 1], ext[j], ext[j + 1]))
                throw InputError("polygon exterior ring is self-intersecting");
        }
    }
}

Polygon make_rectangle(double xmin, double ymin, double xmax, double ymax) {
    return Polygon{{Ring{{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}, {xmin, ymin}}}};
}

bool as_rectangle(const Polygon& polygon, BoundingBox& box) {
    if (polygon.rings.size() != 1 || polygon.exterior().size() != 5) return false;
    const Ring& ring = polygon.exterior();
    const BoundingBox b = polygon.bbox();
    for (std::size_t i = 0; i < 4; ++i) {
        const Point& p = ring[i];
        const Point& q = ring[i + 1];
        if ((p.x != b.xmin && p.x != b.xmax) || (p.y != b.ymin && p.y != b.ymax)) return false;
        if (p.x != q.x && p.y != q.y) return false;
        if (p == q) return false;
        for (std::size_t j = 0; j < i; ++j)
            if (ring[j] == p) return false;
    }
    box = b;
    return true;
}

bool contains_half_open(const Polygon& polygon, const Point& p) {
    if (!crossing_parity(polygon.exterior(), p)) return false;
    for (std::size_t r = 1; r < polygon.rings.size(); ++r)
        if (crossing_parity(polygon.rings[r], p)) return false;
    return true;
}

bool contains_closed(const Polygon& polygon, const Point& p) {
    for (const Ring& ring : polygon.rings)
        if (on_ring(ring, p)) return true;
    return contains_half_open(polygon, p);
}

BoundingBox bbox_of(std::span<const Point> points) {
    BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Point& p : points) {
        box.xmin = std::min(box.xmin, p.x);
        box.ymin = std::min(box.ymin, p.y);
        box.xmax = std::max(box.xmax, p.x);
        box.ymax = std::max(box.ymax, p.y);
    }
    return box;
}

BoundingBox bbox_of(std::span<const Polygon> polygons) {
    BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Polygon& poly : polygons) {
        const BoundingBox b = poly.bbox();
        box.xmin = std::min(box.xmin, b.xmin);
        box.ymin = std::min(box.ymin, b.ymin);
        box.xmax = std::max(box.xmax, b.xmax);
        box.ymax = std::max(box.ymax, b.ymax);
    }
    return box;
}

}  // namespace geowise
