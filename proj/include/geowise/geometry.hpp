#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace geowise {

// Planar coordinates; no CRS handling is performed anywhere in the library.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline bool is_finite(const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

using Ring = std::vector<Point>;

struct BoundingBox {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool is_valid() const { return xmin < xmax && ymin < ymax; }
    bool contains(const Point& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

// First ring is the exterior, the rest are holes. Every ring is closed.
struct Polygon {
    std::vector<Ring> rings;

    const Ring& exterior() const { return rings.front(); }
    BoundingBox bbox() const;
};

// Throws InputError when a ring is open, has fewer than 4 vertices, contains
// non-finite coordinates, or the exterior ring intersects itself.
void validate(const Polygon& polygon);

// Axis-aligned rectangle as a closed counter-clockwise ring
// (xmin,ymin) -> (xmax,ymin) -> (xmax,ymax) -> (xmin,ymax) -> (xmin,ymin).
Polygon make_rectangle(double xmin, double ymin, double xmax, double ymax);

// Recognises polygons produced by make_rectangle (or any hole-free polygon
// whose exterior is an axis-aligned rectangle); fills `box` on success.
bool as_rectangle(const Polygon& polygon, BoundingBox& box);

// Crossing-number test (holes honoured). Boundary points are resolved by the
// half-open convention so a point on an edge shared by two polygons of a
// partition lands in exactly one of them.
bool contains_half_open(const Polygon& polygon, const Point& p);

// True if the point lies inside or on the boundary of the polygon.
bool contains_closed(const Polygon& polygon, const Point& p);

BoundingBox bbox_of(std::span<const Point> points);
BoundingBox bbox_of(std::span<const Polygon> polygons);

}  // namespace geowise
