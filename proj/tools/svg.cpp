#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "geowise/numeric_format.hpp"

namespace geowise::svg {

namespace {

struct Rgb {
    double r, g, b;
};

constexpr Rgb kLow{255, 247, 188};
constexpr Rgb kHigh{189, 0, 38};
constexpr const char* kMissing = "#bdbdbd";

std::string hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(c.r)),
                  static_cast<int>(std::lround(c.g)), static_cast<int>(std::lround(c.b)));
    return buf;
}

std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return hex({kLow.r + t * (kHigh.r - kLow.r), kLow.g + t * (kHigh.g - kLow.g), kLow.b + t * (kHigh.b - kLow.b)});
}

std::string num(double v) { return format_double(v); }

void ring_points(std::ostream& os, const Ring& ring) {
    // The closing vertex repeats the first and is implied by SVG.
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        if (i) os << ' ';
        os << num(ring[i].x) << ',' << num(ring[i].y);
    }
}

BoundingBox extent_of(const std::vector<Shape>& shapes) {
    std::vector<Point> pts;
    for (const Shape& s : shapes) {
        if (const auto* p = std::get_if<Point>(&s)) {
            pts.push_back(*p);
        } else {
            for (const Ring& r : std::get<Polygon>(s).rings) pts.insert(pts.end(), r.begin(), r.end());
        }
    }
    return bbox_of(std::span<const Point>(pts));
}

}  // namespace

std::string choropleth(const std::vector<Shape>& shapes, const std::vector<double>& values,
                       const std::string& title) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const bool any = lo <= hi;

    BoundingBox box = shapes.empty() ? BoundingBox{0, 0, 1, 1} : extent_of(shapes);
    double span = std::max(box.width(), box.height());
    if (!(span > 0.0)) span = 1.0;
    const double pad = 0.05 * span;
    const double x0 = box.xmin - pad, width = box.width() + 2 * pad;
    const double map_h = box.height() + 2 * pad;
    const double legend_h = 0.15 * span;
    const double radius = 0.01 * span;
    const double font = 0.04 * span;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(x0) << ' ' << num(-(box.ymax + pad)) << ' '
       << num(width) << ' ' << num(map_h + legend_h) << "\">\n";
    os << "<title>" << title << "</title>\n";
    // y' = −y keeps the map upright; the viewBox above starts at −(ymax + pad).
    os << "<g transform=\"scale(1,-1)\" stroke=\"#333333\" stroke-width=\"" << num(0.002 * span) << "\">\n";
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const double v = i < values.size() ? values[i] : std::numeric_limits<double>::quiet_NaN();
        const std::string fill =
            std::isfinite(v) ? ramp(hi > lo ? (v - lo) / (hi - lo) : 0.5) : std::string(kMissing);
        if (const auto* p = std::get_if<Point>(&shapes[i])) {
            os << "<circle cx=\"" << num(p->x) << "\" cy=\"" << num(p->y) << "\" r=\"" << num(radius)
               << "\" fill=\"" << fill << "\"/>\n";
            continue;
        }
        const Polygon& poly = std::get<Polygon>(shapes[i]);
        if (poly.rings.size() == 1) {
            os << "<polygon points=\"";
            ring_points(os, poly.rings[0]);
            os << "\" fill=\"" << fill << "\"/>\n";
        } else {
            os << "<path fill-rule=\"evenodd\" d=\"";
            for (std::size_t r = 0; r < poly.rings.size(); ++r) {
                if (r) os << ' ';
                os << 'M';
                ring_points(os, poly.rings[r]);
                os << 'Z';
            }
            os << "\" fill=\"" << fill << "\"/>\n";
        }
    }
    os << "</g>\n";

    const double ly = -(box.ymin - pad) + 0.02 * span;
    const double sw = 0.08 * span;
    os << "<g font-size=\"" << num(font) << "\" font-family=\"sans-serif\">\n";
    os << "<rect x=\"" << num(x0 + pad) << "\" y=\"" << num(ly) << "\" width=\"" << num(sw) << "\" height=\""
       << num(sw) << "\" fill=\"" << ramp(0.0) << "\"/>\n";
    os << "<text x=\"" << num(x0 + pad + 1.2 * sw) << "\" y=\"" << num(ly + 0.8 * sw) << "\">min "
       << (any ? num(lo) : std::string("NA")) << "</text>\n";
    const double mid = x0 + width / 2;
    os << "<rect x=\"" << num(mid) << "\" y=\"" << num(ly) << "\" width=\"" << num(sw) << "\" height=\"" << num(sw)
       << "\" fill=\"" << ramp(1.0) << "\"/>\n";
    os << "<text x=\"" << num(mid + 1.2 * sw) << "\" y=\"" << num(ly + 0.8 * sw) << "\">max "
       << (any ? num(hi) : std::string("NA")) << "</text>\n";
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace geowise::svg
