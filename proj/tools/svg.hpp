#pragma once

#include <string>
#include <variant>
#include <vector>

#include "geowise/geometry.hpp"

namespace geowise::svg {

// A filled map feature: a polygon, or a point drawn as a small circle.
using Shape = std::variant<Polygon, Point>;

// Flat choropleth document. The viewBox spans the features' bounding box
// (plus a legend band beneath it) and the map is mirrored so +y points up.
// Values map onto a sequential ramp between their min and max; NaN values
// are drawn grey. Polygons without holes become <polygon> elements.
std::string choropleth(const std::vector<Shape>& shapes, const std::vector<double>& values,
                       const std::string& title);

}  // namespace geowise::svg
