#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geowise/dataset.hpp"

namespace geowise {

// RFC 4180 table; every record has exactly header.size() fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a named column; throws InputError naming the column if absent.
    std::size_t column(const std::string& name) const;
    std::optional<std::size_t> find_column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

// Field quoted only when it contains a comma, quote or line break.
std::string csv_escape(const std::string& field);

struct ColumnBinding {
    std::string truth;
    std::string estimate;
    std::optional<std::string> x;
    std::optional<std::string> y;
    std::optional<std::string> group;
};

// Remaining numeric columns are kept in Dataset::extra. Unparseable numbers
// in truth, estimate or extras become NaN; a non-numeric or non-finite
// coordinate is an InputError naming the (1-based) data row and column.
Dataset dataset_from_csv(const CsvTable& table, const ColumnBinding& binding);
Dataset read_dataset_csv(const std::string& path, const ColumnBinding& binding);

Dataset read_points_csv(const std::string& path, const std::string& x_col, const std::string& y_col,
                        const std::string& truth_col, const std::string& estimate_col,
                        const std::optional<std::string>& group_col = std::nullopt);

// Columns x,y (when geometry present), truth, estimate, group, then extras.
void write_dataset_csv(std::ostream& os, const Dataset& data, const std::string& truth_name = "truth",
                       const std::string& estimate_name = "estimate");

enum class GeometryKind { Point, Polygon };

// A FeatureCollection of one geometry type. For polygon layers the
// properties still populate `data` (without geometry) row-aligned with
// `polygons`.
struct GeoJsonLayer {
    GeometryKind kind = GeometryKind::Point;
    Dataset data;
    std::vector<Polygon> polygons;
};

GeoJsonLayer parse_geojson(const std::string& text, const std::string& truth_prop,
                           const std::string& estimate_prop,
                           const std::optional<std::string>& group_prop = std::nullopt);
GeoJsonLayer read_geojson(const std::string& path, const std::string& truth_prop,
                          const std::string& estimate_prop,
                          const std::optional<std::string>& group_prop = std::nullopt);

// ESRI-style ASCII grid: "ncols", "nrows", then either xllcorner/yllcorner
// (or xllcenter/yllcenter) with cellsize, or explicit xmin/ymin/xmax/ymax;
// optional NODATA_value; then nrows lines of values from the top row down.
RasterGrid parse_ascii_grid(const std::string& text);
RasterGrid read_ascii_grid(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace geowise
