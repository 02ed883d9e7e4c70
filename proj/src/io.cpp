#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "geowise/error.hpp"
#include "geowise/io.hpp"
#include "geowise/numeric_format.hpp"

namespace geowise {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double number_or_nan(const std::string& text) { return parse_double(text).value_or(kNaN); }

double coordinate(const std::string& text, std::size_t row, const std::string& column) {
    const auto value = parse_double(text);
    if (!value || !std::isfinite(*value))
        throw InputError("row " + std::to_string(row) + " column " + column + ": invalid coordinate '" + text + "'");
    return *value;
}

}  // namespace

Dataset dataset_from_csv(const CsvTable& table, const ColumnBinding& binding) {
    const std::size_t truth_idx = table.column(binding.truth);
    const std::size_t estimate_idx = table.column(binding.estimate);
    std::optional<std::size_t> x_idx, y_idx, group_idx;
    if (binding.x || binding.y) {
        if (!binding.x || !binding.y) throw InputError("both x and y columns are required for geometry");
        x_idx = table.column(*binding.x);
        y_idx = table.column(*binding.y);
    }
    if (binding.group) group_idx = table.column(*binding.group);

    const auto n = static_cast<Eigen::Index>(table.rows.size());
    Dataset data;
    data.truth.resize(n);
    data.estimate.resize(n);
    if (x_idx) data.geometry.emplace();
    if (group_idx) data.group.emplace();

    std::vector<std::size_t> extra_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == truth_idx || c == estimate_idx || c == x_idx || c == y_idx || c == group_idx) continue;
        extra_cols.push_back(c);
        data.extra.emplace_back(table.header[c], Eigen::VectorXd(n));
    }

    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = table.rows[static_cast<std::size_t>(r)];
        data.truth[r] = number_or_nan(row[truth_idx]);
        data.estimate[r] = number_or_nan(row[estimate_idx]);
        if (x_idx) {
            const auto row_no = static_cast<std::size_t>(r) + 1;
            data.geometry->push_back({coordinate(row[*x_idx], row_no, *binding.x),
                                      coordinate(row[*y_idx], row_no, *binding.y)});
        }
        if (group_idx) data.group->push_back(row[*group_idx]);
        for (std::size_t e = 0; e < extra_cols.size(); ++e) data.extra[e].second[r] = number_or_nan(row[extra_cols[e]]);
    }
    return data;
}

Dataset read_dataset_csv(const std::string& path, const ColumnBinding& binding) {
    return dataset_from_csv(read_csv(path), binding);
}

Dataset read_points_csv(const std::string& path, const std::string& x_col, const std::string& y_col,
                        const std::string& truth_col, const std::string& estimate_col,
                        const std::optional<std::string>& group_col) {
    return read_dataset_csv(path, ColumnBinding{truth_col, estimate_col, x_col, y_col, group_col});
}

void write_dataset_csv(std::ostream& os, const Dataset& data, const std::string& truth_name,
                       const std::string& estimate_name) {
    data.check();
    std::vector<std::string> header;
    if (data.geometry) header = {"x", "y"};
    header.push_back(truth_name);
    header.push_back(estimate_name);
    if (data.group) header.push_back("group");
    for (const auto& col : data.extra) header.push_back(col.first);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_escape(header[i]);
    os << '\n';
    for (Eigen::Index r = 0; r < data.n_rows(); ++r) {
        const auto ru = static_cast<std::size_t>(r);
        if (data.geometry)
            os << format_double((*data.geometry)[ru].x) << ',' << format_double((*data.geometry)[ru].y) << ',';
        os << format_double(data.truth[r]) << ',' << format_double(data.estimate[r]);
        if (data.group) os << ',' << csv_escape((*data.group)[ru]);
        for (const auto& col : data.extra) os << ',' << format_double(col.second[r]);
        os << '\n';
    }
}

namespace {

using nlohmann::json;

Point json_point(const json& coords) {
    if (!coords.is_array() || coords.size() < 2 || !coords[0].is_number() || !coords[1].is_number())
        throw InputError("GeoJSON: invalid position");
    Point p{coords[0].get<double>(), coords[1].get<double>()};
    if (!is_finite(p)) throw InputError("GeoJSON: non-finite coordinate");
    return p;
}

Polygon json_polygon(const json& coords) {
    if (!coords.is_array() || coords.empty()) throw InputError("GeoJSON: invalid polygon coordinates");
    Polygon poly;
    for (const json& ring_coords : coords) {
        if (!ring_coords.is_array()) throw InputError("GeoJSON: invalid linear ring");
        Ring ring;
        for (const json& pos : ring_coords) ring.push_back(json_point(pos));
        poly.rings.push_back(std::move(ring));
    }
    validate(poly);
    return poly;
}

double json_number(const json& props, const std::string& name) {
    if (name.empty() || !props.is_object()) return kNaN;
    auto it = props.find(name);
    if (it == props.end() || it->is_null()) return kNaN;
    if (it->is_number()) return it->get<double>();
    if (it->is_string()) return number_or_nan(it->get<std::string>());
    return kNaN;
}

std::string json_label(const json& props, const std::string& name) {
    if (!props.is_object()) return {};
    auto it = props.find(name);
    if (it == props.end() || it->is_null()) return {};
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

}  // namespace

GeoJsonLayer parse_geojson(const std::string& text, const std::string& truth_prop,
                           const std::string& estimate_prop, const std::optional<std::string>& group_prop) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("GeoJSON: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
        !doc["features"].is_array())
        throw InputError("GeoJSON: expected a FeatureCollection");

    const json& features = doc["features"];
    GeoJsonLayer layer;
    std::optional<std::string> seen_type;
    std::vector<Point> points;
    std::vector<double> truth, estimate;
    std::vector<std::string> groups;

    for (const json& feature : features) {
        if (!feature.is_object() || !feature.contains("geometry") || !feature["geometry"].is_object())
            throw InputError("GeoJSON: feature without geometry");
        const json& geom = feature["geometry"];
        const std::string type = geom.value("type", "");
        if (type != "Point" && type != "Polygon") throw InputError("GeoJSON: unsupported geometry type '" + type + "'");
        if (seen_type && *seen_type != type) throw InputError("GeoJSON: mixed geometry types");
        seen_type = type;
        if (!geom.contains("coordinates")) throw InputError("GeoJSON: geometry without coordinates");
        if (type == "Point")
            points.push_back(json_point(geom["coordinates"]));
        else
            layer.polygons.push_back(json_polygon(geom["coordinates"]));

        const json props = feature.contains("properties") ? feature["properties"] : json::object();
        truth.push_back(json_number(props, truth_prop));
        estimate.push_back(json_number(props, estimate_prop));
        if (group_prop) groups.push_back(json_label(props, *group_prop));
    }

    layer.kind = (seen_type && *seen_type == "Polygon") ? GeometryKind::Polygon : GeometryKind::Point;
    const auto n = static_cast<Eigen::Index>(truth.size());
    layer.data.truth = Eigen::Map<Eigen::VectorXd>(truth.data(), n);
    layer.data.estimate = Eigen::Map<Eigen::VectorXd>(estimate.data(), n);
    if (layer.kind == GeometryKind::Point) layer.data.geometry = std::move(points);
    if (group_prop) layer.data.group = std::move(groups);
    return layer;
}

GeoJsonLayer read_geojson(const std::string& path, const std::string& truth_prop,
                          const std::string& estimate_prop, const std::optional<std::string>& group_prop) {
    return parse_geojson(read_text_file(path), truth_prop, estimate_prop, group_prop);
}

RasterGrid parse_ascii_grid(const std::string& text) {
    std::istringstream in(text);
    std::map<std::string, double> header;
    std::string token;
    std::vector<double> values;
    while (in >> token) {
        std::string key = token;
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        if (!key.empty() && (std::isalpha(static_cast<unsigned char>(key[0])) || key[0] == '_') && key != "nan" &&
            key != "inf") {
            if (!values.empty()) throw InputError("ASCII grid: header key '" + token + "' after data values");
            std::string value;
            if (!(in >> value)) throw InputError("ASCII grid: header key '" + token + "' has no value");
            const auto parsed = parse_double(value);
            if (!parsed) throw InputError("ASCII grid: invalid header value for '" + token + "'");
            header[key] = *parsed;
            continue;
        }
        const auto v = parse_double(token);
        if (!v) throw InputError("ASCII grid: invalid value '" + token + "'");
        values.push_back(*v);
    }
    auto need = [&](const char* key) {
        auto it = header.find(key);
        if (it == header.end()) throw InputError(std::string("ASCII grid: missing header '") + key + "'");
        return it->second;
    };
    RasterGrid grid;
    grid.n_cols = static_cast<Eigen::Index>(need("ncols"));
    grid.n_rows = static_cast<Eigen::Index>(need("nrows"));
    if (grid.n_cols < 1 || grid.n_rows < 1) throw InputError("ASCII grid: ncols and nrows must be positive");
    if (header.count("xmin")) {
        grid.extent = {need("xmin"), need("ymin"), need("xmax"), need("ymax")};
    } else {
        const double cell = need("cellsize");
        double x0, y0;
        if (header.count("xllcenter")) {
            x0 = need("xllcenter") - cell / 2;
            y0 = need("yllcenter") - cell / 2;
        } else {
            x0 = need("xllcorner");
            y0 = need("yllcorner");
        }
        grid.extent = {x0, y0, x0 + cell * static_cast<double>(grid.n_cols),
                       y0 + cell * static_cast<double>(grid.n_rows)};
    }
    if (!grid.extent.is_valid()) throw InputError("ASCII grid: degenerate extent");
    if (static_cast<Eigen::Index>(values.size()) != grid.n_cols * grid.n_rows)
        throw InputError("ASCII grid: expected " + std::to_string(grid.n_cols * grid.n_rows) + " values, found " +
                         std::to_string(values.size()));
    if (auto it = header.find("nodata_value"); it != header.end())
        for (double& v : values)
            if (v == it->second) v = kNaN;
    grid.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return grid;
}

RasterGrid read_ascii_grid(const std::string& path) { return parse_ascii_grid(read_text_file(path)); }

}  // namespace geowise
