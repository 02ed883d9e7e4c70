#include <doctest.h>

#include <cmath>
#include <limits>

#include <json.hpp>

#include "generators.hpp"
#include "geowise/error.hpp"
#include "geowise/io.hpp"
#include "geowise/multiscale.hpp"

using namespace geowise;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fixture(const std::string& name) { return std::string(GEOWISE_FIXTURES) + "/" + name; }

// Cells of a regular layout that contain p under the half-open rule with a
// closed outer top and right edge; must be exactly one or none.
std::vector<Eigen::Index> containing_cells(const RegularLayout& l, const Point& p) {
    std::vector<Eigen::Index> hits;
    for (Eigen::Index r = 0; r < l.n_rows(); ++r)
        for (Eigen::Index c = 0; c < l.n_cols(); ++c) {
            const auto cu = static_cast<std::size_t>(c), ru = static_cast<std::size_t>(r);
            const bool last_c = c + 1 == l.n_cols(), last_r = r + 1 == l.n_rows();
            const bool in_x = p.x >= l.x_edges[cu] && (p.x < l.x_edges[cu + 1] || (last_c && p.x == l.x_edges[cu + 1]));
            const bool in_y = p.y >= l.y_edges[ru] && (p.y < l.y_edges[ru + 1] || (last_r && p.y == l.y_edges[ru + 1]));
            if (in_x && in_y) hits.push_back(r * l.n_cols() + c);
        }
    return hits;
}

Dataset points_dataset(std::vector<Point> pts, Eigen::VectorXd truth, Eigen::VectorXd estimate) {
    Dataset d;
    d.truth = std::move(truth);
    d.estimate = std::move(estimate);
    d.geometry = std::move(pts);
    return d;
}

}  // namespace

TEST_CASE("regular grids by count and by cell size") {
    const BoundingBox box{0, 0, 10, 4};
    const Grid g = make_grid(box, GridSpec::cells(2));
    REQUIRE(g.cells.size() == 4);
    REQUIRE(g.layout);
    CHECK(g.layout->x_edges == std::vector<double>{0, 5, 10});
    CHECK(g.layout->y_edges == std::vector<double>{0, 2, 4});
    BoundingBox cell;
    REQUIRE(as_rectangle(g.cells[1], cell));
    CHECK(cell.xmin == 5);
    CHECK(cell.ymin == 0);

    const Grid s = make_grid(BoundingBox{0, 0, 1, 1}, GridSpec::size(0.1));
    CHECK(s.layout->n_cols() == 10);
    CHECK(s.layout->n_rows() == 10);
    CHECK(s.layout->x_edges.back() >= 1.0);

    const Grid partial = make_grid(BoundingBox{0, 0, 2.5, 1}, GridSpec::size(1));
    CHECK(partial.layout->n_cols() == 3);
    CHECK(partial.layout->x_edges.back() == 3.0);
    CHECK(partial.layout->n_rows() == 1);

    CHECK_THROWS_AS(make_grid(box, GridSpec{}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(box, GridSpec::cells(0)), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(box, GridSpec::size(-1)), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(BoundingBox{0, 0, 0, 1}, GridSpec::cells(2)), std::invalid_argument);
    CHECK(GridSpec::cells(3).args() == std::vector<std::pair<std::string, double>>{{"n", 3.0}});
}

TEST_CASE("points on edges go to exactly one cell") {
    const Grid g = make_grid(BoundingBox{0, 0, 2, 2}, GridSpec::cells(2));
    const std::vector<Point> pts = {{1, 1}, {0, 0}, {2, 2}, {2, 0.5}, {1, 2}, {0.5, 1}, {2.0001, 1}};
    const Dataset d = points_dataset(pts, Eigen::VectorXd::Ones(7), Eigen::VectorXd::Ones(7));
    const Aggregation a = aggregate_points(d, g);
    CHECK(a.assignment == std::vector<Eigen::Index>{3, 0, 3, 1, 3, 2, -1});
    REQUIRE(a.notes.size() == 1);
    CHECK(a.notes[0].kind == "outside_grid");
    CHECK(a.notes[0].rows == std::vector<Eigen::Index>{6});
}

TEST_CASE("aggregation conserves observations under random grids") {
    testgen::Gen gen(41);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(1, 120));
        const auto pts = gen.points(n);
        Eigen::VectorXd truth = gen.vector(static_cast<Eigen::Index>(n));
        Eigen::VectorXd estimate = gen.related(truth);
        for (std::size_t i = 0; i < n; ++i) {
            if (gen.chance(0.1)) truth[static_cast<Eigen::Index>(i)] = kNaN;
            if (gen.chance(0.1)) estimate[static_cast<Eigen::Index>(i)] = kNaN;
        }
        const Dataset d = points_dataset(pts, truth, estimate);
        BoundingBox box = bbox_of(std::span<const Point>(pts));
        if (!box.is_valid()) box = BoundingBox{box.xmin - 1, box.ymin - 1, box.xmax + 1, box.ymax + 1};
        if (gen.chance(0.3)) box.xmax = box.xmin + (box.xmax - box.xmin) * gen.uniform(0.3, 1.0);
        const GridSpec spec = gen.chance(0.5) ? GridSpec::cells(gen.integer(1, 10))
                                              : GridSpec::size((box.xmax - box.xmin) / gen.uniform(0.7, 6.0));
        const Grid grid = make_grid(box, spec);
        const Aggregation a = aggregate_points(d, grid);
        CAPTURE(trial);

        Eigen::Index t_total = 0, e_total = 0, t_outside = 0, e_outside = 0;
        for (const GridCell& c : a.cells) {
            t_total += c.truth_count;
            e_total += c.estimate_count;
        }
        bool assignment_ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            const auto hits = containing_cells(*grid.layout, pts[i]);
            const Eigen::Index want = hits.empty() ? -1 : hits[0];
            assignment_ok = assignment_ok && hits.size() <= 1 && a.assignment[i] == want;
            if (a.assignment[i] < 0) {
                t_outside += std::isnan(truth[static_cast<Eigen::Index>(i)]) ? 0 : 1;
                e_outside += std::isnan(estimate[static_cast<Eigen::Index>(i)]) ? 0 : 1;
            }
        }
        CHECK(assignment_ok);
        CHECK(t_total + t_outside == (truth.array() == truth.array()).count());
        CHECK(e_total + e_outside == (estimate.array() == estimate.array()).count());
    }
}

TEST_CASE("arbitrary polygon grids") {
    const auto layer = read_geojson(fixture("halves.geojson"), "t", "e");
    REQUIRE(layer.polygons.size() == 2);
    const std::vector<Point> pts = {{10, 10}, {50, 20}, {90, 90}, {100, 100}, {120, 5}};
    const Dataset d = points_dataset(pts, Eigen::VectorXd::LinSpaced(5, 1, 5), Eigen::VectorXd::Ones(5));
    const Aggregation a = aggregate_points(d, Grid{layer.polygons, std::nullopt});
    CHECK(a.assignment == std::vector<Eigen::Index>{0, 1, 1, 1, -1});
    CHECK(a.cells[1].truth_mean == 3.0);
    CHECK(a.cells[0].truth_count == 1);
}

TEST_CASE("cells with one side missing are excluded and noted") {
    const std::vector<Point> pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    const Eigen::VectorXd truth = (Eigen::VectorXd(4) << 1, 2, 3, 4).finished();
    const Eigen::VectorXd estimate = (Eigen::VectorXd(4) << 1, kNaN, 3, 5).finished();
    const Dataset d = points_dataset(pts, truth, estimate);
    GridSpec spec = GridSpec::cells(2);
    const auto rows = multi_scale(d, metric_set(std::vector<std::string>{"mae"}), {spec});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].result.n == 3);
    CHECK(rows[0].result.estimate == doctest::Approx(1.0 / 3.0));
    REQUIRE(rows[0].notes.size() == 1);
    CHECK(rows[0].notes[0].kind == "unpaired_cells");
    CHECK(rows[0].notes[0].rows == std::vector<Eigen::Index>{1});
}

TEST_CASE("rows are ordered group, grid, metric") {
    testgen::Gen gen(42);
    const auto pts = gen.points(60);
    Dataset d = points_dataset(pts, gen.vector(60), Eigen::VectorXd());
    d.estimate = gen.related(d.truth);
    std::vector<std::string> groups;
    for (int i = 0; i < 60; ++i) groups.push_back(i % 2 ? "west" : "east");
    d.group = groups;
    const auto rows = multi_scale(d, default_multiscale_metrics(), {GridSpec::cells(2), GridSpec::cells(4), GridSpec::cells(6)});
    REQUIRE(rows.size() == 12);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(*rows[k].result.group == (k < 6 ? "east" : "west"));
        CHECK(rows[k].grid_index == (k / 2) % 3);
        CHECK(rows[k].result.metric == (k % 2 ? "mae" : "rmse"));
    }
    CHECK(rows[2].grid_args == std::vector<std::pair<std::string, double>>{{"n", 4.0}});
    CHECK(rows[0].grid.size() == 4);
}

TEST_CASE("raster anchor") {
    const RasterGrid ones = read_ascii_grid(fixture("raster_ones.asc"));
    const RasterGrid twos = read_ascii_grid(fixture("raster_twos.asc"));
    const auto rows = multi_scale_raster(ones, twos, default_multiscale_metrics(), {GridSpec::cells(2), GridSpec::size(5)});
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r.result.estimate == 1.0);
        CHECK(r.result.n == 4);
        CHECK(r.notes.empty());
        for (const GridCell& c : r.grid) {
            CHECK(c.truth_count == 25);
            CHECK(c.truth_mean == 1.0);
            CHECK(c.estimate_mean == 2.0);
        }
    }
    RasterGrid shifted = twos;
    shifted.extent.xmin += 1;
    CHECK_THROWS_AS(raster_to_points(ones, shifted), std::invalid_argument);
}

TEST_CASE("a metric undefined on the aggregated values yields NaN and a note") {
    const std::vector<Point> pts = {{0, 0}, {1, 1}};
    const Dataset d = points_dataset(pts, Eigen::VectorXd::Constant(2, 3.0), Eigen::VectorXd::Constant(2, 3.0));
    const auto rows = multi_scale(d, metric_set(std::vector<std::string>{"willmott_d", "rmse"}), {GridSpec::cells(1)});
    REQUIRE(rows.size() == 2);
    CHECK(std::isnan(rows[0].result.estimate));
    REQUIRE(rows[0].notes.size() == 1);
    CHECK(rows[0].notes[0].kind == "undefined_metric");
    CHECK(rows[1].result.estimate == 0.0);

    Dataset empty = d;
    empty.truth.setConstant(kNaN);
    const auto none = multi_scale(empty, default_multiscale_metrics(), {GridSpec::cells(1)});
    CHECK(std::isnan(none[0].result.estimate));
    CHECK(none[0].result.n == 0);
}

TEST_CASE("grid GeoJSON reads back as the same polygons") {
    const std::vector<Point> pts = {{0, 0}, {3, 3}};
    const Dataset d = points_dataset(pts, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Constant(2, 2.0));
    const Aggregation a = aggregate_points(d, make_grid(BoundingBox{0, 0, 3, 3}, GridSpec::cells(3)));
    const std::string text = grid_to_geojson(a.cells);
    const auto layer = parse_geojson(text, "truth_mean", "estimate_mean");
    REQUIRE(layer.polygons.size() == 9);
    for (std::size_t c = 0; c < 9; ++c) CHECK(layer.polygons[c].rings == a.cells[c].polygon.rings);
    CHECK(layer.data.truth[0] == 1.0);
    CHECK(std::isnan(layer.data.truth[1]));
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["features"][8]["properties"]["estimate_count"] == 1);
}
