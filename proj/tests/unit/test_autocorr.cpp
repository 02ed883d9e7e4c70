#include <doctest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "geowise/autocorr.hpp"
#include "geowise/error.hpp"
#include "geowise/weights.hpp"
#include "oracles.hpp"

using namespace geowise;
using Eigen::VectorXd;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

oracle::Dense dense(const WeightsMatrix& w) {
    const Eigen::MatrixXd m(w.w);
    oracle::Dense out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

WeightsMatrix rook_checkerboard() {
    NeighborList nb;
    nb.neighbors = {{1, 2}, {0, 3}, {0, 3}, {1, 2}};
    return build_weights(nb);
}

WeightsMatrix random_weights(testgen::Gen& gen, const std::vector<Point>& pts) {
    const auto k = static_cast<Eigen::Index>(gen.integer(1, std::min<long>(8, static_cast<long>(pts.size()) - 1)));
    const auto style = gen.chance(0.5) ? WeightsStyle::RowStandardized : WeightsStyle::Binary;
    return build_weights(build_neighbors_points(pts, k), {style, false});
}

double max_abs_diff(const VectorXd& got, const oracle::Vec& want) {
    double m = 0;
    for (Eigen::Index i = 0; i < got.size(); ++i)
        m = std::max(m, std::abs(got[i] - want[static_cast<std::size_t>(i)]) / std::max(1.0, std::abs(want[static_cast<std::size_t>(i)])));
    return m;
}

}  // namespace

TEST_CASE("checkerboard anchors") {
    const VectorXd x = (VectorXd(4) << 1, 0, 0, 1).finished();
    const WeightsMatrix w = rook_checkerboard();
    CHECK(global_moran_i(x, w) == -1.0);
    CHECK(global_geary_c(x, w) == doctest::Approx(1.5).epsilon(1e-12));
    const VectorXd li = local_moran_i(x, w);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(li[i] == doctest::Approx(-1.0));
    const VectorXd lc = local_geary_c(x, w);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(lc[i] == doctest::Approx(1.0));
}

TEST_CASE("oracle equivalence on random instances") {
    testgen::Gen gen(31);
    for (int trial = 0; trial < 80; ++trial) {
        const auto pts = gen.points(static_cast<std::size_t>(gen.integer(4, 150)));
        const WeightsMatrix w = random_weights(gen, pts);
        const VectorXd x = gen.vector(static_cast<Eigen::Index>(pts.size()));
        if (x.maxCoeff() == x.minCoeff()) continue;
        const auto xv = oracle::to_vec(x);
        const auto W = dense(w);
        CAPTURE(trial);
        CHECK(global_moran_i(x, w) == doctest::Approx(oracle::moran_i(xv, W)).epsilon(1e-10));
        CHECK(global_geary_c(x, w) == doctest::Approx(oracle::geary_c(xv, W)).epsilon(1e-10));
        CHECK(max_abs_diff(local_moran_i(x, w), oracle::local_moran_i(xv, W)) < 1e-10);
        CHECK(max_abs_diff(local_geary_c(x, w), oracle::local_geary_c(xv, W)) < 1e-10);
        for (bool star : {false, true}) {
            const auto g = local_getis_ord_g(x, w, star);
            const auto want = oracle::getis_ord(xv, W, star);
            for (std::size_t i = 0; i < want.size(); ++i) {
                if (std::isnan(g.values[static_cast<Eigen::Index>(i)])) continue;
                CHECK(g.values[static_cast<Eigen::Index>(i)] == doctest::Approx(want[i]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("local statistics aggregate to the global ones") {
    testgen::Gen gen(32);
    for (int trial = 0; trial < 40; ++trial) {
        const auto pts = gen.points(static_cast<std::size_t>(gen.integer(5, 120)));
        const WeightsMatrix w = random_weights(gen, pts);
        const VectorXd x = gen.vector(static_cast<Eigen::Index>(pts.size()));
        if (x.maxCoeff() == x.minCoeff()) continue;
        const double n = static_cast<double>(x.size());
        const double ss = (x.array() - x.mean()).square().sum();
        CHECK(local_moran_i(x, w).sum() == doctest::Approx(w.total() * global_moran_i(x, w)).epsilon(1e-9));
        CHECK(local_geary_c(x, w).sum() ==
              doctest::Approx(global_geary_c(x, w) * 2 * w.total() * ss / (n - 1)).epsilon(1e-9));
        CHECK(global_geary_c(x, w) >= 0.0);
    }
}

TEST_CASE("Getis-Ord Z is unchanged by shifting and flips with the residual sign") {
    testgen::Gen gen(33);
    const auto pts = gen.points(60);
    const WeightsMatrix w = build_weights(build_neighbors_points(pts, 4));
    const VectorXd x = gen.vector(60);
    const VectorXd shifted = (x.array() + 1000.0).matrix();
    const auto a = local_getis_ord_g(x, w, true), b = local_getis_ord_g(shifted, w, true);
    const auto c = local_getis_ord_g((-x).eval(), w, true);
    for (Eigen::Index i = 0; i < 60; ++i) {
        CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-8));
        CHECK(c.values[i] == doctest::Approx(-a.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("Getis-Ord flags rows whose variance term vanishes") {
    NeighborList nb;
    nb.neighbors = {{1}, {0, 2}, {1, 3}, {2}};
    const WeightsMatrix w = build_weights(nb, {WeightsStyle::Binary, false});
    // Every value other than x[0] is equal, so row 0 has zero variance.
    const VectorXd x = (VectorXd(4) << 5, 1, 1, 1).finished();
    const auto g = local_getis_ord_g(x, w);
    CHECK(std::isnan(g.values[0]));
    for (Eigen::Index i = 1; i < 4; ++i) CHECK_FALSE(std::isnan(g.values[i]));
    REQUIRE(g.notes.size() == 1);
    CHECK(g.notes[0].kind == "zero_variance");
    CHECK(g.notes[0].rows == std::vector<Eigen::Index>{0});
}

TEST_CASE("degenerate inputs") {
    const WeightsMatrix w = rook_checkerboard();
    CHECK_THROWS_AS(global_moran_i(VectorXd::Constant(4, 2.0), w), UndefinedMetricError);
    CHECK_THROWS_AS(global_geary_c(VectorXd::Constant(4, 2.0), w), UndefinedMetricError);
    CHECK_THROWS_AS(global_moran_i(VectorXd::Zero(3), w), std::invalid_argument);
    CHECK_THROWS_AS(global_moran_i((VectorXd(4) << 1, kNaN, 0, 1).finished(), w), std::invalid_argument);
    CHECK(local_geary_c(VectorXd::Constant(4, 2.0), w).isZero());
}

TEST_CASE("residuals are truth minus estimate") {
    const VectorXd t = (VectorXd(3) << 3, 2, 1).finished(), e = (VectorXd(3) << 1, 1, 1).finished();
    CHECK(residuals(t, e) == (VectorXd(3) << 2, 1, 0).finished());
}

TEST_CASE("table forms build weights and keep row order") {
    Dataset d;
    d.truth = (VectorXd(4) << 1, 0, 0, 1).finished();
    d.estimate = VectorXd::Zero(4);
    d.geometry = std::vector<Point>{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    const WeightsBuilder rook = [](const Dataset& s) { return build_weights(build_neighbors_points(*s.geometry, 2)); };
    const auto g = global_moran_i(d, rook);
    REQUIRE(g.size() == 1);
    CHECK(g[0].metric == "global_moran_i");
    CHECK(g[0].estimate == -1.0);
    CHECK(global_moran_i(d, rook_checkerboard())[0].estimate == -1.0);

    const auto l = local_geary_c(d, rook);
    REQUIRE(l.size() == 4);
    for (const auto& r : l) CHECK(r.estimate == doctest::Approx(1.0));

    // Default weights: one nearest neighbour, ties to the lower index.
    const WeightsMatrix def = default_weights(d);
    CHECK(def.w.coeff(0, 1) == 1.0);
    CHECK(def.w.coeff(3, 1) == 1.0);
    CHECK_THROWS_AS(default_weights(Dataset{d.truth, d.estimate, std::nullopt, std::nullopt, {}}), InputError);
}

TEST_CASE("missing residuals and groups") {
    testgen::Gen gen(34);
    Dataset d;
    const auto n = 40;
    d.geometry = gen.points(n);
    d.truth = gen.vector(n);
    d.estimate = gen.related(d.truth);
    d.truth[5] = kNaN;
    const WeightsBuilder knn2 = [](const Dataset& s) { return build_weights(build_neighbors_points(*s.geometry, 2)); };

    const auto local = local_moran_i(d, knn2);
    REQUIRE(local.size() == n);
    CHECK(std::isnan(local[5].estimate));
    CHECK(local[5].note == "missing_residual");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != 5) keep.push_back(i);
    const Dataset complete = d.subset(keep);
    const VectorXd direct = local_moran_i(residuals(complete.truth, complete.estimate), knn2(complete));
    CHECK(local[6].estimate == direct[5]);
    CHECK(global_moran_i(d, knn2)[0].n == n - 1);
    CHECK_THROWS_AS(global_moran_i(d, knn2(d)), std::invalid_argument);

    std::vector<std::string> groups;
    for (int i = 0; i < n; ++i) groups.push_back(i % 3 == 0 ? "z" : "a");
    d.group = groups;
    const auto per_group = global_geary_c(d, knn2);
    REQUIRE(per_group.size() == 2);
    CHECK(*per_group[0].group == "a");
    CHECK(*per_group[1].group == "z");
    const auto local_grouped = local_getis_ord_g(d, knn2, true);
    CHECK(local_grouped.size() == n);
    CHECK(*local_grouped[3].group == "z");
}

TEST_CASE("statistic names") {
    for (auto s : {AutocorrStatistic::GlobalMoranI, AutocorrStatistic::LocalMoranI, AutocorrStatistic::GlobalGearyC,
                   AutocorrStatistic::LocalGearyC, AutocorrStatistic::LocalGetisOrdG,
                   AutocorrStatistic::LocalGetisOrdGStar})
        CHECK(parse_statistic(statistic_name(s)) == s);
    CHECK_FALSE(is_local(AutocorrStatistic::GlobalGearyC));
    CHECK(is_local(AutocorrStatistic::LocalGetisOrdG));
    CHECK_THROWS_AS(parse_statistic("moran"), InputError);
}
