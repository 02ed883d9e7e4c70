#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "generators.hpp"
#include "geowise/agreement.hpp"
#include "geowise/error.hpp"
#include "oracles.hpp"

using namespace geowise;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("hand-derived values on a four-point example") {
    const VectorXd y = vec({1, 2, 3, 4}), e = vec({2, 2, 3, 5});
    CHECK(willmott_d_vec(y, e) == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
    CHECK(willmott_d1_vec(y, e) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(willmott_dr_vec(y, e) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(agreement_coefficient_vec(y, e) == doctest::Approx(0.8).epsilon(1e-15));
    const auto m = mse_decomposition_vec(y, e);
    CHECK(m.total == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.systematic == doctest::Approx(7.0 / 24.0).epsilon(1e-14));
    CHECK(m.unsystematic == doctest::Approx(5.0 / 24.0).epsilon(1e-14));
    CHECK(rmse_vec(y, e) == doctest::Approx(std::sqrt(0.5)));
    CHECK(mae_vec(y, e) == doctest::Approx(0.5));
}

TEST_CASE("perfect agreement") {
    const VectorXd y = vec({3, -1, 4, 1, 5});
    CHECK(willmott_d_vec(y, y) == 1.0);
    CHECK(willmott_d1_vec(y, y) == 1.0);
    CHECK(willmott_dr_vec(y, y) == 1.0);
    CHECK(agreement_coefficient_vec(y, y) == 1.0);
    CHECK(rmse_vec(y, y) == 0.0);
    const auto s = spd_decomposition_vec(y, y);
    CHECK(s.spd_u == 0.0);
    CHECK(s.spd_s == 0.0);
    CHECK(s.ac_u == 1.0);
    CHECK(s.ac_s == 1.0);
}

TEST_CASE("dr switches branch when error exceeds scaled deviation") {
    const VectorXd y = vec({0, 1}), e = vec({5, -4});
    // error 10, 2 * deviation 2
    CHECK(willmott_dr_vec(y, e) == doctest::Approx(2.0 / 10.0 - 1.0));
}

TEST_CASE("GMFR on an exactly linear relationship") {
    const VectorXd y = vec({1, 2, 4, 7, 11});
    const VectorXd e = (3.0 + 2.0 * y.array()).matrix();
    const auto fit = gmfr_fit_vec(y, e);
    CHECK(fit.a == doctest::Approx(3.0));
    CHECK(fit.b == doctest::Approx(2.0));
    CHECK(fit.reversed_a == doctest::Approx(-1.5));
    CHECK(fit.reversed_b == doctest::Approx(0.5));
    CHECK(fit.predict_truth(fit.predict_estimate(4.0)) == doctest::Approx(4.0));
    const auto s = spd_decomposition_vec(y, e);
    CHECK(s.spd_u == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.spd_s == doctest::Approx((e - y).squaredNorm()));
    CHECK(s.ac_u == doctest::Approx(1.0));

    const VectorXd neg = (10.0 - 0.5 * y.array()).matrix();
    CHECK(gmfr_fit_vec(y, neg).b == doctest::Approx(-0.5));
    CHECK_THROWS_AS(gmfr_fit_vec(y, VectorXd::Constant(5, 2.0)), DegenerateFitError);
}

TEST_CASE("oracle equivalence on random instances") {
    testgen::Gen gen(11);
    for (int trial = 0; trial < 300; ++trial) {
        const Eigen::Index n = gen.integer(3, 200);
        const VectorXd y = gen.vector(n);
        const VectorXd e = gen.related(y);
        const auto yv = oracle::to_vec(y), ev = oracle::to_vec(e);
        CAPTURE(trial);
        CHECK(rel_err(willmott_d_vec(y, e), oracle::willmott_d(yv, ev)) < 1e-10);
        CHECK(rel_err(willmott_d1_vec(y, e), oracle::willmott_d1(yv, ev)) < 1e-10);
        CHECK(rel_err(willmott_dr_vec(y, e), oracle::willmott_dr(yv, ev)) < 1e-10);
        CHECK(rel_err(agreement_coefficient_vec(y, e), oracle::agreement_coefficient(yv, ev)) < 1e-10);
        const auto [ms, mu] = oracle::mse_components(yv, ev);
        const double scale = oracle::mse(yv, ev);
        CHECK(std::abs(systematic_mse_vec(y, e) - ms) <= 1e-8 * scale);
        CHECK(std::abs(unsystematic_mse_vec(y, e) - mu) <= 1e-8 * scale);
        const auto g = oracle::gmfr(yv, ev);
        const auto fit = gmfr_fit_vec(y, e);
        CHECK(rel_err(fit.b, g.b) < 1e-10);
        CHECK(std::abs(fit.a - g.a) <= 1e-9 * (1 + std::abs(g.a) + std::abs(g.b * oracle::mean(yv))));
        const double ssd = oracle::ssd(yv, ev);
        CHECK(std::abs(spd_decomposition_vec(y, e).spd_u - oracle::spd_u(yv, ev)) <= 1e-9 * ssd);
        CHECK(rel_err(rmse_vec(y, e), oracle::rmse(yv, ev)) < 1e-12);
        CHECK(rel_err(mae_vec(y, e), oracle::mae(yv, ev)) < 1e-12);
    }
}

TEST_CASE("decomposition identities") {
    testgen::Gen gen(12);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = gen.integer(5, 300);
        const VectorXd y = gen.vector(n), e = gen.related(y);
        const auto m = mse_decomposition_vec(y, e);
        CHECK(std::abs(m.systematic + m.unsystematic - m.total) <= 1e-10 * m.total);
        const auto s = spd_decomposition_vec(y, e);
        const double ssd = (e - y).squaredNorm();
        CHECK(std::abs(s.spd_s + s.spd_u - ssd) <= 1e-10 * ssd);
        CHECK(s.mpd_u == doctest::Approx(s.spd_u / static_cast<double>(n)));
        CHECK(s.rmpd_u == doctest::Approx(std::sqrt(s.mpd_u)));
        CHECK(systematic_rmse_vec(y, e) == doctest::Approx(std::sqrt(m.systematic)));
        CHECK(unsystematic_rmpd_vec(y, e) == doctest::Approx(s.rmpd_u));
    }
}

TEST_CASE("agreement coefficient is bitwise symmetric") {
    testgen::Gen gen(13);
    for (int trial = 0; trial < 300; ++trial) {
        const VectorXd y = gen.vector(gen.integer(2, 100)), e = gen.related(y);
        CHECK(same_bits(agreement_coefficient_vec(y, e), agreement_coefficient_vec(e, y)));
    }
}

TEST_CASE("bounds") {
    testgen::Gen gen(14);
    for (int trial = 0; trial < 500; ++trial) {
        const VectorXd y = gen.vector(gen.integer(2, 60));
        const VectorXd e = gen.chance(0.5) ? gen.related(y) : gen.vector(y.size());
        if (y.maxCoeff() == y.minCoeff()) continue;
        const double d = willmott_d_vec(y, e), d1 = willmott_d1_vec(y, e), dr = willmott_dr_vec(y, e);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(d1 >= 0.0);
        CHECK(d1 <= 1.0);
        CHECK(dr >= -1.0);
        CHECK(dr <= 1.0);
        try {
            CHECK(agreement_coefficient_vec(y, e) <= 1.0);
        } catch (const UndefinedMetricError&) {
        }
    }
}

TEST_CASE("shifting both series leaves dimensionless metrics unchanged") {
    testgen::Gen gen(15);
    for (int trial = 0; trial < 100; ++trial) {
        const VectorXd y = gen.vector(gen.integer(3, 80)), e = gen.related(y);
        const double k = gen.uniform(-50, 50);
        const VectorXd ys = (y.array() + k).matrix(), es = (e.array() + k).matrix();
        CHECK(willmott_d_vec(ys, es) == doctest::Approx(willmott_d_vec(y, e)).epsilon(1e-9));
        CHECK(willmott_d1_vec(ys, es) == doctest::Approx(willmott_d1_vec(y, e)).epsilon(1e-9));
        CHECK(willmott_dr_vec(ys, es) == doctest::Approx(willmott_dr_vec(y, e)).epsilon(1e-9));
        CHECK(agreement_coefficient_vec(ys, es) == doctest::Approx(agreement_coefficient_vec(y, e)).epsilon(1e-9));
    }
}

TEST_CASE("degenerate inputs") {
    const VectorXd c = VectorXd::Constant(4, 2.0);
    const VectorXd v = vec({1, 2, 3, 4});
    CHECK(willmott_d_vec(c, c) == 1.0);
    CHECK(willmott_d1_vec(c, c) == 1.0);
    CHECK_THROWS_AS(willmott_d_vec(c, v), UndefinedMetricError);
    CHECK_THROWS_AS(willmott_d1_vec(c, v), UndefinedMetricError);
    CHECK_THROWS_AS(willmott_dr_vec(c, c), UndefinedMetricError);
    CHECK(agreement_coefficient_vec(c, c) == 1.0);
    // Estimate constant at the truth mean: zero denominator, positive numerator.
    CHECK_THROWS_AS(agreement_coefficient_vec(v, VectorXd::Constant(4, 2.5)), UndefinedMetricError);
    // Both series constant but different: the offset terms keep the denominator positive.
    CHECK(agreement_coefficient_vec(c, VectorXd::Constant(4, 3.0)) == 0.0);
    CHECK_THROWS_AS(mse_decomposition_vec(v, c), DegenerateFitError);
    CHECK_THROWS_AS(willmott_d_vec(vec({1}), vec({1})), EmptyInputError);
    CHECK_THROWS_AS(mse_decomposition_vec(vec({1, 2}), vec({2, 1})), EmptyInputError);
    CHECK_THROWS_AS(rmse_vec(VectorXd(0), VectorXd(0)), EmptyInputError);
}

TEST_CASE("incomplete pairs are dropped before computing") {
    const VectorXd y = vec({1, kNaN, 3, 4, 2}), e = vec({2, 5, kNaN, 5, 2});
    const auto s = complete_pairs(y, e);
    CHECK(s.size() == 3);
    CHECK(rmse_vec(y, e) == doctest::Approx(rmse_vec(vec({1, 4, 2}), vec({2, 5, 2}))));
    CHECK_THROWS_AS(complete_pairs(vec({1, 2}), vec({1, 2, 3})), std::invalid_argument);
}

TEST_CASE("vector forms accept expressions and other scalar types") {
    const VectorXd y = vec({1, 2, 3, 4});
    CHECK(willmott_d_vec(y, y * 2.0) == doctest::Approx(oracle::willmott_d({1, 2, 3, 4}, {2, 4, 6, 8})));
    const Eigen::VectorXf yf = y.cast<float>();
    const Eigen::VectorXf ef = (yf.array() + 0.5f).matrix();
    const float df = willmott_d_vec(yf, ef);
    CHECK(df == doctest::Approx(willmott_d_vec(y, (y.array() + 0.5).matrix())).epsilon(1e-6));
    CHECK(mae_vec(y.head(2), y.tail(2)) == 2.0);
}

TEST_CASE("registry order and lookup") {
    const char* expected[] = {"willmott_d",
                              "willmott_d1",
                              "willmott_dr",
                              "systematic_mse",
                              "unsystematic_mse",
                              "systematic_rmse",
                              "unsystematic_rmse",
                              "agreement_coefficient",
                              "systematic_agreement_coefficient",
                              "unsystematic_agreement_coefficient",
                              "systematic_mpd",
                              "unsystematic_mpd",
                              "systematic_rmpd",
                              "unsystematic_rmpd",
                              "rmse",
                              "mae"};
    const auto& reg = metric_registry();
    REQUIRE(reg.size() == 16);
    for (std::size_t i = 0; i < reg.size(); ++i) CHECK(reg[i].name == expected[i]);
    CHECK_THROWS_WITH_AS(find_metric("willmot_d"), doctest::Contains("willmot_d"), InputError);
}

TEST_CASE("table forms and metric sets") {
    Dataset d;
    d.truth = vec({1, 2, 3, 4, 5, 6, 7, kNaN});
    d.estimate = vec({1.5, 2, 2.5, 4.5, 5, 6.5, 6, 1});
    auto rows = willmott_d(d);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].metric == "willmott_d");
    CHECK(rows[0].estimator == "standard");
    CHECK(rows[0].n == 7);
    CHECK_FALSE(rows[0].group);
    CHECK(rows[0].estimate == willmott_d_vec(d.truth, d.estimate));

    d.group = std::vector<std::string>{"b", "a", "b", "a", "b", "a", "b", "a"};
    rows = rmse(d);
    REQUIRE(rows.size() == 2);
    CHECK(*rows[0].group == "a");
    CHECK(rows[0].n == 3);
    CHECK(rows[0].estimate == doctest::Approx(rmse_vec(vec({2, 4, 6}), vec({2, 4.5, 6.5}))));

    const MetricSet set = metric_set(std::vector<std::string>{"mae", "willmott_d1", "rmse"});
    const auto out = set(d);
    REQUIRE(out.size() == 6);
    const char* order[] = {"mae", "mae", "willmott_d1", "willmott_d1", "rmse", "rmse"};
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].metric == order[i]);
        CHECK(*out[i].group == (i % 2 == 0 ? "a" : "b"));
    }
    CHECK_THROWS_AS(metric_set(std::vector<Metric>{}), std::invalid_argument);
    CHECK_THROWS_AS(metric_set(std::vector<std::string>{"rmse", "bogus"}), InputError);

    const Metric custom{"bias", [](const VectorXd& t, const VectorXd& e) { return (e - t).mean(); }};
    const auto b = metric_set(std::vector<Metric>{custom, find_metric("mae")})(d);
    CHECK(b[0].metric == "bias");
    CHECK(b.size() == 4);
}
