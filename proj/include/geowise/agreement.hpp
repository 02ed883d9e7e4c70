#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "geowise/dataset.hpp"
#include "geowise/error.hpp"

// Agreement and error metrics between a truth series y and an estimate
// series ŷ. Every metric exists as a `*_vec` kernel over two vectors (any
// Eigen dense expression, any floating scalar) and as a table form over a
// Dataset that evaluates the kernel once per group.
//
// Pairs where either value is NaN are dropped before anything is computed.
namespace geowise {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct PairedSample {
    Vector<Scalar> truth;
    Vector<Scalar> estimate;

    Eigen::Index size() const { return truth.size(); }
};

template <typename DerivedT, typename DerivedE>
PairedSample<typename DerivedT::Scalar> complete_pairs(const Eigen::MatrixBase<DerivedT>& truth,
                                                       const Eigen::MatrixBase<DerivedE>& estimate) {
    using Scalar = typename DerivedT::Scalar;
    static_assert(std::is_same_v<Scalar, typename DerivedE::Scalar>, "truth and estimate scalar types differ");
    if (truth.size() != estimate.size()) throw std::invalid_argument("truth and estimate lengths differ");
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i)
        if (!std::isnan(truth(i)) && !std::isnan(estimate(i))) ++kept;
    PairedSample<Scalar> out{Vector<Scalar>(kept), Vector<Scalar>(kept)};
    for (Eigen::Index i = 0, k = 0; i < truth.size(); ++i) {
        if (std::isnan(truth(i)) || std::isnan(estimate(i))) continue;
        out.truth(k) = truth(i);
        out.estimate(k) = estimate(i);
        ++k;
    }
    return out;
}

namespace detail {

inline void require_pairs(Eigen::Index n, Eigen::Index minimum, const char* metric) {
    if (n < minimum)
        throw EmptyInputError(std::string(metric) + ": needs at least " + std::to_string(minimum) +
                              " complete pairs, got " + std::to_string(n));
}

template <typename Scalar>
bool is_constant(const Vector<Scalar>& v) {
    return v.size() == 0 || v.maxCoeff() == v.minCoeff();
}

// Σ (|ȳ̂ − ȳ| + |ŷᵢ − ȳ̂|)(|ȳ̂ − ȳ| + |yᵢ − ȳ|), the agreement coefficient
// denominator; symmetric bit-for-bit under swapping the two series.
template <typename Scalar>
Scalar potential_product_difference(const PairedSample<Scalar>& s) {
    const Scalar mean_t = s.truth.mean();
    const Scalar mean_e = s.estimate.mean();
    const Scalar offset = std::abs(mean_e - mean_t);
    return ((offset + (s.estimate.array() - mean_e).abs()) * (offset + (s.truth.array() - mean_t).abs())).sum();
}

template <typename Scalar>
Scalar sum_squared_difference(const PairedSample<Scalar>& s) {
    return (s.estimate - s.truth).squaredNorm();
}

template <typename Scalar>
Scalar willmott_d(const PairedSample<Scalar>& s) {
    require_pairs(s.size(), 2, "willmott_d");
    const Scalar numerator = sum_squared_difference(s);
    if (is_constant(s.truth)) {
        if (numerator == Scalar(0)) return Scalar(1);
        throw UndefinedMetricError("willmott_d: truth is constant");
    }
    const Scalar mean_t = s.truth.mean();
    const Scalar denominator =
        ((s.estimate.array() - mean_t).abs() + (s.truth.array() - mean_t).abs()).square().sum();
    // Termwise numerator <= denominator; only rounding can push d below 0.
    return std::max(Scalar(0), Scalar(1) - numerator / denominator);
}

template <typename Scalar>
Scalar willmott_d1(const PairedSample<Scalar>& s) {
    require_pairs(s.size(), 2, "willmott_d1");
    const Scalar numerator = (s.estimate - s.truth).cwiseAbs().sum();
    if (is_constant(s.truth)) {
        if (numerator == Scalar(0)) return Scalar(1);
        throw UndefinedMetricError("willmott_d1: truth is constant");
    }
    const Scalar mean_t = s.truth.mean();
    const Scalar denominator = ((s.estimate.array() - mean_t).abs() + (s.truth.array() - mean_t).abs()).sum();
    return std::max(Scalar(0), Scalar(1) - numerator / denominator);
}

template <typename Scalar>
Scalar willmott_dr(const PairedSample<Scalar>& s) {
    constexpr Scalar c = 2;
    require_pairs(s.size(), 2, "willmott_dr");
    const Scalar abs_error = (s.estimate - s.truth).cwiseAbs().sum();
    const Scalar scaled_deviation = c * (s.truth.array() - s.truth.mean()).abs().sum();
    if (!(scaled_deviation > Scalar(0))) throw UndefinedMetricError("willmott_dr: truth is constant");
    if (abs_error <= scaled_deviation) return Scalar(1) - abs_error / scaled_deviation;
    return scaled_deviation / abs_error - Scalar(1);
}

template <typename Scalar>
Scalar agreement_coefficient(const PairedSample<Scalar>& s) {
    require_pairs(s.size(), 2, "agreement_coefficient");
    const Scalar numerator = sum_squared_difference(s);
    const Scalar denominator = potential_product_difference(s);
    if (denominator == Scalar(0)) {
        if (numerator == Scalar(0)) return Scalar(1);
        throw UndefinedMetricError("agreement_coefficient: zero denominator");
    }
    return Scalar(1) - numerator / denominator;
}

}  // namespace detail

// Geometric mean functional relationship between truth and estimate:
// ŷ ≈ a + b·y with |b| = sd(ŷ)/sd(y) and a = mean(ŷ) − b·mean(y). The
// reversed line y ≈ reversed_a + reversed_b·ŷ inverts it exactly.
template <typename Scalar = double>
struct GmfrFit {
    Scalar a = 0;
    Scalar b = 1;
    Scalar reversed_a = 0;
    Scalar reversed_b = 1;
    // Correlation was exactly zero; the sign of b defaulted to positive.
    bool zero_correlation = false;

    Scalar predict_estimate(Scalar truth) const { return a + b * truth; }
    Scalar predict_truth(Scalar estimate) const { return reversed_a + reversed_b * estimate; }
};

template <typename Scalar = double>
struct DecompositionResult {
    Scalar total = 0;
    Scalar systematic = 0;
    Scalar unsystematic = 0;
};

template <typename Scalar = double>
struct SpdDecomposition {
    Scalar spd_u = 0, spd_s = 0;
    Scalar mpd_u = 0, mpd_s = 0;
    Scalar rmpd_u = 0, rmpd_s = 0;
    Scalar ac_u = 1, ac_s = 1;
};

namespace detail {

template <typename Scalar>
GmfrFit<Scalar> gmfr_fit(const PairedSample<Scalar>& s) {
    require_pairs(s.size(), 2, "gmfr_fit");
    if (is_constant(s.truth) || is_constant(s.estimate))
        throw DegenerateFitError("gmfr_fit: truth or estimate is constant");
    const Scalar mean_t = s.truth.mean();
    const Scalar mean_e = s.estimate.mean();
    const auto dev_t = (s.truth.array() - mean_t);
    const auto dev_e = (s.estimate.array() - mean_e);
    const Scalar covariance = (dev_t * dev_e).sum();
    GmfrFit<Scalar> fit;
    fit.zero_correlation = covariance == Scalar(0);
    const Scalar magnitude = std::sqrt(dev_e.square().sum() / dev_t.square().sum());
    fit.b = covariance < Scalar(0) ? -magnitude : magnitude;
    fit.a = mean_e - fit.b * mean_t;
    fit.reversed_a = -fit.a / fit.b;
    fit.reversed_b = Scalar(1) / fit.b;
    return fit;
}

// Willmott decomposition: y′ = a + b·ŷ from ordinary least squares of truth
// on estimate; systematic = mean (ŷ − y′)², unsystematic = mean (y − y′)².
template <typename Scalar>
DecompositionResult<Scalar> mse_decomposition(const PairedSample<Scalar>& s) {
    require_pairs(s.size(), 3, "mse_decomposition");
    if (is_constant(s.estimate)) throw DegenerateFitError("mse_decomposition: estimate is constant");
    const Scalar mean_t = s.truth.mean();
    const Scalar mean_e = s.estimate.mean();
    const auto dev_e = (s.estimate.array() - mean_e);
    const Scalar slope = (dev_e * (s.truth.array() - mean_t)).sum() / dev_e.square().sum();
    const Scalar intercept = mean_t - slope * mean_e;
    const Vector<Scalar> fitted = (intercept + slope * s.estimate.array()).matrix();
    const Scalar n = static_cast<Scalar>(s.size());
    return {sum_squared_difference(s) / n, (s.estimate - fitted).squaredNorm() / n,
            (s.truth - fitted).squaredNorm() / n};
}

template <typename Scalar>
SpdDecomposition<Scalar> spd_decomposition(const PairedSample<Scalar>& s) {
    const GmfrFit<Scalar> fit = gmfr_fit(s);
    const auto fitted_estimate = fit.a + fit.b * s.truth.array();
    const auto fitted_truth = fit.reversed_a + fit.reversed_b * s.estimate.array();
    SpdDecomposition<Scalar> out;
    out.spd_u = ((s.estimate.array() - fitted_estimate).abs() * (s.truth.array() - fitted_truth).abs()).sum();
    out.spd_s = sum_squared_difference(s) - out.spd_u;
    const Scalar n = static_cast<Scalar>(s.size());
    out.mpd_u = out.spd_u / n;
    out.mpd_s = out.spd_s / n;
    out.rmpd_u = std::sqrt(out.mpd_u);
    out.rmpd_s = std::sqrt(out.mpd_s);
    const Scalar denominator = potential_product_difference(s);
    if (denominator == Scalar(0)) throw UndefinedMetricError("spd_decomposition: zero denominator");
    out.ac_u = Scalar(1) - out.spd_u / denominator;
    out.ac_s = Scalar(1) - out.spd_s / denominator;
    return out;
}

template <typename Scalar>
Scalar rmse(const PairedSample<Scalar>& s) {
    require_pairs(s.size(), 1, "rmse");
    return std::sqrt(sum_squared_difference(s) / static_cast<Scalar>(s.size()));
}

template <typename Scalar>
Scalar mae(const PairedSample<Scalar>& s) {
    require_pairs(s.size(), 1, "mae");
    return (s.estimate - s.truth).cwiseAbs().sum() / static_cast<Scalar>(s.size());
}

}  // namespace detail

#define GEOWISE_VEC_METRIC(name, expr)                                                      \
    template <typename DT, typename DE>                                                     \
    auto name##_vec(const Eigen::MatrixBase<DT>& truth, const Eigen::MatrixBase<DE>& estimate) { \
        const auto s = complete_pairs(truth, estimate);                                     \
        return expr;                                                                        \
    }

GEOWISE_VEC_METRIC(willmott_d, detail::willmott_d(s))
GEOWISE_VEC_METRIC(willmott_d1, detail::willmott_d1(s))
GEOWISE_VEC_METRIC(willmott_dr, detail::willmott_dr(s))
GEOWISE_VEC_METRIC(agreement_coefficient, detail::agreement_coefficient(s))
GEOWISE_VEC_METRIC(gmfr_fit, detail::gmfr_fit(s))
GEOWISE_VEC_METRIC(mse_decomposition, detail::mse_decomposition(s))
GEOWISE_VEC_METRIC(spd_decomposition, detail::spd_decomposition(s))
GEOWISE_VEC_METRIC(rmse, detail::rmse(s))
GEOWISE_VEC_METRIC(mae, detail::mae(s))
GEOWISE_VEC_METRIC(systematic_mse, detail::mse_decomposition(s).systematic)
GEOWISE_VEC_METRIC(unsystematic_mse, detail::mse_decomposition(s).unsystematic)
GEOWISE_VEC_METRIC(systematic_rmse, std::sqrt(detail::mse_decomposition(s).systematic))
GEOWISE_VEC_METRIC(unsystematic_rmse, std::sqrt(detail::mse_decomposition(s).unsystematic))
GEOWISE_VEC_METRIC(systematic_agreement_coefficient, detail::spd_decomposition(s).ac_s)
GEOWISE_VEC_METRIC(unsystematic_agreement_coefficient, detail::spd_decomposition(s).ac_u)
GEOWISE_VEC_METRIC(systematic_mpd, detail::spd_decomposition(s).mpd_s)
GEOWISE_VEC_METRIC(unsystematic_mpd, detail::spd_decomposition(s).mpd_u)
GEOWISE_VEC_METRIC(systematic_rmpd, detail::spd_decomposition(s).rmpd_s)
GEOWISE_VEC_METRIC(unsystematic_rmpd, detail::spd_decomposition(s).rmpd_u)

#undef GEOWISE_VEC_METRIC

// A named vector metric usable by metric sets and the multi-scale workflow.
struct Metric {
    std::string name;
    std::function<double(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate)> fn;
};

// All built-in metrics in registration order: the fourteen agreement and
// decomposition metrics followed by rmse and mae.
const std::vector<Metric>& metric_registry();

// Throws InputError("unknown metric ...") for unregistered names.
const Metric& find_metric(const std::string& name);

// Evaluates one metric per group (sorted labels) via its vector form.
std::vector<MetricResult> evaluate_metric(const Metric& metric, const Dataset& data);

// Composite evaluator: one row per metric, per group, metrics in list order.
class MetricSet {
public:
    explicit MetricSet(std::vector<Metric> metrics);

    std::vector<MetricResult> operator()(const Dataset& data) const;
    const std::vector<Metric>& metrics() const { return metrics_; }
    std::size_t size() const { return metrics_.size(); }

private:
    std::vector<Metric> metrics_;
};

MetricSet metric_set(std::vector<Metric> metrics);
MetricSet metric_set(const std::vector<std::string>& names);

// Table forms.
std::vector<MetricResult> willmott_d(const Dataset& data);
std::vector<MetricResult> willmott_d1(const Dataset& data);
std::vector<MetricResult> willmott_dr(const Dataset& data);
std::vector<MetricResult> agreement_coefficient(const Dataset& data);
std::vector<MetricResult> systematic_mse(const Dataset& data);
std::vector<MetricResult> unsystematic_mse(const Dataset& data);
std::vector<MetricResult> systematic_rmse(const Dataset& data);
std::vector<MetricResult> unsystematic_rmse(const Dataset& data);
std::vector<MetricResult> systematic_agreement_coefficient(const Dataset& data);
std::vector<MetricResult> unsystematic_agreement_coefficient(const Dataset& data);
std::vector<MetricResult> systematic_mpd(const Dataset& data);
std::vector<MetricResult> unsystematic_mpd(const Dataset& data);
std::vector<MetricResult> systematic_rmpd(const Dataset& data);
std::vector<MetricResult> unsystematic_rmpd(const Dataset& data);
std::vector<MetricResult> rmse(const Dataset& data);
std::vector<MetricResult> mae(const Dataset& data);

}  // namespace geowise
