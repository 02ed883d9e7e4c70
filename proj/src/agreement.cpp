#include "geowise/agreement.hpp"

#include <algorithm>

namespace geowise {

namespace {

template <typename Kernel>
Metric make_metric(std::string name, Kernel kernel) {
    return Metric{std::move(name),
                  [kernel](const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate) -> double {
                      return kernel(truth, estimate);
                  }};
}

std::vector<Metric> build_registry() {
    using V = Eigen::VectorXd;
    return {
        make_metric("willmott_d", [](const V& t, const V& e) { return willmott_d_vec(t, e); }),
        make_metric("willmott_d1", [](const V& t, const V& e) { return willmott_d1_vec(t, e); }),
        make_metric("willmott_dr", [](const V& t, const V& e) { return willmott_dr_vec(t, e); }),
        make_metric("systematic_mse", [](const V& t, const V& e) { return systematic_mse_vec(t, e); }),
        make_metric("unsystematic_mse", [](const V& t, const V& e) { return unsystematic_mse_vec(t, e); }),
        make_metric("systematic_rmse", [](const V& t, const V& e) { return systematic_rmse_vec(t, e); }),
        make_metric("unsystematic_rmse", [](const V& t, const V& e) { return unsystematic_rmse_vec(t, e); }),
        make_metric("agreement_coefficient", [](const V& t, const V& e) { return agreement_coefficient_vec(t, e); }),
        make_metric("systematic_agreement_coefficient",
                    [](const V& t, const V& e) { return systematic_agreement_coefficient_vec(t, e); }),
        make_metric("unsystematic_agreement_coefficient",
                    [](const V& t, const V& e) { return unsystematic_agreement_coefficient_vec(t, e); }),
        make_metric("systematic_mpd", [](const V& t, const V& e) { return systematic_mpd_vec(t, e); }),
        make_metric("unsystematic_mpd", [](const V& t, const V& e) { return unsystematic_mpd_vec(t, e); }),
        make_metric("systematic_rmpd", [](const V& t, const V& e) { return systematic_rmpd_vec(t, e); }),
        make_metric("unsystematic_rmpd", [](const V& t, const V& e) { return unsystematic_rmpd_vec(t, e); }),
        make_metric("rmse", [](const V& t, const V& e) { return rmse_vec(t, e); }),
        make_metric("mae", [](const V& t, const V& e) { return mae_vec(t, e); }),
    };
}

Eigen::Index count_complete(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate) {
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i)
        if (!std::isnan(truth[i]) && !std::isnan(estimate[i])) ++n;
    return n;
}

std::vector<MetricResult> by_name(const char* name, const Dataset& data) {
    return evaluate_metric(find_metric(name), data);
}

}  // namespace

const std::vector<Metric>& metric_registry() {
    static const std::vector<Metric> registry = build_registry();
    return registry;
}

const Metric& find_metric(const std::string& name) {
    const auto& registry = metric_registry();
    auto it = std::find_if(registry.begin(), registry.end(), [&](const Metric& m) { return m.name == name; });
    if (it == registry.end()) throw InputError("unknown metric '" + name + "'");
    return *it;
}

std::vector<MetricResult> evaluate_metric(const Metric& metric, const Dataset& data) {
    data.check();
    std::vector<MetricResult> rows;
    for (const GroupPartition& part : partition_by_group(data)) {
        const Dataset sub = data.group ? data.subset(part.rows) : Dataset{data.truth, data.estimate, {}, {}, {}};
        MetricResult row;
        row.metric = metric.name;
        row.estimate = metric.fn(sub.truth, sub.estimate);
        row.group = part.label;
        row.n = count_complete(sub.truth, sub.estimate);
        rows.push_back(std::move(row));
    }
    return rows;
}

MetricSet::MetricSet(std::vector<Metric> metrics) : metrics_(std::move(metrics)) {
    if (metrics_.empty()) throw std::invalid_argument("metric set needs at least one metric");
}

// Metric-major: every group for the first metric, then the next metric.
std::vector<MetricResult> MetricSet::operator()(const Dataset& data) const {
    std::vector<MetricResult> rows;
    for (const Metric& m : metrics_) {
        auto r = evaluate_metric(m, data);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
}

MetricSet metric_set(std::vector<Metric> metrics) { return MetricSet(std::move(metrics)); }

MetricSet metric_set(const std::vector<std::string>& names) {
    std::vector<Metric> metrics;
    for (const std::string& name : names) metrics.push_back(find_metric(name));
    return MetricSet(std::move(metrics));
}

std::vector<MetricResult> willmott_d(const Dataset& data) { return by_name("willmott_d", data); }
std::vector<MetricResult> willmott_d1(const Dataset& data) { return by_name("willmott_d1", data); }
std::vector<MetricResult> willmott_dr(const Dataset& data) { return by_name("willmott_dr", data); }
std::vector<MetricResult> agreement_coefficient(const Dataset& data) { return by_name("agreement_coefficient", data); }
std::vector<MetricResult> systematic_mse(const Dataset& data) { return by_name("systematic_mse", data); }
std::vector<MetricResult> unsystematic_mse(const Dataset& data) { return by_name("unsystematic_mse", data); }
std::vector<MetricResult> systematic_rmse(const Dataset& data) { return by_name("systematic_rmse", data); }
std::vector<MetricResult> unsystematic_rmse(const Dataset& data) { return by_name("unsystematic_rmse", data); }
std::vector<MetricResult> systematic_agreement_coefficient(const Dataset& data) {
    return by_name("systematic_agreement_coefficient", data);
}
std::vector<MetricResult> unsystematic_agreement_coefficient(const Dataset& data) {
    return by_name("unsystematic_agreement_coefficient", data);
}
std::vector<MetricResult> systematic_mpd(const Dataset& data) { return by_name("systematic_mpd", data); }
std::vector<MetricResult> unsystematic_mpd(const Dataset& data) { return by_name("unsystematic_mpd", data); }
std::vector<MetricResult> systematic_rmpd(const Dataset& data) { return by_name("systematic_rmpd", data); }
std::vector<MetricResult> unsystematic_rmpd(const Dataset& data) { return by_name("unsystematic_rmpd", data); }
std::vector<MetricResult> rmse(const Dataset& data) { return by_name("rmse", data); }
std::vector<MetricResult> mae(const Dataset& data) { return by_name("mae", data); }

}  // namespace geowise
