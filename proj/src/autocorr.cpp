#include "geowise/autocorr.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "geowise/error.hpp"

namespace geowise {

namespace {

using RowIter = Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator;

void require_shape(const Eigen::VectorXd& x, const WeightsMatrix& w, Eigen::Index minimum, const char* stat) {
    if (w.size() != x.size())
        throw std::invalid_argument(std::string(stat) + ": weights have " + std::to_string(w.size()) +
                                    " rows but there are " + std::to_string(x.size()) + " observations");
    if (x.size() < minimum)
        throw EmptyInputError(std::string(stat) + ": needs at least " + std::to_string(minimum) + " observations");
    if (x.array().isNaN().any()) throw std::invalid_argument(std::string(stat) + ": residuals contain NaN");
}

// Centred residuals and their sum of squares; fails on zero variance.
Eigen::VectorXd centred(const Eigen::VectorXd& x, double& sum_sq, const char* stat) {
    Eigen::VectorXd z = x.array() - x.mean();
    sum_sq = z.squaredNorm();
    if (!(sum_sq > 0.0) || x.maxCoeff() == x.minCoeff())
        throw UndefinedMetricError(std::string(stat) + ": residuals are constant");
    return z;
}

// Two-pass variance of z with entry `skip` left out (none when negative).
double exact_variance(const Eigen::VectorXd& z, Eigen::Index skip) {
    const double m = static_cast<double>(z.size() - (skip >= 0 ? 1 : 0));
    double mean = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j)
        if (j != skip) mean += z[j];
    mean /= m;
    double sq = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j)
        if (j != skip) sq += (z[j] - mean) * (z[j] - mean);
    return sq / m;
}

}  // namespace

Eigen::VectorXd residuals(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate) {
    if (truth.size() != estimate.size()) throw std::invalid_argument("truth and estimate lengths differ");
    return truth - estimate;
}

double global_moran_i(const Eigen::VectorXd& x, const WeightsMatrix& w) {
    require_shape(x, w, 3, "global_moran_i");
    double sum_sq = 0.0;
    const Eigen::VectorXd z = centred(x, sum_sq, "global_moran_i");
    const double total = w.total();
    if (!(total > 0.0)) throw UndefinedMetricError("global_moran_i: weights sum to zero");
    const double cross = z.dot(w.w * z);
    return static_cast<double>(x.size()) / total * cross / sum_sq;
}

Eigen::VectorXd local_moran_i(const Eigen::VectorXd& x, const WeightsMatrix& w) {
    require_shape(x, w, 3, "local_moran_i");
    double sum_sq = 0.0;
    const Eigen::VectorXd z = centred(x, sum_sq, "local_moran_i");
    const double m2 = sum_sq / static_cast<double>(x.size());
    return (z.array() * (w.w * z).array() / m2).matrix();
}

double global_geary_c(const Eigen::VectorXd& x, const WeightsMatrix& w) {
    require_shape(x, w, 3, "global_geary_c");
    double sum_sq = 0.0;
    centred(x, sum_sq, "global_geary_c");
    const double total = w.total();
    if (!(total > 0.0)) throw UndefinedMetricError("global_geary_c: weights sum to zero");
    double pairs = 0.0;
    for (Eigen::Index i = 0; i < w.w.outerSize(); ++i)
        for (RowIter it(w.w, i); it; ++it) {
            const double d = x[i] - x[it.col()];
            pairs += it.value() * d * d;
        }
    return (static_cast<double>(x.size()) - 1.0) / (2.0 * total) * pairs / sum_sq;
}

Eigen::VectorXd local_geary_c(const Eigen::VectorXd& x, const WeightsMatrix& w) {
    require_shape(x, w, 1, "local_geary_c");
    Eigen::VectorXd c = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index i = 0; i < w.w.outerSize(); ++i)
        for (RowIter it(w.w, i); it; ++it) {
            const double d = x[i] - x[it.col()];
            c[i] += it.value() * d * d;
        }
    return c;
}

LocalStatistic local_getis_ord_g(const Eigen::VectorXd& x, const WeightsMatrix& w, bool star) {
    require_shape(x, w, 3, star ? "local_getis_ord_g_star" : "local_getis_ord_g");
    const Eigen::Index n = x.size();
    const double nd = static_cast<double>(n);
    // Z is invariant to shifting x; centring first keeps the raw-moment
    // variance formula well conditioned.
    const Eigen::VectorXd z = x.array() - x.mean();
    const double total = z.sum();
    const double total_sq = z.squaredNorm();
    // The one-pass variance carries rounding of order eps * Σz²; below this
    // floor it is recomputed in two passes before deciding it is zero.
    const double screen = 1e-6 * total_sq / (nd - 1.0);
    const double magnitude = z.cwiseAbs().maxCoeff();

    LocalStatistic out;
    out.values.resize(n);
    Note zero_var{"zero_variance", "variance term is zero; Z is undefined", {}};
    for (Eigen::Index i = 0; i < n; ++i) {
        double w_sum = 0.0, w_sq = 0.0, lag = 0.0;
        for (RowIter it(w.w, i); it; ++it) {
            w_sum += it.value();
            w_sq += it.value() * it.value();
            lag += it.value() * z[it.col()];
        }
        double mean = 0.0, var = 0.0;
        if (star) {
            w_sum += 1.0;
            w_sq += 1.0;
            lag += z[i];
            mean = total / nd;
            var = total_sq / nd - mean * mean;
        } else {
            mean = (total - z[i]) / (nd - 1.0);
            var = (total_sq - z[i] * z[i]) / (nd - 1.0) - mean * mean;
        }
        if (!(var > screen)) var = exact_variance(z, star ? -1 : i);
        const double spread = ((nd - 1.0) * w_sq - w_sum * w_sum) / (nd - 1.0);
        if (!(std::sqrt(std::max(var, 0.0)) > 1e-12 * magnitude) || !(spread > 0.0)) {
            out.values[i] = std::numeric_limits<double>::quiet_NaN();
            zero_var.rows.push_back(i);
            continue;
        }
        out.values[i] = (lag - w_sum * mean) / (std::sqrt(var) * std::sqrt(spread));
    }
    if (!zero_var.rows.empty()) out.notes.push_back(std::move(zero_var));
    return out;
}

double global_moran_i_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, const WeightsMatrix& w) {
    return global_moran_i(residuals(truth, estimate), w);
}
Eigen::VectorXd local_moran_i_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate,
                                  const WeightsMatrix& w) {
    return local_moran_i(residuals(truth, estimate), w);
}
double global_geary_c_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, const WeightsMatrix& w) {
    return global_geary_c(residuals(truth, estimate), w);
}
Eigen::VectorXd local_geary_c_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate,
                                  const WeightsMatrix& w) {
    return local_geary_c(residuals(truth, estimate), w);
}
LocalStatistic local_getis_ord_g_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate,
                                     const WeightsMatrix& w, bool star) {
    return local_getis_ord_g(residuals(truth, estimate), w, star);
}

WeightsMatrix default_weights(const Dataset& data) {
    if (!data.geometry) throw InputError("automatic weights need point geometry");
    return build_weights(build_neighbors_points(*data.geometry, 1));
}

const char* statistic_name(AutocorrStatistic stat) {
    switch (stat) {
        case AutocorrStatistic::GlobalMoranI: return "global_moran_i";
        case AutocorrStatistic::LocalMoranI: return "local_moran_i";
        case AutocorrStatistic::GlobalGearyC: return "global_geary_c";
        case AutocorrStatistic::LocalGearyC: return "local_geary_c";
        case AutocorrStatistic::LocalGetisOrdG: return "local_getis_ord_g";
        case AutocorrStatistic::LocalGetisOrdGStar: return "local_getis_ord_g_star";
    }
    return "";
}

AutocorrStatistic parse_statistic(const std::string& name) {
    for (auto stat : {AutocorrStatistic::GlobalMoranI, AutocorrStatistic::LocalMoranI, AutocorrStatistic::GlobalGearyC,
                      AutocorrStatistic::LocalGearyC, AutocorrStatistic::LocalGetisOrdG,
                      AutocorrStatistic::LocalGetisOrdGStar})
        if (name == statistic_name(stat)) return stat;
    throw InputError("unknown statistic '" + name + "'");
}

bool is_local(AutocorrStatistic stat) {
    return stat != AutocorrStatistic::GlobalMoranI && stat != AutocorrStatistic::GlobalGearyC;
}

std::vector<MetricResult> evaluate_autocorr(AutocorrStatistic stat, const Dataset& data, const WeightsSource& wt) {
    data.check();
    const char* name = statistic_name(stat);
    const Eigen::Index n = data.n_rows();
    const Eigen::VectorXd x = residuals(data.truth, data.estimate);
    const bool any_missing = x.array().isNaN().any();
    if (std::holds_alternative<WeightsMatrix>(wt)) {
        if (data.group) throw std::invalid_argument(std::string(name) + ": grouped data needs a weights builder");
        if (any_missing)
            throw std::invalid_argument(std::string(name) + ": missing residuals need a weights builder");
    }

    std::vector<MetricResult> local_rows;
    if (is_local(stat)) {
        local_rows.resize(static_cast<std::size_t>(n));
        for (auto& row : local_rows) {
            row.metric = name;
            row.estimate = std::numeric_limits<double>::quiet_NaN();
        }
    }
    std::vector<MetricResult> global_rows;

    for (const GroupPartition& part : partition_by_group(data)) {
        std::vector<Eigen::Index> complete;
        for (Eigen::Index r : part.rows)
            if (!std::isnan(x[r])) complete.push_back(r);
        Eigen::VectorXd xs(static_cast<Eigen::Index>(complete.size()));
        for (std::size_t k = 0; k < complete.size(); ++k) xs[static_cast<Eigen::Index>(k)] = x[complete[k]];

        WeightsMatrix weights;
        if (const auto* fixed = std::get_if<WeightsMatrix>(&wt)) {
            weights = *fixed;
        } else {
            const Dataset sub = data.subset(complete);
            const auto* builder = std::get_if<WeightsBuilder>(&wt);
            weights = builder ? (*builder)(sub) : default_weights(sub);
        }

        if (!is_local(stat)) {
            MetricResult row;
            row.metric = name;
            row.group = part.label;
            row.n = xs.size();
            row.estimate = stat == AutocorrStatistic::GlobalMoranI ? global_moran_i(xs, weights)
                                                                  : global_geary_c(xs, weights);
            global_rows.push_back(std::move(row));
            continue;
        }

        LocalStatistic result;
        switch (stat) {
            case AutocorrStatistic::LocalMoranI: result.values = local_moran_i(xs, weights); break;
            case AutocorrStatistic::LocalGearyC: result.values = local_geary_c(xs, weights); break;
            case AutocorrStatistic::LocalGetisOrdG: result = local_getis_ord_g(xs, weights, false); break;
            case AutocorrStatistic::LocalGetisOrdGStar: result = local_getis_ord_g(xs, weights, true); break;
            default: break;
        }
        for (Eigen::Index r : part.rows) {
            auto& row = local_rows[static_cast<std::size_t>(r)];
            row.group = part.label;
            row.n = 1;
        }
        for (std::size_t k = 0; k < complete.size(); ++k) {
            auto& row = local_rows[static_cast<std::size_t>(complete[k])];
            row.estimate = result.values[static_cast<Eigen::Index>(k)];
        }
        for (const Note& note : result.notes)
            for (Eigen::Index k : note.rows) local_rows[static_cast<std::size_t>(complete[static_cast<std::size_t>(k)])].note = note.kind;
        for (Eigen::Index r : part.rows)
            if (std::isnan(x[r])) {
                local_rows[static_cast<std::size_t>(r)].n = 0;
                local_rows[static_cast<std::size_t>(r)].note = "missing_residual";
            }
    }
    return is_local(stat) ? local_rows : global_rows;
}

std::vector<MetricResult> global_moran_i(const Dataset& data, const WeightsSource& wt) {
    return evaluate_autocorr(AutocorrStatistic::GlobalMoranI, data, wt);
}
std::vector<MetricResult> local_moran_i(const Dataset& data, const WeightsSource& wt) {
    return evaluate_autocorr(AutocorrStatistic::LocalMoranI, data, wt);
}
std::vector<MetricResult> global_geary_c(const Dataset& data, const WeightsSource& wt) {
    return evaluate_autocorr(AutocorrStatistic::GlobalGearyC, data, wt);
}
std::vector<MetricResult> local_geary_c(const Dataset& data, const WeightsSource& wt) {
    return evaluate_autocorr(AutocorrStatistic::LocalGearyC, data, wt);
}
std::vector<MetricResult> local_getis_ord_g(const Dataset& data, const WeightsSource& wt, bool star) {
    return evaluate_autocorr(star ? AutocorrStatistic::LocalGetisOrdGStar : AutocorrStatistic::LocalGetisOrdG, data,
                             wt);
}

}  // namespace geowise
