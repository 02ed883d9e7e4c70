#include "geowise/applicability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "geowise/error.hpp"
#include "geowise/io.hpp"
#include "geowise/nearest.hpp"
#include "geowise/numeric_format.hpp"
#include "geowise/parallel.hpp"

namespace geowise {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Scaling {
    Eigen::RowVectorXd centers;
    Eigen::RowVectorXd scales;
};

Scaling fit_scaling(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    if (x.rows() < 2) throw std::invalid_argument("need at least 2 rows to centre and scale predictors");
    Scaling s;
    s.centers = x.colwise().mean();
    s.scales = ((x.rowwise() - s.centers).colwise().squaredNorm() / static_cast<double>(x.rows() - 1)).cwiseSqrt();
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        if (!(s.scales[c] > 0.0) || !std::isfinite(s.scales[c]))
            throw std::invalid_argument("predictor '" + names[static_cast<std::size_t>(c)] +
                                        "' is constant (zero standard deviation)");
    return s;
}

Eigen::MatrixXd transform(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& centers,
                          const Eigen::RowVectorXd& scales, const Eigen::RowVectorXd& weights) {
    return ((x.rowwise() - centers).array().rowwise() / scales.array()).rowwise() * weights.array();
}

double row_distance(const Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index j) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < m.cols(); ++d) {
        const double diff = m(i, d) - m(j, d);
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

// Mean distance over unordered pairs; per-row partial sums are combined in
// row order so the result does not depend on the thread schedule.
double mean_pairwise_distance(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        for (std::size_t iu = begin; iu < end; ++iu) {
            const auto i = static_cast<Eigen::Index>(iu);
            double sum = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) sum += row_distance(m, i, j);
            partial[iu] = sum;
        }
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

KdTree<double> make_tree(const Eigen::MatrixXd& m) { return KdTree<double>(KdTree<double>::Matrix(m)); }

// Distance from each row of `queries` to its nearest row of the tree,
// excluding the same row index when `self` is set.
Eigen::VectorXd nearest_distances(const KdTree<double>& tree, const Eigen::MatrixXd& queries, bool self) {
    Eigen::VectorXd out(queries.rows());
    parallel_for(static_cast<std::size_t>(queries.rows()), [&](std::size_t begin, std::size_t end) {
        for (std::size_t iu = begin; iu < end; ++iu) {
            const auto i = static_cast<Eigen::Index>(iu);
            const auto hit = tree.nearest(queries.row(i), self ? i : -1);
            out[i] = std::sqrt(hit.squared_distance);
        }
    });
    return out;
}

Eigen::RowVectorXd importance_weights(const std::vector<Importance>& importance, std::vector<std::string>& names) {
    if (importance.empty()) throw std::invalid_argument("importance table is empty");
    Eigen::RowVectorXd w(static_cast<Eigen::Index>(importance.size()));
    std::set<std::string> seen;
    names.clear();
    for (std::size_t k = 0; k < importance.size(); ++k) {
        const Importance& imp = importance[k];
        if (!seen.insert(imp.term).second) throw std::invalid_argument("duplicate importance term '" + imp.term + "'");
        if (!std::isfinite(imp.estimate)) throw std::invalid_argument("importance for '" + imp.term + "' is not finite");
        if (imp.estimate < 0.0) throw std::invalid_argument("importance for '" + imp.term + "' is negative");
        names.push_back(imp.term);
        w[static_cast<Eigen::Index>(k)] = imp.estimate;
    }
    return w;
}

void require_complete(const Eigen::MatrixXd& x, const char* what) {
    if (x.array().isNaN().any()) throw std::invalid_argument(std::string(what) + " predictors contain missing values");
}

double threshold_of(const Eigen::VectorXd& di) {
    std::vector<double> v(di.data(), di.data() + di.size());
    const double q1 = quantile(v, 0.25);
    const double q3 = quantile(v, 0.75);
    return q3 + 1.5 * (q3 - q1);
}

void require_positive_dbar(double d_bar) {
    if (!(d_bar > 0.0)) throw ComputationError("mean pairwise training distance is zero (all importance zero?)");
}

std::vector<AoaPrediction> predict_rows(const AoaModel& model, const KdTree<double>& tree, const Eigen::MatrixXd& x) {
    std::vector<AoaPrediction> out(static_cast<std::size_t>(x.rows()));
    const Eigen::RowVectorXd centers = model.centers.transpose();
    const Eigen::RowVectorXd scales = model.scales.transpose();
    const Eigen::RowVectorXd weights = model.weights.transpose();
    parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t iu = begin; iu < end; ++iu) {
            const auto i = static_cast<Eigen::Index>(iu);
            if (x.row(i).array().isNaN().any()) {
                out[iu] = {kNaN, std::nullopt};
                continue;
            }
            const Eigen::RowVectorXd t =
                ((x.row(i) - centers).array() / scales.array() * weights.array()).matrix();
            const double di = std::sqrt(tree.nearest(t).squared_distance) / model.d_bar;
            out[iu] = {di, di <= model.threshold};
        }
    });
    return out;
}

}  // namespace

std::optional<Eigen::Index> PredictorTable::find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<Eigen::Index>(i);
    return std::nullopt;
}

Eigen::MatrixXd PredictorTable::select(const std::vector<std::string>& columns) const {
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto idx = find(columns[c]);
        if (!idx) throw InputError("missing predictor column '" + columns[c] + "'");
        out.col(static_cast<Eigen::Index>(c)) = values.col(*idx);
    }
    return out;
}

PredictorTable predictors_from_csv_text(const std::string& text) {
    const CsvTable table = parse_csv(text);
    PredictorTable out;
    out.names = table.header;
    out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t c = 0; c < table.header.size(); ++c)
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_double(table.rows[r][c]).value_or(kNaN);
    return out;
}

PredictorTable read_predictor_csv(const std::string& path) { return predictors_from_csv_text(read_text_file(path)); }

std::vector<Importance> read_importance_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::size_t ct = table.column("term"), ce = table.column("estimate");
    std::vector<Importance> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto value = parse_double(table.rows[r][ce]);
        if (!value) throw InputError("importance row " + std::to_string(r + 1) + ": non-numeric estimate");
        out.push_back({table.rows[r][ct], *value});
    }
    return out;
}

FoldSet folds_from_assignment(const std::vector<std::pair<Eigen::Index, long long>>& assignment, Eigen::Index n_rows) {
    std::map<long long, std::vector<Eigen::Index>> by_fold;
    std::set<Eigen::Index> seen;
    for (const auto& [row, fold] : assignment) {
        if (row < 0 || row >= n_rows) throw InputError("fold row_index " + std::to_string(row) + " out of range");
        if (!seen.insert(row).second) throw InputError("fold row_index " + std::to_string(row) + " listed twice");
        by_fold[fold].push_back(row);
    }
    FoldSet folds;
    for (auto& [id, assessment] : by_fold) {
        std::sort(assessment.begin(), assessment.end());
        Fold fold;
        fold.assessment = assessment;
        for (Eigen::Index r = 0; r < n_rows; ++r)
            if (!std::binary_search(assessment.begin(), assessment.end(), r)) fold.analysis.push_back(r);
        folds.push_back(std::move(fold));
    }
    return folds;
}

FoldSet read_folds_csv(const std::string& path, Eigen::Index n_rows) {
    const CsvTable table = read_csv(path);
    const std::size_t cr = table.column("row_index"), cf = table.column("fold_id");
    std::vector<std::pair<Eigen::Index, long long>> assignment;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto row = parse_double(table.rows[r][cr]);
        const auto fold = parse_double(table.rows[r][cf]);
        if (!row || !fold || std::floor(*row) != *row || std::floor(*fold) != *fold)
            throw InputError("folds row " + std::to_string(r + 1) + ": row_index and fold_id must be integers");
        assignment.emplace_back(static_cast<Eigen::Index>(*row), static_cast<long long>(*fold));
    }
    return folds_from_assignment(assignment, n_rows);
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw EmptyInputError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

AoaModel fit_aoa(const PredictorTable& training, const std::vector<Importance>& importance,
                 const std::optional<PredictorTable>& testing) {
    AoaModel model;
    const Eigen::RowVectorXd weights = importance_weights(importance, model.predictor_names);
    const Eigen::MatrixXd x = training.select(model.predictor_names);
    require_complete(x, "training");
    const Scaling scaling = fit_scaling(x, model.predictor_names);
    model.centers = scaling.centers.transpose();
    model.scales = scaling.scales.transpose();
    model.weights = weights.transpose();
    model.training_matrix = transform(x, scaling.centers, scaling.scales, weights);
    model.d_bar = mean_pairwise_distance(model.training_matrix);
    require_positive_dbar(model.d_bar);

    const KdTree<double> tree = make_tree(model.training_matrix);
    model.training_di = nearest_distances(tree, model.training_matrix, true) / model.d_bar;
    model.threshold = threshold_of(model.training_di);

    if (testing) {
        const auto predictions = predict_rows(model, tree, testing->select(model.predictor_names));
        model.testing_di.resize(static_cast<Eigen::Index>(predictions.size()));
        for (std::size_t i = 0; i < predictions.size(); ++i)
            model.testing_di[static_cast<Eigen::Index>(i)] = predictions[i].di;
    }
    return model;
}

AoaModel fit_aoa_cv(const PredictorTable& data, const FoldSet& folds, const std::vector<Importance>& importance) {
    if (folds.size() < 2) throw std::invalid_argument("cross-validation AOA needs at least 2 folds");
    AoaModel model;
    const Eigen::RowVectorXd weights = importance_weights(importance, model.predictor_names);
    const Eigen::MatrixXd x = data.select(model.predictor_names);
    require_complete(x, "training");

    std::vector<double> pooled;
    double d_bar_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Fold& fold = folds[f];
        if (fold.analysis.size() < 2)
            throw std::invalid_argument("fold " + std::to_string(f) + " has fewer than 2 analysis rows");
        for (Eigen::Index r : fold.assessment)
            if (std::find(fold.analysis.begin(), fold.analysis.end(), r) != fold.analysis.end())
                throw std::invalid_argument("fold " + std::to_string(f) + " uses row " + std::to_string(r) +
                                            " for both analysis and assessment");
        const Eigen::MatrixXd analysis = x(fold.analysis, Eigen::all);
        const Eigen::MatrixXd assessment = x(fold.assessment, Eigen::all);
        const Scaling scaling = fit_scaling(analysis, model.predictor_names);
        const Eigen::MatrixXd a = transform(analysis, scaling.centers, scaling.scales, weights);
        const Eigen::MatrixXd b = transform(assessment, scaling.centers, scaling.scales, weights);
        const double d_bar = mean_pairwise_distance(a);
        require_positive_dbar(d_bar);
        d_bar_sum += d_bar;
        const Eigen::VectorXd dk = nearest_distances(make_tree(a), b, false);
        for (Eigen::Index i = 0; i < dk.size(); ++i) pooled.push_back(dk[i] / d_bar);
    }
    if (pooled.empty()) throw EmptyInputError("folds have no assessment rows");

    model.training_di = Eigen::Map<Eigen::VectorXd>(pooled.data(), static_cast<Eigen::Index>(pooled.size()));
    model.threshold = threshold_of(model.training_di);
    const Scaling scaling = fit_scaling(x, model.predictor_names);
    model.centers = scaling.centers.transpose();
    model.scales = scaling.scales.transpose();
    model.weights = weights.transpose();
    model.training_matrix = transform(x, scaling.centers, scaling.scales, weights);
    model.d_bar = d_bar_sum / static_cast<double>(folds.size());
    return model;
}

std::vector<AoaPrediction> predict_aoa(const AoaModel& model, const PredictorTable& newdata) {
    const Eigen::MatrixXd x = newdata.select(model.predictor_names);
    return predict_rows(model, make_tree(model.training_matrix), x);
}

std::string summary(const AoaModel& model) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", model.threshold);
    return "# Predictors:\n   " + std::to_string(model.n_predictors()) + "\nArea-of-applicability threshold:\n   " +
           buf + "\n";
}

std::ostream& operator<<(std::ostream& os, const AoaModel& model) { return os << summary(model); }

std::string aoa_model_to_json(const AoaModel& model) {
    using nlohmann::ordered_json;
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < model.training_matrix.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(model.training_matrix.cols()));
        for (Eigen::Index c = 0; c < model.training_matrix.cols(); ++c) row[static_cast<std::size_t>(c)] = model.training_matrix(r, c);
        rows.push_back(row);
    }
    ordered_json doc = {
        {"format", "geowise-aoa-model"},
        {"version", 1},
        {"predictor_names", model.predictor_names},
        {"centers", vec(model.centers)},
        {"scales", vec(model.scales)},
        {"weights", vec(model.weights)},
        {"d_bar", model.d_bar},
        {"threshold", model.threshold},
        {"training_matrix", std::move(rows)},
    };
    return doc.dump(2) + "\n";
}

AoaModel aoa_model_from_json(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("AOA model: invalid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "geowise-aoa-model") throw InputError("AOA model: wrong format tag");
        if (doc.at("version").get<int>() != 1) throw InputError("AOA model: unsupported version");
        AoaModel model;
        model.predictor_names = doc.at("predictor_names").get<std::vector<std::string>>();
        auto vec = [&](const char* key) {
            auto v = doc.at(key).get<std::vector<double>>();
            if (v.size() != model.predictor_names.size())
                throw InputError(std::string("AOA model: '") + key + "' has the wrong length");
            return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        };
        model.centers = vec("centers");
        model.scales = vec("scales");
        model.weights = vec("weights");
        model.d_bar = doc.at("d_bar").get<double>();
        model.threshold = doc.at("threshold").get<double>();
        const auto rows = doc.at("training_matrix").get<std::vector<std::vector<double>>>();
        const auto p = model.n_predictors();
        model.training_matrix.resize(static_cast<Eigen::Index>(rows.size()), p);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (static_cast<Eigen::Index>(rows[r].size()) != p) throw InputError("AOA model: ragged training matrix");
            for (Eigen::Index c = 0; c < p; ++c)
                model.training_matrix(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
        }
        if (!(model.d_bar > 0.0) || !(model.threshold >= 0.0) || model.training_matrix.rows() == 0)
            throw InputError("AOA model: invalid d_bar, threshold or training matrix");
        return model;
    } catch (const json::exception& e) {
        throw InputError(std::string("AOA model: ") + e.what());
    }
}

}  // namespace geowise
