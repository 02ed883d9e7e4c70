#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geowise/dataset.hpp"

// Dissimilarity index (DI) and area of applicability (AOA).
//
// Predictors are centred and scaled, then multiplied by their importance.
// DI of a point is its Euclidean distance to the nearest training point in
// that space divided by d̄, the mean distance over all unordered training
// pairs. The AOA threshold is Q75 + 1.5 * IQR of the training DI values.
namespace geowise {

// Named numeric columns; rows are observations.
struct PredictorTable {
    std::vector<std::string> names;
    Eigen::MatrixXd values;

    Eigen::Index rows() const { return values.rows(); }
    std::optional<Eigen::Index> find(const std::string& name) const;
    // The named columns in the given order; InputError for a missing name.
    Eigen::MatrixXd select(const std::vector<std::string>& columns) const;
};

// Every column parsed as numbers; empty or non-numeric cells become NaN.
PredictorTable read_predictor_csv(const std::string& path);
PredictorTable predictors_from_csv_text(const std::string& text);

struct Importance {
    std::string term;
    double estimate = 0.0;
};

// CSV with columns term,estimate.
std::vector<Importance> read_importance_csv(const std::string& path);

// Partitions of the rows of one table into analysis and assessment sets.
struct Fold {
    std::vector<Eigen::Index> analysis;
    std::vector<Eigen::Index> assessment;
};
using FoldSet = std::vector<Fold>;

// One fold per distinct id (ascending); its assessment set is the rows with
// that id and its analysis set every other row of an `n_rows` table.
FoldSet folds_from_assignment(const std::vector<std::pair<Eigen::Index, long long>>& assignment,
                              Eigen::Index n_rows);
// CSV with columns row_index (0-based), fold_id (integer).
FoldSet read_folds_csv(const std::string& path, Eigen::Index n_rows);

struct AoaModel {
    std::vector<std::string> predictor_names;
    Eigen::VectorXd centers;
    Eigen::VectorXd scales;
    Eigen::VectorXd weights;
    double d_bar = 0.0;
    double threshold = 0.0;
    // Centred, scaled and weighted training rows.
    Eigen::MatrixXd training_matrix;
    // DI of the training (or pooled cross-validation assessment) points that
    // produced the threshold, and of the testing rows when supplied.
    Eigen::VectorXd training_di;
    Eigen::VectorXd testing_di;

    Eigen::Index n_predictors() const { return static_cast<Eigen::Index>(predictor_names.size()); }
};

// "# Predictors:\n   p\nArea-of-applicability threshold:\n   t\n"
std::string summary(const AoaModel& model);
std::ostream& operator<<(std::ostream& os, const AoaModel& model);

// Predictor columns are the importance terms, in importance order. Training
// rows must be complete. The testing table only feeds testing_di.
AoaModel fit_aoa(const PredictorTable& training, const std::vector<Importance>& importance,
                 const std::optional<PredictorTable>& testing = std::nullopt);

// Per fold: centre/scale on the analysis rows, d̄_f over analysis pairs, and
// DI of each assessment row against the analysis rows; the threshold comes
// from the pooled assessment DI. The returned model centres/scales on the
// whole table and uses the mean of the fold d̄_f values.
AoaModel fit_aoa_cv(const PredictorTable& data, const FoldSet& folds, const std::vector<Importance>& importance);

struct AoaPrediction {
    double di = 0.0;             // NaN when any predictor is missing
    std::optional<bool> aoa;     // empty when any predictor is missing
};

std::vector<AoaPrediction> predict_aoa(const AoaModel& model, const PredictorTable& newdata);

// Linear interpolation between order statistics, position (k − 1)/(n − 1).
double quantile(std::vector<double> values, double prob);

std::string aoa_model_to_json(const AoaModel& model);
AoaModel aoa_model_from_json(const std::string& text);

}  // namespace geowise
