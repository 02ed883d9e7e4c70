#pragma once

#include <Eigen/Core>
#include <functional>
#include <variant>
#include <vector>

#include "geowise/dataset.hpp"
#include "geowise/weights.hpp"

// Global and local spatial autocorrelation of residuals x = truth − estimate.
//
// Kernels take the residual vector and a weights matrix. `_vec` forms take
// truth and estimate vectors and require explicit weights. Table forms take
// a Dataset and a WeightsSource; with no source, weights are built from the
// point geometry (1 nearest neighbour, row-standardized).
namespace geowise {

// Under no autocorrelation E[I] = −1/(n−1) and E[c] = 1.
double global_moran_i(const Eigen::VectorXd& x, const WeightsMatrix& w);
// I_i = z_i Σ_j w_ij z_j / m², m² = Σ z² / n, z = x − mean(x).
Eigen::VectorXd local_moran_i(const Eigen::VectorXd& x, const WeightsMatrix& w);
double global_geary_c(const Eigen::VectorXd& x, const WeightsMatrix& w);
// c_i = Σ_j w_ij (x_i − x_j)².
Eigen::VectorXd local_geary_c(const Eigen::VectorXd& x, const WeightsMatrix& w);

struct LocalStatistic {
    Eigen::VectorXd values;
    std::vector<Note> notes;
};

// Getis-Ord Z(G_i), or Z(G_i*) when `star` (each row gains a self-weight of 1
// on top of its existing weights). Rows whose variance term vanishes are NaN
// and listed in a "zero_variance" note.
LocalStatistic local_getis_ord_g(const Eigen::VectorXd& x, const WeightsMatrix& w, bool star = false);

Eigen::VectorXd residuals(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate);

double global_moran_i_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, const WeightsMatrix& w);
Eigen::VectorXd local_moran_i_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate,
                                  const WeightsMatrix& w);
double global_geary_c_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, const WeightsMatrix& w);
Eigen::VectorXd local_geary_c_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate,
                                  const WeightsMatrix& w);
LocalStatistic local_getis_ord_g_vec(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate,
                                     const WeightsMatrix& w, bool star = false);

using WeightsBuilder = std::function<WeightsMatrix(const Dataset&)>;

// Explicit weights, a builder applied to the (complete, per-group) data, or
// nothing for the default builder.
using WeightsSource = std::variant<std::monostate, WeightsMatrix, WeightsBuilder>;

// 1-nearest-neighbour row-standardized weights from point geometry.
WeightsMatrix default_weights(const Dataset& data);

enum class AutocorrStatistic {
    GlobalMoranI,
    LocalMoranI,
    GlobalGearyC,
    LocalGearyC,
    LocalGetisOrdG,
    LocalGetisOrdGStar,
};

const char* statistic_name(AutocorrStatistic stat);
// Throws InputError for unknown names.
AutocorrStatistic parse_statistic(const std::string& name);
bool is_local(AutocorrStatistic stat);

// Global statistics: one row per group. Local statistics: one row per input
// row, in input order. Rows with a missing residual are excluded from the
// computation (local rows report NaN); weights are then built on the
// complete rows, which requires a builder rather than a fixed matrix.
std::vector<MetricResult> evaluate_autocorr(AutocorrStatistic stat, const Dataset& data,
                                            const WeightsSource& wt = {});

std::vector<MetricResult> global_moran_i(const Dataset& data, const WeightsSource& wt = {});
std::vector<MetricResult> local_moran_i(const Dataset& data, const WeightsSource& wt = {});
std::vector<MetricResult> global_geary_c(const Dataset& data, const WeightsSource& wt = {});
std::vector<MetricResult> local_geary_c(const Dataset& data, const WeightsSource& wt = {});
std::vector<MetricResult> local_getis_ord_g(const Dataset& data, const WeightsSource& wt = {}, bool star = false);

}  // namespace geowise
