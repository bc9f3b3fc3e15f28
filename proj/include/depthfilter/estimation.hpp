#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "depthfilter/data.hpp"

namespace depthfilter {

inline constexpr double kMadConsistency = 1.4826;

/// Midpoint of the two middle values for even sizes.
double median(std::span<const double> xs);
/// scale * median(|x - median(x)|).
double mad(std::span<const double> xs, double scale = kMadConsistency);

struct EstimatorResult {
    Eigen::VectorXd location;
    Eigen::MatrixXd scatter;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> loglik_trace;
    std::string estimator;
};

struct EmOptions {
    double tol = 1e-10;          ///< relative log-likelihood change
    std::size_t max_iter = 1000;
};

/**
 * Gaussian maximum likelihood under arbitrary missingness patterns (EM).
 *
 * Rows without any observed cell are ignored. The covariance uses the 1/n
 * convention, so complete data give the closed-form MLE after one step.
 * Throws NumericError naming the column when a column has no observed cell,
 * or when fewer than p + 1 rows carry information.
 */
EstimatorResult em_gaussian_missing(const DataMatrix& m, const EmOptions& opts = {});

/**
 * Orthogonalized Gnanadesikan-Kettenring scatter on complete rows.
 *
 * Columns are standardized by median and MAD, pairwise covariances come from
 * MAD of sums and differences, and the scales are re-estimated along the
 * eigenvectors of that matrix. Gaussian consistent. Throws NumericError when a
 * robust scale along a column or eigenvector is zero.
 */
EstimatorResult ogk_scatter(const Eigen::MatrixXd& x, double scale = kMadConsistency);

/// Observed-data Gaussian log-likelihood.
double observed_loglik(const DataMatrix& m, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

/// Second-step estimator: consumes a matrix with NA cells, returns location/scatter.
using SecondStepEstimator = std::function<EstimatorResult(const DataMatrix&, const EmOptions&)>;

/// Registered estimators by name. "em-gaussian" is always present.
void register_estimator(const std::string& name, SecondStepEstimator est);
const SecondStepEstimator& find_estimator(const std::string& name);
std::vector<std::string> estimator_names();

} // namespace depthfilter
