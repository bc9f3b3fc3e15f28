#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "depthfilter/parallel.hpp"

namespace depthfilter {

/// Rows of the matrix are the points.
using Points = Eigen::MatrixXd;

/**
 * @brief Location vector and symmetric positive-definite scatter matrix.
 *
 * Construction validates symmetry (1e-12 relative) and factorizes the
 * scatter; a scatter that is not SPD raises NumericError.
 */
class LocationScatter {
public:
    LocationScatter(Eigen::VectorXd location, Eigen::MatrixXd scatter);

    Eigen::Index dim() const { return location_.size(); }
    const Eigen::VectorXd& location() const { return location_; }
    const Eigen::MatrixXd& scatter() const { return scatter_; }
    /// Lower Cholesky factor L with scatter = L L^T.
    Eigen::MatrixXd cholesky_factor() const { return llt_.matrixL(); }

    double mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    /// Squared distances of every row of `pts`.
    std::vector<double> mahalanobis_sq_rows(const Points& pts) const;

    /// Same ellipsoid restricted to coordinates `idx`.
    LocationScatter sub(const std::vector<Eigen::Index>& idx) const;

private:
    Eigen::VectorXd location_;
    Eigen::MatrixXd scatter_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

double mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd>& x, const LocationScatter& ls);

/// min(#{X_i <= x}, #{X_i >= x}) / n over closed half-lines.
double hs_depth_1d(double x, std::span<const double> sample);
/// Depth of every query against the same sample, O((n + q) log n).
std::vector<double> hs_depths_1d(std::span<const double> queries, std::span<const double> sample);

/**
 * Exact bivariate half-space depth by angular sweep around x.
 *
 * Points coinciding with x lie in every closed half-plane through x;
 * points in the same direction from x are merged with multiplicity.
 * O(n log n) per query.
 */
double hs_depth_exact_2d(const Eigen::Vector2d& x, const Points& sample);
std::vector<double> hs_depths_exact_2d(const Points& queries, const Points& sample);

/// A fixed set of unit directions (rows), drawn by normalizing standard normals.
class DirectionSet {
public:
    explicit DirectionSet(Eigen::MatrixXd directions);
    static DirectionSet random(std::size_t count, Eigen::Index dim, Rng& rng);

    std::size_t size() const { return static_cast<std::size_t>(dirs_.rows()); }
    Eigen::Index dim() const { return dirs_.cols(); }
    const Eigen::MatrixXd& matrix() const { return dirs_; }
    DirectionSet prefix(std::size_t count) const;

private:
    Eigen::MatrixXd dirs_;
};

/**
 * Random Tukey depth: min over directions u of the 1-D depth of u'x among
 * {u'X_i}. Never below the exact half-space depth.
 */
std::vector<double> random_tukey_depths(const Points& queries, const Points& sample,
                                        const DirectionSet& directions);
double random_tukey_depth(const Eigen::Ref<const Eigen::VectorXd>& x, const Points& sample,
                          std::size_t k, Rng& rng);

/// How sample depth is evaluated: exact for d <= 2, random Tukey above.
struct SampleDepthOptions {
    std::size_t n_directions = 5000;
    std::uint64_t seed = 0;
};

std::vector<double> sample_depths(const Points& queries, const Points& sample,
                                  const SampleDepthOptions& opts);

/// Elliptical closed form 1 - F01(sqrt(Delta)); `marginal_cdf` is the standardized marginal.
double hs_depth_elliptical(const Eigen::Ref<const Eigen::VectorXd>& x, const LocationScatter& ls,
                           const std::function<double(double)>& marginal_cdf);

/// Gervini-Yohai depth 1 - G(Delta).
double gy_depth(const Eigen::Ref<const Eigen::VectorXd>& x, const LocationScatter& ls,
                const std::function<double(double)>& cdf);

/// Deepest sample point; ties go to the lowest index.
std::pair<std::size_t, Eigen::VectorXd> max_depth_observation(const Points& sample,
                                                              const SampleDepthOptions& opts);

} // namespace depthfilter
