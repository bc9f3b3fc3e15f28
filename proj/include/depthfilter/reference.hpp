#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "depthfilter/depth.hpp"
#include "depthfilter/parallel.hpp"

namespace depthfilter {

enum class ReferenceFamily { Gaussian, StudentT5, SkewNormal, EmpiricalApprox };

std::string_view to_string(ReferenceFamily f);
/// Accepts "gaussian", "t5", "skewnormal", "empirical". Throws ConfigError otherwise.
ReferenceFamily parse_reference_family(std::string_view name);

/// Degrees of freedom of the Student-t reference.
inline constexpr double kStudentDof = 5.0;

/// Parameters of SN_d(xi, Omega, alpha).
struct SkewNormalParams {
    Eigen::VectorXd xi;
    Eigen::MatrixXd omega;
    Eigen::VectorXd alpha;
};

struct MeanCov {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Mean and covariance of a skew-normal law. Throws NumericError if Omega is not SPD.
MeanCov sn_mean_cov(const SkewNormalParams& params);

/// Settings for references whose depth is not available in closed form.
struct ApproxOptions {
    std::size_t reference_size = 100000; ///< M, reference draws used for the C^beta threshold
    std::size_t n_directions = 5000;
    std::uint64_t seed = 0x5eedf00dULL;
    std::size_t threads = 1;
};

/**
 * @brief Reference law F for a depth filter.
 *
 * Gaussian and Student-t(5) are elliptical and have closed-form depth.
 * Skew-normal depth is the half-space depth of the exact law: the minimum
 * over directions of the projected (univariate skew-normal) CDF. For d = 2
 * the minimum over the circle is located by a grid search refined with
 * golden-section steps; for d >= 3 a fixed random direction set is used.
 * EmpiricalApprox uses random Tukey depth against a stored sample.
 *
 * Non-elliptical references draw M points at construction and store their
 * sorted depths, from which the C^beta threshold is read. Objects are
 * immutable and cheap to copy.
 */
class ReferenceDistribution {
public:
    static ReferenceDistribution gaussian(LocationScatter ls);
    static ReferenceDistribution student_t5(LocationScatter ls);
    static ReferenceDistribution elliptical(ReferenceFamily family, LocationScatter ls);
    static ReferenceDistribution skew_normal(const SkewNormalParams& params, ApproxOptions opts = {});
    /// `sample` must have at least 1000 rows.
    static ReferenceDistribution empirical(Points sample, ApproxOptions opts = {});

    ReferenceFamily family() const { return family_; }
    Eigen::Index dim() const { return ls_->dim(); }
    bool is_elliptical() const {
        return family_ == ReferenceFamily::Gaussian || family_ == ReferenceFamily::StudentT5;
    }

    /// Elliptical: the (mu, Sigma) parameters. Otherwise the law's mean and covariance.
    const LocationScatter& location_scatter() const { return *ls_; }

    /// Standardized marginal CDF F01. Throws ConfigError for non-elliptical families.
    double marginal_cdf(double t) const;
    /// Mahalanobis radius^2 bounding the region of probability beta (elliptical only).
    double delta_cutoff(double beta) const;

    double theoretical_depth(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    std::vector<double> theoretical_depths(const Points& queries) const;

    Points sample(std::size_t n, Rng& rng) const;

    /// Sorted depths of the M stored reference draws (non-elliptical only).
    const std::vector<double>& reference_depths() const;

    const SkewNormalParams* skew_normal_params() const;

private:
    struct Approx;
    ReferenceDistribution(ReferenceFamily family, std::shared_ptr<const LocationScatter> ls,
                          std::shared_ptr<const Approx> approx)
        : family_(family), ls_(std::move(ls)), approx_(std::move(approx)) {}

    ReferenceFamily family_;
    std::shared_ptr<const LocationScatter> ls_;
    std::shared_ptr<const Approx> approx_;
};

/// C^beta(F) description: probability beta and depth threshold eta_beta.
struct DepthRegionSpec {
    double beta = 0.99;
    double eta_beta = 0.0;
    /// Elliptical references only: C^beta = {Delta >= delta_cutoff}. NaN otherwise.
    double delta_cutoff = 0.0;
};

DepthRegionSpec prepare_region(const ReferenceDistribution& ref, double beta);
bool cbeta_contains(const Eigen::Ref<const Eigen::VectorXd>& x, const ReferenceDistribution& ref,
                    const DepthRegionSpec& spec);
double theoretical_depth(const Eigen::Ref<const Eigen::VectorXd>& x, const ReferenceDistribution& ref);
double marginal_cdf(const ReferenceDistribution& ref, double t);
Points sample(const ReferenceDistribution& ref, std::size_t n, Rng& rng);
/// Closed form 1 - F01(sqrt(Delta)); ConfigError for non-elliptical references.
double hs_depth_elliptical(const Eigen::Ref<const Eigen::VectorXd>& x, const ReferenceDistribution& ref);

} // namespace depthfilter
