#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "depthfilter/data.hpp"
#include "depthfilter/depth.hpp"
#include "depthfilter/estimation.hpp"
#include "depthfilter/reference.hpp"

namespace depthfilter {

enum class FilterMethod { HS, GY };

std::string_view to_string(FilterMethod m);
FilterMethod parse_filter_method(std::string_view name);

struct StageSet {
    bool univariate = true;
    bool bivariate = true;
    bool pvariate = true;
};

/// Parses "u,b,p" style lists (also accepts full stage names).
StageSet parse_stages(std::string_view text);
std::string to_string(const StageSet& s);

struct FilterConfig {
    FilterMethod method = FilterMethod::HS;
    StageSet stages;
    double beta = 0.99;     ///< probability content of R^beta; C^beta has mass 1 - beta
    double alpha = 0.95;    ///< GY: eta = G^-1(alpha)
    double delta = 0.1;     ///< binomial success probability for cell consolidation
    double binom_q = 0.99;  ///< binomial quantile order
    std::size_t n_directions = 5000;
    ReferenceFamily ref_family = ReferenceFamily::Gaussian;
    std::uint64_t seed = 0;
    double em_tol = 1e-10;
    std::size_t em_max_iter = 1000;
    double mad_scale = kMadConsistency;
    std::size_t min_pair_rows = 10;
    std::size_t tuple_cap = 10000;
    std::size_t threads = 1;
    std::string estimator = "em-gaussian";
    std::string init_scatter = "ogk";  ///< d > 1 initial scatter: "ogk" or "second-step"

    /// Throws ConfigError on out-of-range values.
    void validate() const;
    EmOptions em_options() const { return {em_tol, em_max_iter}; }
};

/**
 * Result of one d-variate filter invocation.
 *
 * `flagged` holds sample indices for the bare filters (hs_filter, gy_filter)
 * and data-matrix row indices once a stage has mapped them back.
 */
struct FilterOutcome {
    std::string stage;
    std::vector<std::size_t> columns;
    std::size_t n = 0;
    double d_n = 0.0;
    std::size_t n0 = 0;
    std::vector<std::size_t> flagged;
    bool skipped = false;
    std::string note;
};

/// m_ij and c_ij for a cell that took part in at least one flagged pair.
struct CellCount {
    std::size_t row;
    std::size_t col;
    std::size_t m;
    std::size_t c;
    bool flagged;
};

struct PipelineReport {
    FilterConfig config;
    std::vector<FilterOutcome> univariate;
    std::vector<FilterOutcome> bivariate;
    std::optional<FilterOutcome> pvariate;
    std::vector<FilterOutcome> tuples; ///< sequence_filter outcomes for d >= 2
    CellFlags flags;
    PairFlagSet pairs;
    std::vector<CellCount> cell_counts;
    std::size_t cellwise_flags = 0;
    std::size_t casewise_rows = 0;
    std::vector<std::string> warnings;
};

/// floor(n * d_n) with a small slack so exact multiples of 1/n are not lost to rounding.
std::size_t flag_count(std::size_t n, double d_n);

/**
 * Half-space depth filter.
 *
 * d_n is the largest positive excess of sample depth over reference depth
 * among sample points inside C^beta(F). The n0 = floor(n d_n) points with
 * the smallest reference depth are flagged; ties go to the larger
 * Mahalanobis distance, then the lower index.
 */
FilterOutcome hs_filter(const Points& sample, const ReferenceDistribution& ref, const DepthRegionSpec& spec,
                        const SampleDepthOptions& depth_opts);
/// Same, with the reference depths of the sample already computed.
FilterOutcome hs_filter(const Points& sample, const ReferenceDistribution& ref, const DepthRegionSpec& spec,
                        const SampleDepthOptions& depth_opts, std::span<const double> theoretical);

/// Gervini-Yohai filter with G = chi2_d, eta = G^-1(alpha); flags the largest distances.
FilterOutcome gy_filter(const Points& sample, const LocationScatter& ls, double alpha);
/// Order-statistic evaluation of sup_{D >= eta} {G(D) - H_n(D-)}^+ for given squared distances.
double gy_dn(std::span<const double> deltas, double dof, double alpha);

std::pair<CellFlags, std::vector<FilterOutcome>> univariate_stage(const DataMatrix& m, const FilterConfig& cfg,
                                                                  const CellFlags& flags);
std::pair<PairFlagSet, std::vector<FilterOutcome>> bivariate_stage(const DataMatrix& m, const FilterConfig& cfg,
                                                                   const CellFlags& flags);
CellFlags cell_flag_stage(const PairFlagSet& pairs, const CellFlags& flags, double delta, double q,
                          std::vector<CellCount>* counts = nullptr);
std::pair<CellFlags, FilterOutcome> pvariate_stage(const DataMatrix& m, const FilterConfig& cfg,
                                                   const CellFlags& flags);

PipelineReport run_pipeline(const DataMatrix& m, const FilterConfig& cfg);

/**
 * Generic dimension sequence d_1 < ... < d_k: each level filters every
 * d-tuple of columns over rows whose tuple cells survived the lower levels,
 * then masks the cells of flagged tuples (whole rows when d = p). There is
 * no binomial consolidation step.
 */
PipelineReport sequence_filter(const DataMatrix& m, const std::vector<std::size_t>& dims, const FilterConfig& cfg);

/// Filter, mask flagged cells, then run the configured second-step estimator.
std::pair<PipelineReport, EstimatorResult> two_step(const DataMatrix& m, const FilterConfig& cfg);

/// d-variate filter on the columns `cols` over rows usable under `flags` (shared by the stages).
FilterOutcome tuple_filter(const DataMatrix& m, const CellFlags& flags, const std::vector<std::size_t>& cols,
                           const FilterConfig& cfg, std::uint64_t task_seed, std::size_t min_rows);

} // namespace depthfilter
