#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "depthfilter/data.hpp"
#include "depthfilter/filter.hpp"
#include "depthfilter/parallel.hpp"
#include "depthfilter/reference.hpp"

namespace depthfilter {

enum class ScenarioKind { Clean, CellWise, CaseWise, Mixed };

std::string_view to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(std::string_view name);

struct Scenario {
    ScenarioKind kind = ScenarioKind::Clean;
    std::size_t p = 10;
    std::size_t n = 100;
    double eps_cell = 0.0;
    double eps_case = 0.0;
    double k = 0.0;
    Eigen::MatrixXd sigma0; ///< empty means identity
    std::size_t replicates = 50;
    std::uint64_t seed = 0;

    Eigen::MatrixXd sigma() const;
    /// Throws ConfigError on out-of-range fields.
    void validate() const;
};

/// Contaminated data plus the ground-truth positions of replaced cells and rows.
struct Contaminated {
    DataMatrix data;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    std::vector<std::size_t> rows;
};

DataMatrix gen_clean(const Scenario& s, Rng& rng);

/// floor(eps n p) uniformly chosen cells replaced by N(k, 0.1^2) draws.
Contaminated contaminate_cellwise(const DataMatrix& m, double eps, double k, Rng& rng);
/// floor(eps n) uniformly chosen rows replaced by 0.5 N(c v, 0.1^2 I) + 0.5 N(-c v, 0.1^2 I).
Contaminated contaminate_casewise(const DataMatrix& m, double eps, double k, const Eigen::MatrixXd& sigma0,
                                  Rng& rng);
/// Case-wise first, then cell-wise over the rows that were not replaced.
Contaminated contaminate_mixed(const DataMatrix& m, double eps_case, double eps_cell, double k,
                               const Eigen::MatrixXd& sigma0, Rng& rng);

/// Smallest-eigenvalue eigenvector of sigma0 scaled to v' sigma0^-1 v = 1.
Eigen::VectorXd casewise_direction(const Eigen::MatrixXd& sigma0);

/// Seeded random correlation matrix (normalized Wishart-type draw).
Eigen::MatrixXd random_correlation(std::size_t p, Rng& rng);

double mse_metric(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& mu0);
/// trace(S Sigma0^-1) - log det(S Sigma0^-1) - p.
double lrt_divergence(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& sigma0);
double lrt_metric(const std::vector<Eigen::MatrixXd>& estimates, const Eigen::MatrixXd& sigma0);

/// An estimator in an experiment: raw EM (no filter) or a filter pipeline followed by EM.
struct MethodSpec {
    std::string name;
    std::optional<FilterMethod> filter;
    StageSet stages;
};

/// MLE, GY-UF, GY-UBF, HS-UF, HS-UBF, HS-UBPF.
std::vector<MethodSpec> standard_methods();
MethodSpec find_method(std::string_view name);

struct ReplicateRecord {
    std::size_t scenario = 0;
    std::string method;
    std::size_t replicate = 0;
    bool ok = false;
    std::string error;
    double sq_error = 0.0; ///< |mu_hat - mu0|^2
    double lrt = 0.0;
    std::size_t filtered_cells = 0;
    double recall = 0.0;    ///< share of contaminated cells that were filtered
    double precision = 0.0; ///< share of filtered cells that were contaminated (1 when none filtered)
};

struct AggregateRow {
    std::size_t scenario = 0;
    Scenario spec;
    std::string method;
    std::size_t replicates = 0;
    std::size_t failures = 0;
    double mean_lrt = 0.0;
    double mean_mse = 0.0;
    double mean_recall = 0.0;
    double mean_precision = 0.0;
};

/// Worst k per (kind, p, n, eps, method) group.
struct MaxRow {
    Scenario spec; ///< k holds the argmax of the average LRT
    std::string method;
    double max_lrt = 0.0;
    double k_at_max_lrt = 0.0;
    double max_mse = 0.0;
    double k_at_max_mse = 0.0;
};

struct ExperimentResult {
    std::vector<ReplicateRecord> replicates;
    std::vector<AggregateRow> rows;
    std::vector<MaxRow> max_rows;
};

struct ExperimentOptions {
    FilterConfig filter; ///< method and stages are overridden per MethodSpec
    std::size_t threads = 1;
};

/**
 * Runs every scenario x method for the scenario's replicate count. All
 * methods see the same contaminated data within a replicate; replicate
 * seeds derive from (scenario seed, scenario index, replicate). A failing
 * replicate is recorded and excluded from the averages.
 */
ExperimentResult run_experiment(const std::vector<Scenario>& grid, const std::vector<MethodSpec>& methods,
                                const ExperimentOptions& opts);

/// Max-over-k rows recomputed from aggregate rows.
std::vector<MaxRow> max_over_k(const std::vector<AggregateRow>& rows);

struct SnInjectionConfig {
    std::size_t base_n = 100;
    Eigen::Vector2d center{-0.2, -0.25};
    std::size_t outlier_count = 20;
    double outlier_sd = 0.1;
    SkewNormalParams params;
    double beta = 0.99;
    double alpha = 0.95;
    std::uint64_t seed = 0;
    ApproxOptions approx;
};

struct SnInjectionStep {
    std::size_t added = 0;
    double hs_dn = 0.0;
    std::size_t hs_n0 = 0;
    std::size_t hs_injected_flagged = 0;
    double gy_dn = 0.0;
    std::size_t gy_n0 = 0;
    std::size_t gy_injected_flagged = 0;
};

struct SnInjectionResult {
    std::vector<SnInjectionStep> steps; ///< steps[0] is the clean base sample
    std::vector<std::size_t> hs_flagged; ///< final step; indices >= base_n are injected points
    std::vector<std::size_t> gy_flagged;
    Points data;
};

/**
 * Draws base_n skew-normal points, then adds N2(center, sd^2 I) outliers one
 * at a time, running the HS filter with the true skew-normal reference and
 * the GY filter with its true mean and covariance after each addition.
 * Pass `ref` to reuse a prepared reference across seeds.
 */
SnInjectionResult sn_injection_experiment(const SnInjectionConfig& cfg, const ReferenceDistribution* ref = nullptr);

/// Bivariate skew-normal law used by the "sn-injection" preset.
SkewNormalParams sn_injection_law();
/// Outlier centres of the two injection runs: inside and outside the Mahalanobis boundary.
std::vector<Eigen::Vector2d> sn_injection_centers();
inline constexpr std::size_t kSnInjectionSeeds = 25;

/// Named desk-scale presets: "table1-desk", "table2-desk", "clean-desk".
std::vector<Scenario> preset_grid(std::string_view name);
std::vector<std::string> preset_names();

} // namespace depthfilter
