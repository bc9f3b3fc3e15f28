#include "depthfilter/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"

namespace depthfilter {

std::string_view to_string(FilterMethod m) { return m == FilterMethod::HS ? "hs" : "gy"; }

FilterMethod parse_filter_method(std::string_view name) {
    if (name == "hs" || name == "HS") return FilterMethod::HS;
    if (name == "gy" || name == "GY") return FilterMethod::GY;
    throw ConfigError("unknown filter method '" + std::string(name) + "' (expected hs or gy)");
}

StageSet parse_stages(std::string_view text) {
    StageSet s{false, false, false};
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        auto tok = text.substr(start, end - start);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        if (tok == "u" || tok == "univariate")
            s.univariate = true;
        else if (tok == "b" || tok == "bivariate")
            s.bivariate = true;
        else if (tok == "p" || tok == "pvariate")
            s.pvariate = true;
        else
            throw ConfigError("unknown stage '" + std::string(tok) + "' (expected u, b or p)");
        start = end + 1;
    }
    return s;
}

std::string to_string(const StageSet& s) {
    std::string out;
    auto add = [&](bool on, const char* tag) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += tag;
    };
    add(s.univariate, "u");
    add(s.bivariate, "b");
    add(s.pvariate, "p");
    return out;
}

void FilterConfig::validate() const {
    auto open_unit = [](double v, const char* name) {
        if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
    };
    open_unit(beta, "beta");
    open_unit(alpha, "alpha");
    open_unit(delta, "delta");
    open_unit(binom_q, "binom_q");
    if (n_directions < 1) throw ConfigError("n_directions must be at least 1");
    if (!(em_tol > 0.0)) throw ConfigError("em_tol must be positive");
    if (em_max_iter < 1) throw ConfigError("em_max_iter must be at least 1");
    if (!(mad_scale > 0.0)) throw ConfigError("mad_scale must be positive");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (!stages.univariate && !stages.bivariate && !stages.pvariate) throw ConfigError("no stage selected");
    if (method == FilterMethod::HS && ref_family != ReferenceFamily::Gaussian &&
        ref_family != ReferenceFamily::StudentT5)
        throw ConfigError("pipeline references must be gaussian or t5 (got " + std::string(to_string(ref_family)) +
                          ")");
    find_estimator(estimator);
    if (init_scatter != "ogk" && init_scatter != "second-step")
        throw ConfigError("init_scatter must be ogk or second-step (got '" + init_scatter + "')");
}

std::size_t flag_count(std::size_t n, double d_n) {
    if (!(d_n > 0.0)) return 0;
    const double raw = std::floor(static_cast<double>(n) * d_n + 1e-9);
    const std::size_t cap = (n + 1) / 2;
    return std::min(static_cast<std::size_t>(raw), cap);
}

FilterOutcome hs_filter(const Points& sample, const ReferenceDistribution& ref, const DepthRegionSpec& spec,
                        const SampleDepthOptions& depth_opts) {
    const auto theo = ref.theoretical_depths(sample);
    return hs_filter(sample, ref, spec, depth_opts, theo);
}

FilterOutcome hs_filter(const Points& sample, const ReferenceDistribution& ref, const DepthRegionSpec& spec,
                        const SampleDepthOptions& depth_opts, std::span<const double> theoretical) {
    const auto n = static_cast<std::size_t>(sample.rows());
    if (n == 0) throw std::invalid_argument("hs_filter: empty sample");
    if (theoretical.size() != n) throw std::invalid_argument("hs_filter: theoretical depth count mismatch");

    const auto maha = ref.location_scatter().mahalanobis_sq_rows(sample);
    std::vector<Eigen::Index> region;
    for (std::size_t i = 0; i < n; ++i) {
        const bool inside = ref.is_elliptical() ? maha[i] >= spec.delta_cutoff : theoretical[i] <= spec.eta_beta;
        if (inside) region.push_back(static_cast<Eigen::Index>(i));
    }

    FilterOutcome out;
    out.stage = "hs";
    out.n = n;
    if (region.empty()) return out;

    Points queries(static_cast<Eigen::Index>(region.size()), sample.cols());
    for (std::size_t r = 0; r < region.size(); ++r) queries.row(static_cast<Eigen::Index>(r)) = sample.row(region[r]);
    const auto emp = sample_depths(queries, sample, depth_opts);

    double d_n = 0.0;
    for (std::size_t r = 0; r < region.size(); ++r)
        d_n = std::max(d_n, emp[r] - theoretical[static_cast<std::size_t>(region[r])]);
    out.d_n = d_n;
    out.n0 = flag_count(n, d_n);
    if (out.n0 == 0) return out;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (theoretical[a] != theoretical[b]) return theoretical[a] < theoretical[b];
        return maha[a] > maha[b];
    });
    out.flagged.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(out.n0));
    std::sort(out.flagged.begin(), out.flagged.end());
    return out;
}

double gy_dn(std::span<const double> deltas, double dof, double alpha) {
    const double eta = chi2_quantile(dof, alpha);
    std::vector<double> sorted(deltas.begin(), deltas.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d_n = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < eta) continue;
        d_n = std::max(d_n, chi2_cdf(sorted[i], dof) - static_cast<double>(i) / n);
    }
    return d_n;
}

FilterOutcome gy_filter(const Points& sample, const LocationScatter& ls, double alpha) {
    const auto n = static_cast<std::size_t>(sample.rows());
    if (n == 0) throw std::invalid_argument("gy_filter: empty sample");
    const auto maha = ls.mahalanobis_sq_rows(sample);

    FilterOutcome out;
    out.stage = "gy";
    out.n = n;
    out.d_n = gy_dn(maha, static_cast<double>(sample.cols()), alpha);
    out.n0 = flag_count(n, out.d_n);
    if (out.n0 == 0) return out;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return maha[a] > maha[b]; });
    out.flagged.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(out.n0));
    std::sort(out.flagged.begin(), out.flagged.end());
    return out;
}

} // namespace depthfilter
