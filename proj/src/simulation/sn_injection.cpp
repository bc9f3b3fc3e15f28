#include "depthfilter/errors.hpp"
#include "depthfilter/simulation.hpp"

namespace depthfilter {

SkewNormalParams sn_injection_law() {
    SkewNormalParams p;
    p.xi = Eigen::Vector2d(0.0, 0.0);
    p.omega.resize(2, 2);
    p.omega << 1.0, -0.3, -0.3, 1.0;
    p.alpha = Eigen::Vector2d(10.0, 10.0);
    return p;
}

std::vector<Eigen::Vector2d> sn_injection_centers() { return {{-0.2, -0.25}, {-0.5, -0.6}}; }

SnInjectionResult sn_injection_experiment(const SnInjectionConfig& cfg, const ReferenceDistribution* ref) {
    if (cfg.params.xi.size() != 2) throw ConfigError("sn injection: the skew-normal law must be bivariate");
    if (cfg.base_n < 1) throw ConfigError("sn injection: base_n must be positive");
    std::optional<ReferenceDistribution> own;
    if (ref == nullptr) {
        own = ReferenceDistribution::skew_normal(cfg.params, cfg.approx);
        ref = &*own;
    }
    if (ref->family() != ReferenceFamily::SkewNormal || ref->dim() != 2)
        throw ConfigError("sn injection: reference must be a bivariate skew-normal law");

    const auto region = prepare_region(*ref, cfg.beta);
    const auto moments = sn_mean_cov(cfg.params);
    const LocationScatter gy_ls(moments.mean, moments.cov);

    Rng rng(derive_seed(cfg.seed, {0x5a}));
    const Points base = ref->sample(cfg.base_n, rng);
    const auto total = cfg.base_n + cfg.outlier_count;
    Points data(static_cast<Eigen::Index>(total), 2);
    data.topRows(static_cast<Eigen::Index>(cfg.base_n)) = base;
    std::normal_distribution<double> noise(0.0, cfg.outlier_sd);
    for (std::size_t i = cfg.base_n; i < total; ++i) {
        const double a = noise(rng);
        const double b = noise(rng);
        data.row(static_cast<Eigen::Index>(i)) = Eigen::RowVector2d(cfg.center(0) + a, cfg.center(1) + b);
    }
    const auto theo_all = ref->theoretical_depths(data);

    SnInjectionResult res;
    for (std::size_t added = 0; added <= cfg.outlier_count; ++added) {
        const auto n = static_cast<Eigen::Index>(cfg.base_n + added);
        const Points sample = data.topRows(n);
        const std::span<const double> theo(theo_all.data(), static_cast<std::size_t>(n));
        const auto hs = hs_filter(sample, *ref, region, {cfg.approx.n_directions, derive_seed(cfg.seed, {added})}, theo);
        const auto gy = gy_filter(sample, gy_ls, cfg.alpha);
        auto injected = [&](const std::vector<std::size_t>& idx) {
            std::size_t c = 0;
            for (auto i : idx) c += i >= cfg.base_n ? 1 : 0;
            return c;
        };
        res.steps.push_back({added, hs.d_n, hs.n0, injected(hs.flagged), gy.d_n, gy.n0, injected(gy.flagged)});
        if (added == cfg.outlier_count) {
            res.hs_flagged = hs.flagged;
            res.gy_flagged = gy.flagged;
        }
    }
    res.data = std::move(data);
    return res;
}

} // namespace depthfilter
