#include "depthfilter/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"

namespace depthfilter {

std::string_view to_string(ReferenceFamily f) {
    switch (f) {
    case ReferenceFamily::Gaussian: return "gaussian";
    case ReferenceFamily::StudentT5: return "t5";
    case ReferenceFamily::SkewNormal: return "skewnormal";
    case ReferenceFamily::EmpiricalApprox: return "empirical";
    }
    return "unknown";
}

ReferenceFamily parse_reference_family(std::string_view name) {
    if (name == "gaussian") return ReferenceFamily::Gaussian;
    if (name == "t5") return ReferenceFamily::StudentT5;
    if (name == "skewnormal") return ReferenceFamily::SkewNormal;
    if (name == "empirical") return ReferenceFamily::EmpiricalApprox;
    throw ConfigError("unknown reference family '" + std::string(name) + "'");
}

MeanCov sn_mean_cov(const SkewNormalParams& params) {
    const auto d = params.xi.size();
    if (params.omega.rows() != d || params.omega.cols() != d || params.alpha.size() != d)
        throw NumericError("skew-normal parameter dimensions do not match");
    LocationScatter check(params.xi, params.omega); // throws when Omega is not SPD
    Eigen::VectorXd w = params.omega.diagonal().cwiseSqrt();
    Eigen::MatrixXd omega_bar = w.cwiseInverse().asDiagonal() * params.omega * w.cwiseInverse().asDiagonal();
    Eigen::VectorXd oa = omega_bar * params.alpha;
    const double denom = std::sqrt(1.0 + params.alpha.dot(oa));
    Eigen::VectorXd nu = std::sqrt(2.0 / std::numbers::pi) / denom * oa;
    Eigen::VectorXd wnu = w.asDiagonal() * nu;
    return {params.xi + wnu, params.omega - wnu * wnu.transpose()};
}

namespace {

struct Projection {
    double loc;
    double scale;
    double shape;
};

} // namespace

struct ReferenceDistribution::Approx {
    ApproxOptions opts;
    std::optional<SkewNormalParams> sn;
    Eigen::VectorXd omega_delta;      // omega * delta, the skewness direction
    Eigen::MatrixXd sn_sampling_chol; // Cholesky of [[1, delta'], [delta, Omega_bar]]
    std::optional<DirectionSet> dirs;
    std::vector<Projection> dir_proj; // per direction (SN, d != 2) or grid angle (SN, d == 2)
    Points sample;                    // EmpiricalApprox
    std::vector<double> ref_depths;   // sorted ascending

    Projection project(const Eigen::Ref<const Eigen::VectorXd>& a) const {
        const double loc = a.dot(sn->xi);
        const double scale = std::sqrt(a.dot(sn->omega * a));
        double delta = a.dot(omega_delta) / scale;
        delta = std::clamp(delta, -1.0 + 1e-15, 1.0 - 1e-15);
        return {loc, scale, delta / std::sqrt(1.0 - delta * delta)};
    }

    static double lower_tail(const Projection& pr, double t) { return skew_normal_cdf(t, pr.loc, pr.scale, pr.shape); }

    double sn_depth(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    std::vector<double> depths(const Points& queries) const;
};

namespace {

constexpr std::size_t kAngleGrid = 96;
constexpr int kGoldenSteps = 40;

} // namespace

double ReferenceDistribution::Approx::sn_depth(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const auto d = x.size();
    if (d == 1) {
        const double f = lower_tail(dir_proj.front(), x(0));
        return std::min(f, 1.0 - f);
    }
    if (d >= 3) {
        double best = 1.0;
        const auto& m = dirs->matrix();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const double f = lower_tail(dir_proj[static_cast<std::size_t>(r)], m.row(r).dot(x));
            best = std::min(best, std::min(f, 1.0 - f));
        }
        return best;
    }

    // d == 2: minimize P(a'X <= a'x) over a on the unit circle.
    auto at_angle = [&](double theta) {
        Eigen::Vector2d a(std::cos(theta), std::sin(theta));
        return lower_tail(project(a), a.dot(x));
    };
    const double step = 2.0 * std::numbers::pi / static_cast<double>(kAngleGrid);
    std::array<double, kAngleGrid> grid{};
    double best = 1.0;
    for (std::size_t i = 0; i < kAngleGrid; ++i) {
        const double theta = step * static_cast<double>(i);
        grid[i] = lower_tail(dir_proj[i], std::cos(theta) * x(0) + std::sin(theta) * x(1));
        best = std::min(best, grid[i]);
    }
    if (best <= 0.0) return 0.0;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t i = 0; i < kAngleGrid; ++i) {
        const double prev = grid[(i + kAngleGrid - 1) % kAngleGrid];
        const double next = grid[(i + 1) % kAngleGrid];
        if (grid[i] > prev || grid[i] > next) continue;
        double lo = step * (static_cast<double>(i) - 1.0);
        double hi = step * (static_cast<double>(i) + 1.0);
        double c = hi - invphi * (hi - lo), e = lo + invphi * (hi - lo);
        double fc = at_angle(c), fe = at_angle(e);
        for (int it = 0; it < kGoldenSteps; ++it) {
            if (fc < fe) {
                hi = e;
                e = c;
                fe = fc;
                c = hi - invphi * (hi - lo);
                fc = at_angle(c);
            } else {
                lo = c;
                c = e;
                fc = fe;
                e = lo + invphi * (hi - lo);
                fe = at_angle(e);
            }
        }
        best = std::min(best, std::min(fc, fe));
    }
    return best;
}

std::vector<double> ReferenceDistribution::Approx::depths(const Points& queries) const {
    if (!sn) {
        if (sample.cols() == 1) {
            std::vector<double> q(queries.col(0).data(), queries.col(0).data() + queries.rows());
            std::vector<double> s(sample.col(0).data(), sample.col(0).data() + sample.rows());
            return hs_depths_1d(q, s);
        }
        // Split the queries into blocks so that threads share the work deterministically.
        const auto q = static_cast<std::size_t>(queries.rows());
        const std::size_t blocks = std::min<std::size_t>(std::max<std::size_t>(opts.threads, 1), std::max<std::size_t>(q, 1));
        std::vector<std::vector<double>> parts(blocks);
        parallel_for(blocks, opts.threads, [&](std::size_t b) {
            const std::size_t lo = q * b / blocks, hi = q * (b + 1) / blocks;
            Points sub = queries.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo));
            parts[b] = random_tukey_depths(sub, sample, *dirs);
        });
        std::vector<double> out;
        out.reserve(q);
        for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
        return out;
    }
    std::vector<double> out(static_cast<std::size_t>(queries.rows()));
    parallel_for(out.size(), opts.threads, [&](std::size_t i) {
        out[i] = sn_depth(queries.row(static_cast<Eigen::Index>(i)).transpose());
    });
    return out;
}

ReferenceDistribution ReferenceDistribution::gaussian(LocationScatter ls) {
    return {ReferenceFamily::Gaussian, std::make_shared<const LocationScatter>(std::move(ls)), nullptr};
}

ReferenceDistribution ReferenceDistribution::student_t5(LocationScatter ls) {
    return {ReferenceFamily::StudentT5, std::make_shared<const LocationScatter>(std::move(ls)), nullptr};
}

ReferenceDistribution ReferenceDistribution::elliptical(ReferenceFamily family, LocationScatter ls) {
    switch (family) {
    case ReferenceFamily::Gaussian: return gaussian(std::move(ls));
    case ReferenceFamily::StudentT5: return student_t5(std::move(ls));
    default: throw ConfigError("reference family '" + std::string(to_string(family)) + "' is not elliptical");
    }
}

ReferenceDistribution ReferenceDistribution::skew_normal(const SkewNormalParams& params, ApproxOptions opts) {
    if (opts.reference_size < 1000) throw ConfigError("skew-normal reference needs at least 1000 draws");
    auto mc = sn_mean_cov(params);
    auto ls = std::make_shared<const LocationScatter>(mc.mean, mc.cov);
    const auto d = params.xi.size();

    auto approx = std::make_shared<Approx>();
    approx->opts = opts;
    approx->sn = params;
    Eigen::VectorXd w = params.omega.diagonal().cwiseSqrt();
    Eigen::MatrixXd omega_bar = w.cwiseInverse().asDiagonal() * params.omega * w.cwiseInverse().asDiagonal();
    Eigen::VectorXd oa = omega_bar * params.alpha;
    Eigen::VectorXd delta = oa / std::sqrt(1.0 + params.alpha.dot(oa));
    approx->omega_delta = w.asDiagonal() * delta;

    Eigen::MatrixXd joint(d + 1, d + 1);
    joint(0, 0) = 1.0;
    joint.block(1, 0, d, 1) = delta;
    joint.block(0, 1, 1, d) = delta.transpose();
    joint.block(1, 1, d, d) = omega_bar;
    Eigen::LLT<Eigen::MatrixXd> llt(joint);
    if (llt.info() != Eigen::Success) throw NumericError("skew-normal: singular joint representation");
    approx->sn_sampling_chol = llt.matrixL();

    if (d == 1) {
        approx->dir_proj.push_back(approx->project(Eigen::VectorXd::Ones(1)));
    } else if (d == 2) {
        const double step = 2.0 * std::numbers::pi / static_cast<double>(kAngleGrid);
        for (std::size_t i = 0; i < kAngleGrid; ++i) {
            const double theta = step * static_cast<double>(i);
            approx->dir_proj.push_back(approx->project(Eigen::Vector2d(std::cos(theta), std::sin(theta))));
        }
    } else {
        Rng rng(derive_seed(opts.seed, {1}));
        approx->dirs = DirectionSet::random(opts.n_directions, d, rng);
        for (Eigen::Index r = 0; r < approx->dirs->matrix().rows(); ++r)
            approx->dir_proj.push_back(approx->project(approx->dirs->matrix().row(r).transpose()));
    }

    ReferenceDistribution ref(ReferenceFamily::SkewNormal, ls, approx);
    Rng rng(derive_seed(opts.seed, {2}));
    Points draws = ref.sample(opts.reference_size, rng);
    approx->ref_depths = approx->depths(draws);
    std::sort(approx->ref_depths.begin(), approx->ref_depths.end());
    return ref;
}

ReferenceDistribution ReferenceDistribution::empirical(Points sample, ApproxOptions opts) {
    if (sample.rows() < 1000) throw ConfigError("empirical reference needs at least 1000 points");
    const auto d = sample.cols();
    Eigen::VectorXd mean = sample.colwise().mean().transpose();
    Eigen::MatrixXd centered = sample.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(sample.rows());
    auto ls = std::make_shared<const LocationScatter>(mean, cov);

    auto approx = std::make_shared<Approx>();
    approx->opts = opts;
    approx->sample = std::move(sample);
    if (d >= 2) {
        Rng rng(derive_seed(opts.seed, {1}));
        approx->dirs = DirectionSet::random(opts.n_directions, d, rng);
    }
    approx->ref_depths = approx->depths(approx->sample);
    std::sort(approx->ref_depths.begin(), approx->ref_depths.end());
    return {ReferenceFamily::EmpiricalApprox, ls, approx};
}

double ReferenceDistribution::marginal_cdf(double t) const {
    switch (family_) {
    case ReferenceFamily::Gaussian: return normal_cdf(t);
    case ReferenceFamily::StudentT5: return student_t_cdf(t, kStudentDof);
    default: throw ConfigError("marginal_cdf: reference family is not elliptical");
    }
}

double ReferenceDistribution::delta_cutoff(double beta) const {
    const auto d = static_cast<double>(dim());
    switch (family_) {
    case ReferenceFamily::Gaussian: return chi2_quantile(d, beta);
    // Delta / d ~ F(d, nu) for the multivariate t.
    case ReferenceFamily::StudentT5: return d * f_quantile(d, kStudentDof, beta);
    default: throw ConfigError("delta_cutoff: reference family is not elliptical");
    }
}

double ReferenceDistribution::theoretical_depth(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim()) throw std::invalid_argument("theoretical_depth: dimension mismatch");
    if (is_elliptical()) return 1.0 - marginal_cdf(std::sqrt(ls_->mahalanobis_sq(x)));
    if (approx_->sn) return approx_->sn_depth(x);
    Points q = x.transpose();
    return approx_->depths(q).front();
}

std::vector<double> ReferenceDistribution::theoretical_depths(const Points& queries) const {
    if (queries.cols() != dim()) throw std::invalid_argument("theoretical_depths: dimension mismatch");
    if (!is_elliptical()) return approx_->depths(queries);
    auto delta = ls_->mahalanobis_sq_rows(queries);
    for (auto& v : delta) v = 1.0 - marginal_cdf(std::sqrt(v));
    return delta;
}

Points ReferenceDistribution::sample(std::size_t n, Rng& rng) const {
    const auto d = dim();
    Points out(static_cast<Eigen::Index>(n), d);
    std::normal_distribution<double> normal;
    switch (family_) {
    case ReferenceFamily::Gaussian:
    case ReferenceFamily::StudentT5: {
        Eigen::MatrixXd L = ls_->cholesky_factor();
        std::chi_squared_distribution<double> chi(kStudentDof);
        Eigen::VectorXd z(d);
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            for (Eigen::Index c = 0; c < d; ++c) z(c) = normal(rng);
            double scale = 1.0;
            if (family_ == ReferenceFamily::StudentT5) scale = std::sqrt(kStudentDof / chi(rng));
            out.row(i) = (ls_->location() + scale * (L * z)).transpose();
        }
        break;
    }
    case ReferenceFamily::SkewNormal: {
        const auto& sn = *approx_->sn;
        Eigen::VectorXd w = sn.omega.diagonal().cwiseSqrt();
        Eigen::VectorXd z(d + 1);
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            for (Eigen::Index c = 0; c <= d; ++c) z(c) = normal(rng);
            Eigen::VectorXd u = approx_->sn_sampling_chol * z;
            Eigen::VectorXd v = u.tail(d);
            if (u(0) <= 0) v = -v;
            out.row(i) = (sn.xi + w.cwiseProduct(v)).transpose();
        }
        break;
    }
    case ReferenceFamily::EmpiricalApprox: {
        std::uniform_int_distribution<Eigen::Index> pick(0, approx_->sample.rows() - 1);
        for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = approx_->sample.row(pick(rng));
        break;
    }
    }
    return out;
}

const std::vector<double>& ReferenceDistribution::reference_depths() const {
    if (!approx_) throw ConfigError("reference_depths: elliptical references have closed-form depth");
    return approx_->ref_depths;
}

const SkewNormalParams* ReferenceDistribution::skew_normal_params() const {
    return (approx_ && approx_->sn) ? &*approx_->sn : nullptr;
}

DepthRegionSpec prepare_region(const ReferenceDistribution& ref, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
    DepthRegionSpec spec;
    spec.beta = beta;
    if (ref.is_elliptical()) {
        spec.delta_cutoff = ref.delta_cutoff(beta);
        spec.eta_beta = 1.0 - ref.marginal_cdf(std::sqrt(spec.delta_cutoff));
        return spec;
    }
    // Empirical (1 - beta)-quantile of the reference depths (inverse-CDF convention).
    const auto& depths = ref.reference_depths();
    const auto m = static_cast<double>(depths.size());
    auto idx = static_cast<std::size_t>(std::ceil((1.0 - beta) * m - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, depths.size()) - 1;
    spec.eta_beta = depths[idx];
    spec.delta_cutoff = std::numeric_limits<double>::quiet_NaN();
    return spec;
}

bool cbeta_contains(const Eigen::Ref<const Eigen::VectorXd>& x, const ReferenceDistribution& ref,
                    const DepthRegionSpec& spec) {
    if (ref.is_elliptical()) return ref.location_scatter().mahalanobis_sq(x) >= spec.delta_cutoff;
    return ref.theoretical_depth(x) <= spec.eta_beta;
}

double theoretical_depth(const Eigen::Ref<const Eigen::VectorXd>& x, const ReferenceDistribution& ref) {
    return ref.theoretical_depth(x);
}

double marginal_cdf(const ReferenceDistribution& ref, double t) { return ref.marginal_cdf(t); }

Points sample(const ReferenceDistribution& ref, std::size_t n, Rng& rng) { return ref.sample(n, rng); }

double hs_depth_elliptical(const Eigen::Ref<const Eigen::VectorXd>& x, const ReferenceDistribution& ref) {
    if (!ref.is_elliptical()) throw ConfigError("hs_depth_elliptical: unsupported reference family");
    return hs_depth_elliptical(x, ref.location_scatter(), [&](double t) { return ref.marginal_cdf(t); });
}

} // namespace depthfilter
