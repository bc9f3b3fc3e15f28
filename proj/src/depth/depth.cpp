#include "depthfilter/depth.hpp"

#include <algorithm>
#include <cmath>

#include "depthfilter/errors.hpp"

namespace depthfilter {

LocationScatter::LocationScatter(Eigen::VectorXd location, Eigen::MatrixXd scatter)
    : location_(std::move(location)), scatter_(std::move(scatter)) {
    const auto d = location_.size();
    if (d < 1 || scatter_.rows() != d || scatter_.cols() != d)
        throw NumericError("location/scatter dimension mismatch");
    if (!location_.allFinite() || !scatter_.allFinite()) throw NumericError("non-finite location or scatter");
    const double scale = std::max(scatter_.cwiseAbs().maxCoeff(), 1e-300);
    if ((scatter_ - scatter_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw NumericError("scatter matrix is not symmetric");
    scatter_ = 0.5 * (scatter_ + scatter_.transpose()).eval();
    llt_.compute(scatter_);
    if (llt_.info() != Eigen::Success || (llt_.matrixL().toDenseMatrix().diagonal().array() <= 0.0).any())
        throw NumericError("scatter matrix is not positive definite");
}

double LocationScatter::mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim()) throw std::invalid_argument("mahalanobis_sq: dimension mismatch");
    Eigen::VectorXd diff = x - location_;
    return llt_.matrixL().solve(diff).squaredNorm();
}

std::vector<double> LocationScatter::mahalanobis_sq_rows(const Points& pts) const {
    if (pts.cols() != dim()) throw std::invalid_argument("mahalanobis_sq_rows: dimension mismatch");
    Eigen::MatrixXd centered = (pts.rowwise() - location_.transpose()).transpose();
    llt_.matrixL().solveInPlace(centered);
    std::vector<double> out(static_cast<std::size_t>(pts.rows()));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) out[static_cast<std::size_t>(i)] = centered.col(i).squaredNorm();
    return out;
}

LocationScatter LocationScatter::sub(const std::vector<Eigen::Index>& idx) const {
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd loc(k);
    Eigen::MatrixXd sc(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        loc(a) = location_(idx[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < k; ++b)
            sc(a, b) = scatter_(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    return LocationScatter(std::move(loc), std::move(sc));
}

double mahalanobis_sq(const Eigen::Ref<const Eigen::VectorXd>& x, const LocationScatter& ls) {
    return ls.mahalanobis_sq(x);
}

double hs_depth_1d(double x, std::span<const double> sample) {
    if (sample.empty()) throw std::invalid_argument("hs_depth_1d: empty sample");
    std::size_t le = 0, ge = 0;
    for (double v : sample) {
        if (v <= x) ++le;
        if (v >= x) ++ge;
    }
    return static_cast<double>(std::min(le, ge)) / static_cast<double>(sample.size());
}

std::vector<double> hs_depths_1d(std::span<const double> queries, std::span<const double> sample) {
    if (sample.empty()) throw std::invalid_argument("hs_depths_1d: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    std::vector<double> out;
    out.reserve(queries.size());
    for (double x : queries) {
        auto le = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
        auto ge = n - static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
        out.push_back(static_cast<double>(std::min(le, ge)) / static_cast<double>(n));
    }
    return out;
}

namespace {

struct Dir {
    double x;
    double y;
};

inline double cross(const Dir& a, const Dir& b) { return a.x * b.y - a.y * b.x; }
inline double dot(const Dir& a, const Dir& b) { return a.x * b.x + a.y * b.y; }
// 0 for angles in [0, pi), 1 for [pi, 2 pi).
inline int half(const Dir& a) { return (a.y < 0 || (a.y == 0 && a.x < 0)) ? 1 : 0; }

// Direction b lies in the half-open arc [angle(a), angle(a) + pi).
inline bool in_half_arc(const Dir& a, const Dir& b) {
    const double c = cross(a, b);
    return c > 0 || (c == 0 && dot(a, b) > 0);
}

} // namespace

double hs_depth_exact_2d(const Eigen::Vector2d& x, const Points& sample) {
    if (sample.rows() == 0) throw std::invalid_argument("hs_depth_exact_2d: empty sample");
    if (sample.cols() != 2) throw std::invalid_argument("hs_depth_exact_2d: sample must be bivariate");
    const auto n = static_cast<std::size_t>(sample.rows());

    std::size_t at_x = 0;
    std::vector<Dir> dirs;
    dirs.reserve(n);
    for (Eigen::Index i = 0; i < sample.rows(); ++i) {
        Dir d{sample(i, 0) - x(0), sample(i, 1) - x(1)};
        if (d.x == 0 && d.y == 0)
            ++at_x;
        else
            dirs.push_back(d);
    }
    if (dirs.empty()) return 1.0;

    std::sort(dirs.begin(), dirs.end(), [](const Dir& a, const Dir& b) {
        const int ha = half(a), hb = half(b);
        if (ha != hb) return ha < hb;
        return cross(a, b) > 0;
    });

    // Merge equal directions with multiplicity.
    std::vector<Dir> rep;
    std::vector<std::size_t> mult;
    for (const auto& d : dirs) {
        if (!rep.empty() && half(rep.back()) == half(d) && cross(rep.back(), d) == 0 && dot(rep.back(), d) > 0)
            ++mult.back();
        else {
            rep.push_back(d);
            mult.push_back(1);
        }
    }

    // Largest open half-plane through x = max over groups g of the count in [theta_g, theta_g + pi).
    const std::size_t g_count = rep.size();
    std::size_t best = 0;
    std::size_t end = 0; // exclusive, in "unrolled" index space [g, g + g_count)
    std::size_t window = 0;
    for (std::size_t g = 0; g < g_count; ++g) {
        if (end < g + 1) {
            end = g + 1;
            window = mult[g];
        }
        while (end < g + g_count && in_half_arc(rep[g], rep[end % g_count])) {
            window += mult[end % g_count];
            ++end;
        }
        best = std::max(best, window);
        window -= mult[g];
    }

    const std::size_t min_closed = at_x + dirs.size() - best;
    return static_cast<double>(min_closed) / static_cast<double>(n);
}

std::vector<double> hs_depths_exact_2d(const Points& queries, const Points& sample) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index i = 0; i < queries.rows(); ++i)
        out.push_back(hs_depth_exact_2d(queries.row(i).transpose(), sample));
    return out;
}

std::vector<double> sample_depths(const Points& queries, const Points& sample, const SampleDepthOptions& opts) {
    if (queries.cols() != sample.cols()) throw std::invalid_argument("sample_depths: dimension mismatch");
    if (sample.cols() == 1) {
        std::vector<double> q(queries.col(0).data(), queries.col(0).data() + queries.rows());
        std::vector<double> s(sample.col(0).data(), sample.col(0).data() + sample.rows());
        return hs_depths_1d(q, s);
    }
    if (sample.cols() == 2) return hs_depths_exact_2d(queries, sample);
    Rng rng(opts.seed);
    auto dirs = DirectionSet::random(opts.n_directions, sample.cols(), rng);
    return random_tukey_depths(queries, sample, dirs);
}

double hs_depth_elliptical(const Eigen::Ref<const Eigen::VectorXd>& x, const LocationScatter& ls,
                           const std::function<double(double)>& marginal_cdf) {
    return 1.0 - marginal_cdf(std::sqrt(ls.mahalanobis_sq(x)));
}

double gy_depth(const Eigen::Ref<const Eigen::VectorXd>& x, const LocationScatter& ls,
                const std::function<double(double)>& cdf) {
    return 1.0 - cdf(ls.mahalanobis_sq(x));
}

std::pair<std::size_t, Eigen::VectorXd> max_depth_observation(const Points& sample,
                                                              const SampleDepthOptions& opts) {
    if (sample.rows() == 0) throw std::invalid_argument("max_depth_observation: empty sample");
    auto depths = sample_depths(sample, sample, opts);
    std::size_t best = 0;
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (depths[i] > depths[best]) best = i;
    return {best, sample.row(static_cast<Eigen::Index>(best)).transpose()};
}

} // namespace depthfilter
