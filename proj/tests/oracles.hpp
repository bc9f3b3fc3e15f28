#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/**
 * Bivariate half-space depth by direction enumeration.
 *
 * The closed half-plane count is piecewise constant in the direction angle
 * and only changes where the boundary passes through a sample point, so the
 * minimum is reached just beside one of those critical directions. Each side
 * is evaluated symbolically: a point on the boundary line is classified by
 * the sign of the derivative under an infinitesimal rotation. Exact for
 * inputs whose differences and products are representable (small integers).
 */
inline double hs_depth_2d(const Eigen::Vector2d& x, const Eigen::MatrixXd& sample) {
    const auto n = static_cast<std::size_t>(sample.rows());
    std::vector<Eigen::Vector2d> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = sample.row(static_cast<Eigen::Index>(i)).transpose() - x;

    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i].x() == 0.0 && v[i].y() == 0.0) continue;
        // Normal u perpendicular to v[i]; both orientations, both rotation sides.
        for (double orient : {1.0, -1.0}) {
            const Eigen::Vector2d u(-orient * v[i].y(), orient * v[i].x());
            const Eigen::Vector2d du(-u.y(), u.x());
            for (double eps : {1.0, -1.0}) {
                std::size_t count = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double a = u.dot(v[j]);
                    const double b = eps * du.dot(v[j]);
                    if (a > 0 || (a == 0 && b >= 0)) ++count;
                }
                best = std::min(best, count);
            }
        }
    }
    return static_cast<double>(best) / static_cast<double>(n);
}

/// Bisection inverse of a monotone CDF on [lo, hi].
template <class Cdf>
double invert_cdf(Cdf cdf, double q, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Smallest c with P(Bin(n, p) <= c) >= q, via the lgamma pmf.
inline std::size_t binomial_quantile(std::size_t n, double p, double q) {
    double acc = 0.0;
    for (std::size_t c = 0; c <= n; ++c) {
        const double k = static_cast<double>(c);
        const double nn = static_cast<double>(n);
        acc += std::exp(std::lgamma(nn + 1) - std::lgamma(k + 1) - std::lgamma(nn - k + 1) + k * std::log(p) +
                        (nn - k) * std::log1p(-p));
        if (acc >= q - 1e-12) return c;
    }
    return n;
}

/// sup over a grid of D >= eta of {G(D) - H_n(D-)}^+, H_n the empirical CDF of `deltas`.
template <class Cdf>
double gy_dn_grid(std::span<const double> deltas, Cdf G, double eta, std::size_t grid) {
    std::vector<double> s(deltas.begin(), deltas.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    const double top = std::max(eta, s.back()) + 1.0;
    double best = 0.0;
    auto eval = [&](double d) {
        const auto below = static_cast<double>(std::lower_bound(s.begin(), s.end(), d) - s.begin());
        best = std::max(best, G(d) - below / n);
    };
    for (std::size_t g = 0; g <= grid; ++g) eval(eta + (top - eta) * static_cast<double>(g) / static_cast<double>(grid));
    return best;
}

} // namespace oracle
