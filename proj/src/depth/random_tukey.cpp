#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "depthfilter/depth.hpp"

namespace depthfilter {

DirectionSet::DirectionSet(Eigen::MatrixXd directions) : dirs_(std::move(directions)) {
    if (dirs_.rows() < 1 || dirs_.cols() < 1) throw std::invalid_argument("DirectionSet: empty");
}

DirectionSet DirectionSet::random(std::size_t count, Eigen::Index dim, Rng& rng) {
    if (count < 1) throw std::invalid_argument("DirectionSet: need at least one direction");
    std::normal_distribution<double> normal;
    Eigen::MatrixXd dirs(static_cast<Eigen::Index>(count), dim);
    for (Eigen::Index r = 0; r < dirs.rows(); ++r) {
        double norm = 0.0;
        do {
            for (Eigen::Index c = 0; c < dim; ++c) dirs(r, c) = normal(rng);
            norm = dirs.row(r).norm();
        } while (norm == 0.0);
        dirs.row(r) /= norm;
    }
    return DirectionSet(std::move(dirs));
}

DirectionSet DirectionSet::prefix(std::size_t count) const {
    count = std::min(count, size());
    return DirectionSet(dirs_.topRows(static_cast<Eigen::Index>(count)));
}

std::vector<double> random_tukey_depths(const Points& queries, const Points& sample,
                                        const DirectionSet& directions) {
    if (sample.rows() == 0) throw std::invalid_argument("random_tukey_depths: empty sample");
    if (queries.cols() != sample.cols() || directions.dim() != sample.cols())
        throw std::invalid_argument("random_tukey_depths: dimension mismatch");

    const auto n = static_cast<std::size_t>(sample.rows());
    const auto q = static_cast<std::size_t>(queries.rows());
    std::vector<std::size_t> best(q, std::numeric_limits<std::size_t>::max());
    if (q == 0) return {};

    // Few queries against a large sample: sort the queries and bin the sample
    // (O(n log q) per direction). Otherwise sort the sample (O((n + q) log n)).
    const bool bin_sample = 4 * q < n;

    std::vector<double> sp(n), qp(q), sorted;
    std::vector<std::size_t> order(q), cnt_lb, cnt_ub;
    if (bin_sample) {
        sorted.resize(q);
        cnt_lb.resize(q + 1);
        cnt_ub.resize(q + 1);
    }

    const Eigen::MatrixXd& dirs = directions.matrix();
    for (Eigen::Index r = 0; r < dirs.rows(); ++r) {
        Eigen::VectorXd u = dirs.row(r).transpose();
        Eigen::Map<Eigen::VectorXd>(sp.data(), static_cast<Eigen::Index>(n)) = sample * u;
        Eigen::Map<Eigen::VectorXd>(qp.data(), static_cast<Eigen::Index>(q)) = queries * u;

        if (bin_sample) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return qp[a] < qp[b]; });
            for (std::size_t j = 0; j < q; ++j) sorted[j] = qp[order[j]];
            std::fill(cnt_lb.begin(), cnt_lb.end(), 0);
            std::fill(cnt_ub.begin(), cnt_ub.end(), 0);
            for (double s : sp) {
                // Queries with index >= lb have t >= s; those with index < ub have t <= s.
                ++cnt_lb[static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), s) - sorted.begin())];
                ++cnt_ub[static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin())];
            }
            std::size_t le = 0;
            std::size_t ge = n - cnt_ub[0];
            for (std::size_t j = 0; j < q; ++j) {
                le += cnt_lb[j];
                auto& b = best[order[j]];
                b = std::min(b, std::min(le, ge));
                ge -= cnt_ub[j + 1];
            }
        } else {
            std::sort(sp.begin(), sp.end());
            for (std::size_t j = 0; j < q; ++j) {
                auto le = static_cast<std::size_t>(std::upper_bound(sp.begin(), sp.end(), qp[j]) - sp.begin());
                auto ge = n - static_cast<std::size_t>(std::lower_bound(sp.begin(), sp.end(), qp[j]) - sp.begin());
                best[j] = std::min(best[j], std::min(le, ge));
            }
        }
    }

    std::vector<double> out(q);
    for (std::size_t j = 0; j < q; ++j) out[j] = static_cast<double>(best[j]) / static_cast<double>(n);
    return out;
}

double random_tukey_depth(const Eigen::Ref<const Eigen::VectorXd>& x, const Points& sample, std::size_t k,
                          Rng& rng) {
    auto dirs = DirectionSet::random(k, sample.cols(), rng);
    Points query = x.transpose();
    return random_tukey_depths(query, sample, dirs).front();
}

} // namespace depthfilter
