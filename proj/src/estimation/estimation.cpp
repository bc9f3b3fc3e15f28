#include "depthfilter/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "depthfilter/errors.hpp"

namespace depthfilter {

double median(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty list");
    std::vector<double> v(xs.begin(), xs.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double mad(std::span<const double> xs, double scale) {
    const double med = median(xs);
    std::vector<double> dev;
    dev.reserve(xs.size());
    for (double x : xs) dev.push_back(std::abs(x - med));
    return scale * median(dev);
}

namespace {

struct Pattern {
    std::vector<Eigen::Index> obs;
    std::vector<Eigen::Index> mis;
    std::vector<std::size_t> rows;
};

std::vector<Pattern> group_patterns(const DataMatrix& m) {
    std::map<std::vector<std::uint8_t>, Pattern> groups;
    const auto p = m.cols();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::vector<std::uint8_t> key(p);
        bool any = false;
        for (std::size_t j = 0; j < p; ++j) {
            key[j] = m.observed(i, j) ? 1 : 0;
            any = any || key[j];
        }
        if (!any) continue;
        auto& g = groups[key];
        if (g.rows.empty())
            for (std::size_t j = 0; j < p; ++j)
                (key[j] ? g.obs : g.mis).push_back(static_cast<Eigen::Index>(j));
        g.rows.push_back(i);
    }
    std::vector<Pattern> out;
    out.reserve(groups.size());
    for (auto& [key, g] : groups) out.push_back(std::move(g));
    return out;
}

Eigen::MatrixXd take(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& r, const std::vector<Eigen::Index>& c) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(r[i], c[j]);
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& a, const std::vector<Eigen::Index>& r) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) out(static_cast<Eigen::Index>(i)) = a(r[i]);
    return out;
}

void ensure_spd(Eigen::MatrixXd& sigma) {
    const auto p = static_cast<double>(sigma.rows());
    for (int attempt = 0; attempt < 60; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() == Eigen::Success) return;
        const double ridge = 1e-10 * std::max(sigma.trace() / p, 1e-300) * std::pow(10.0, attempt / 4);
        sigma.diagonal().array() += ridge;
    }
    throw NumericError("EM: covariance could not be regularized to positive definite");
}

double pattern_loglik(const DataMatrix& m, const Pattern& g, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
    Eigen::MatrixXd s_oo = take(sigma, g.obs, g.obs);
    Eigen::LLT<Eigen::MatrixXd> llt(s_oo);
    if (llt.info() != Eigen::Success) throw NumericError("EM: observed block not positive definite");
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const auto k = static_cast<double>(g.obs.size());
    Eigen::VectorXd mu_o = take(mu, g.obs);
    double total = 0.0;
    Eigen::VectorXd x(static_cast<Eigen::Index>(g.obs.size()));
    for (std::size_t i : g.rows) {
        for (std::size_t a = 0; a < g.obs.size(); ++a)
            x(static_cast<Eigen::Index>(a)) = m(i, static_cast<std::size_t>(g.obs[a]));
        Eigen::VectorXd z = llt.matrixL().solve(x - mu_o);
        total += -0.5 * (k * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
    }
    return total;
}

} // namespace

EstimatorResult ogk_scatter(const Eigen::MatrixXd& x, double scale) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (n < 2 || p < 1) throw NumericError("OGK: need at least two rows");
    auto robust = [&](const Eigen::VectorXd& v) {
        return std::pair{median({v.data(), static_cast<std::size_t>(v.size())}),
                         mad({v.data(), static_cast<std::size_t>(v.size())}, scale)};
    };

    Eigen::VectorXd d(p);
    Eigen::MatrixXd y(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        d(j) = robust(x.col(j)).second;
        if (!(d(j) > 0.0)) throw NumericError("OGK: zero MAD in column " + std::to_string(j));
        y.col(j) = x.col(j) / d(j);
    }
    Eigen::MatrixXd u = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = j + 1; k < p; ++k) {
            const double plus = robust(y.col(j) + y.col(k)).second;
            const double minus = robust(y.col(j) - y.col(k)).second;
            u(j, k) = u(k, j) = 0.25 * (plus * plus - minus * minus);
        }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(u);
    const Eigen::MatrixXd e = eig.eigenvectors();
    const Eigen::MatrixXd z = y * e;
    Eigen::VectorXd nu(p);
    Eigen::VectorXd gamma(p);
    for (Eigen::Index l = 0; l < p; ++l) {
        const auto [loc, s] = robust(z.col(l));
        if (!(s > 0.0)) throw NumericError("OGK: zero MAD along an eigenvector");
        nu(l) = loc;
        gamma(l) = s * s;
    }
    const Eigen::MatrixXd de = d.asDiagonal() * e;
    EstimatorResult out;
    out.location = de * nu;
    out.scatter = de * gamma.asDiagonal() * de.transpose();
    out.scatter = 0.5 * (out.scatter + out.scatter.transpose());
    out.iterations = 1;
    out.converged = true;
    out.estimator = "ogk";
    return out;
}

double observed_loglik(const DataMatrix& m, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
    double total = 0.0;
    for (const auto& g : group_patterns(m)) total += pattern_loglik(m, g, mu, sigma);
    return total;
}

EstimatorResult em_gaussian_missing(const DataMatrix& m, const EmOptions& opts) {
    const auto p = m.cols();
    const auto pi = static_cast<Eigen::Index>(p);
    auto patterns = group_patterns(m);

    std::size_t n_eff = 0;
    for (const auto& g : patterns) n_eff += g.rows.size();

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(pi);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(pi, pi);
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> col;
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (m.observed(i, j)) col.push_back(m(i, j));
        if (col.empty()) throw NumericError("EM: column '" + m.names()[j] + "' has no observed cells");
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(col.size());
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= static_cast<double>(col.size());
        mu(static_cast<Eigen::Index>(j)) = mean;
        sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = var > 0 ? var : 1.0;
    }
    if (n_eff < p + 1)
        throw NumericError("EM: need at least " + std::to_string(p + 1) + " rows with observed cells, got " +
                           std::to_string(n_eff));

    EstimatorResult res;
    res.estimator = "em-gaussian";
    const double n = static_cast<double>(n_eff);

    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        ensure_spd(sigma);
        Eigen::VectorXd t1 = Eigen::VectorXd::Zero(pi);
        Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(pi, pi); // centred at the current mu
        double loglik = 0.0;

        for (const auto& g : patterns) {
            loglik += pattern_loglik(m, g, mu, sigma);
            Eigen::MatrixXd s_oo = take(sigma, g.obs, g.obs);
            Eigen::LLT<Eigen::MatrixXd> llt(s_oo);
            Eigen::MatrixXd coef; // Sigma_MO Sigma_OO^-1
            Eigen::MatrixXd cond; // Sigma_MM - coef Sigma_OM
            if (!g.mis.empty()) {
                Eigen::MatrixXd s_mo = take(sigma, g.mis, g.obs);
                coef = llt.solve(s_mo.transpose()).transpose();
                cond = take(sigma, g.mis, g.mis) - coef * s_mo.transpose();
            }
            Eigen::VectorXd dev(pi);
            for (std::size_t i : g.rows) {
                Eigen::VectorXd dev_o(static_cast<Eigen::Index>(g.obs.size()));
                for (std::size_t a = 0; a < g.obs.size(); ++a) {
                    const auto j = g.obs[a];
                    dev_o(static_cast<Eigen::Index>(a)) = m(i, static_cast<std::size_t>(j)) - mu(j);
                    dev(j) = dev_o(static_cast<Eigen::Index>(a));
                }
                if (!g.mis.empty()) {
                    Eigen::VectorXd dev_m = coef * dev_o;
                    for (std::size_t a = 0; a < g.mis.size(); ++a) dev(g.mis[a]) = dev_m(static_cast<Eigen::Index>(a));
                }
                t1 += dev;
                t2.noalias() += dev * dev.transpose();
                for (std::size_t a = 0; a < g.mis.size(); ++a)
                    for (std::size_t b = 0; b < g.mis.size(); ++b)
                        t2(g.mis[a], g.mis[b]) += cond(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }

        res.loglik_trace.push_back(loglik);
        Eigen::VectorXd shift = t1 / n;
        mu += shift;
        sigma = t2 / n - shift * shift.transpose();
        sigma = 0.5 * (sigma + sigma.transpose()).eval();
        res.iterations = iter + 1;

        const auto k = res.loglik_trace.size();
        if (k >= 2) {
            const double prev = res.loglik_trace[k - 2];
            if (std::abs(loglik - prev) <= opts.tol * std::max(std::abs(prev), 1.0)) {
                res.converged = true;
                break;
            }
        }
    }
    ensure_spd(sigma);
    res.loglik_trace.push_back(observed_loglik(m, mu, sigma));
    res.location = std::move(mu);
    res.scatter = std::move(sigma);
    return res;
}

namespace {

std::map<std::string, SecondStepEstimator>& registry() {
    static std::map<std::string, SecondStepEstimator> r{{"em-gaussian", &em_gaussian_missing}};
    return r;
}

std::mutex& registry_mutex() {
    static std::mutex mtx;
    return mtx;
}

} // namespace

void register_estimator(const std::string& name, SecondStepEstimator est) {
    std::lock_guard lock(registry_mutex());
    registry()[name] = std::move(est);
}

const SecondStepEstimator& find_estimator(const std::string& name) {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) throw ConfigError("unknown estimator '" + name + "'");
    return it->second;
}

std::vector<std::string> estimator_names() {
    std::lock_guard lock(registry_mutex());
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

} // namespace depthfilter
