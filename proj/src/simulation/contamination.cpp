#include <algorithm>
#include <cmath>
#include <numeric>

#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"
#include "depthfilter/simulation.hpp"

namespace depthfilter {

std::string_view to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::Clean: return "clean";
    case ScenarioKind::CellWise: return "cellwise";
    case ScenarioKind::CaseWise: return "casewise";
    case ScenarioKind::Mixed: return "mixed";
    }
    return "clean";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
    if (name == "clean") return ScenarioKind::Clean;
    if (name == "cellwise") return ScenarioKind::CellWise;
    if (name == "casewise") return ScenarioKind::CaseWise;
    if (name == "mixed") return ScenarioKind::Mixed;
    throw ConfigError("unknown scenario kind '" + std::string(name) + "'");
}

Eigen::MatrixXd Scenario::sigma() const {
    if (sigma0.size() == 0) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    return sigma0;
}

void Scenario::validate() const {
    if (p < 1 || n < 1) throw ConfigError("scenario: n and p must be positive");
    if (replicates < 1) throw ConfigError("scenario: replicates must be positive");
    if (!(eps_cell >= 0.0 && eps_cell < 0.5) || !(eps_case >= 0.0 && eps_case < 0.5))
        throw ConfigError("scenario: contamination proportions must lie in [0, 0.5)");
    if (!std::isfinite(k)) throw ConfigError("scenario: k must be finite");
    const auto s = sigma();
    if (s.rows() != static_cast<Eigen::Index>(p) || s.cols() != static_cast<Eigen::Index>(p))
        throw ConfigError("scenario: sigma0 must be p x p");
    for (Eigen::Index j = 0; j < s.rows(); ++j)
        if (std::abs(s(j, j) - 1.0) > 1e-12) throw ConfigError("scenario: sigma0 must have unit diagonal");
    if (Eigen::LLT<Eigen::MatrixXd>(s).info() != Eigen::Success)
        throw ConfigError("scenario: sigma0 must be positive definite");
}

namespace {

Eigen::VectorXd std_normal(Eigen::Index d, Rng& rng) {
    std::normal_distribution<double> z;
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = z(rng);
    return v;
}

/// First `count` entries of a seeded Fisher-Yates shuffle of [0, total).
std::vector<std::size_t> choose(std::size_t total, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, total - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<std::uint8_t> mask_of(const DataMatrix& m) {
    std::vector<std::uint8_t> mask(m.rows() * m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) mask[i * m.cols() + j] = m.observed(i, j) ? 1 : 0;
    return mask;
}

Contaminated cellwise_over(const DataMatrix& m, const std::vector<std::size_t>& rows, double eps, double k, Rng& rng) {
    const auto p = m.cols();
    const auto count = static_cast<std::size_t>(std::floor(eps * static_cast<double>(m.rows() * p) + 1e-9));
    const std::size_t pool = rows.size() * p;
    if (count > pool) throw ConfigError("cell-wise contamination exceeds the available cells");
    Eigen::MatrixXd values = m.values();
    auto mask = mask_of(m);
    std::normal_distribution<double> noise(k, 0.1);
    Contaminated out{m, {}, {}};
    for (auto c : choose(pool, count, rng)) {
        const auto i = rows[c / p];
        const auto j = c % p;
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = noise(rng);
        mask[i * p + j] = 1;
        out.cells.emplace_back(i, j);
    }
    std::sort(out.cells.begin(), out.cells.end());
    out.data = DataMatrix(std::move(values), std::move(mask), m.names());
    return out;
}

} // namespace

DataMatrix gen_clean(const Scenario& s, Rng& rng) {
    const auto p = static_cast<Eigen::Index>(s.p);
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(s.sigma()).matrixL();
    Eigen::MatrixXd values(static_cast<Eigen::Index>(s.n), p);
    for (Eigen::Index i = 0; i < values.rows(); ++i) values.row(i) = (l * std_normal(p, rng)).transpose();
    return DataMatrix(std::move(values));
}

Contaminated contaminate_cellwise(const DataMatrix& m, double eps, double k, Rng& rng) {
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("eps must lie in [0, 1)");
    std::vector<std::size_t> rows(m.rows());
    std::iota(rows.begin(), rows.end(), 0);
    return cellwise_over(m, rows, eps, k, rng);
}

Eigen::VectorXd casewise_direction(const Eigen::MatrixXd& sigma0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma0);
    Eigen::VectorXd v = eig.eigenvectors().col(0);
    const double scale = v.dot(sigma0.ldlt().solve(v));
    return v / std::sqrt(scale);
}

Contaminated contaminate_casewise(const DataMatrix& m, double eps, double k, const Eigen::MatrixXd& sigma0,
                                  Rng& rng) {
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("eps must lie in [0, 1)");
    const auto p = m.cols();
    const auto count = static_cast<std::size_t>(std::floor(eps * static_cast<double>(m.rows()) + 1e-9));
    const Eigen::VectorXd cv = std::sqrt(k * chi2_quantile(static_cast<double>(p), 0.99)) * casewise_direction(sigma0);
    Eigen::MatrixXd values = m.values();
    auto mask = mask_of(m);
    std::bernoulli_distribution coin(0.5);
    Contaminated out{m, {}, {}};
    for (auto i : choose(m.rows(), count, rng)) {
        const double sign = coin(rng) ? 1.0 : -1.0;
        const Eigen::VectorXd x = sign * cv + 0.1 * std_normal(static_cast<Eigen::Index>(p), rng);
        values.row(static_cast<Eigen::Index>(i)) = x.transpose();
        for (std::size_t j = 0; j < p; ++j) {
            mask[i * p + j] = 1;
            out.cells.emplace_back(i, j);
        }
        out.rows.push_back(i);
    }
    out.data = DataMatrix(std::move(values), std::move(mask), m.names());
    return out;
}

Contaminated contaminate_mixed(const DataMatrix& m, double eps_case, double eps_cell, double k,
                               const Eigen::MatrixXd& sigma0, Rng& rng) {
    auto cased = contaminate_casewise(m, eps_case, k, sigma0, rng);
    std::vector<std::size_t> rest;
    for (std::size_t i = 0, r = 0; i < m.rows(); ++i) {
        if (r < cased.rows.size() && cased.rows[r] == i) {
            ++r;
            continue;
        }
        rest.push_back(i);
    }
    auto celled = cellwise_over(cased.data, rest, eps_cell, k, rng);
    celled.rows = cased.rows;
    celled.cells.insert(celled.cells.end(), cased.cells.begin(), cased.cells.end());
    std::sort(celled.cells.begin(), celled.cells.end());
    return celled;
}

Eigen::MatrixXd random_correlation(std::size_t p, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(p);
    Eigen::MatrixXd a(d, 2 * d);
    for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = std_normal(d, rng);
    Eigen::MatrixXd s = a * a.transpose();
    const Eigen::VectorXd inv_sd = s.diagonal().array().rsqrt();
    s = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
    s.diagonal().setOnes();
    return 0.5 * (s + s.transpose());
}

double mse_metric(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& mu0) {
    if (estimates.empty()) throw std::invalid_argument("mse_metric: no estimates");
    double total = 0.0;
    for (const auto& mu : estimates) total += (mu - mu0).squaredNorm();
    return total / static_cast<double>(estimates.size());
}

double lrt_divergence(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& sigma0) {
    Eigen::LLT<Eigen::MatrixXd> l0(sigma0);
    Eigen::LLT<Eigen::MatrixXd> l1(estimate);
    if (l0.info() != Eigen::Success || l1.info() != Eigen::Success)
        throw NumericError("lrt: covariance not positive definite");
    // L0^-1 S L0^-T is congruent to S Sigma0^-1, so it has the same trace and determinant.
    const Eigen::MatrixXd l0inv_l1 = l0.matrixL().solve(Eigen::MatrixXd(l1.matrixL()));
    const double trace = l0inv_l1.squaredNorm();
    const double logdet = 2.0 * l0inv_l1.diagonal().array().abs().log().sum();
    return trace - logdet - static_cast<double>(sigma0.rows());
}

double lrt_metric(const std::vector<Eigen::MatrixXd>& estimates, const Eigen::MatrixXd& sigma0) {
    if (estimates.empty()) throw std::invalid_argument("lrt_metric: no estimates");
    double total = 0.0;
    for (const auto& s : estimates) total += lrt_divergence(s, sigma0);
    return total / static_cast<double>(estimates.size());
}

} // namespace depthfilter
