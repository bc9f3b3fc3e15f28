#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "depthfilter/depth.hpp"
#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"
#include "depthfilter/reference.hpp"
#include "oracles.hpp"

using namespace depthfilter;

TEST_CASE("chi-squared quantiles") {
    // Reference values computed with scipy.stats.chi2.ppf.
    CHECK(chi2_quantile(1, 0.5) == doctest::Approx(0.454936423).epsilon(1e-8));
    CHECK(chi2_quantile(1, 0.99) == doctest::Approx(6.634896601).epsilon(1e-8));
    CHECK(chi2_quantile(2, 0.95) == doctest::Approx(5.991464547).epsilon(1e-8));
    CHECK(chi2_quantile(2, 0.99) == doctest::Approx(9.21034037).epsilon(1e-8));
    CHECK(chi2_quantile(10, 0.99) == doctest::Approx(23.20925116).epsilon(1e-8));
    CHECK(chi2_quantile(20, 0.9999) == doctest::Approx(52.38597327).epsilon(1e-8));
    CHECK(chi2_cdf(3.841459, 1) == doctest::Approx(0.95000000535).epsilon(1e-9));
}

TEST_CASE("chi-squared quantile inverts the CDF") {
    for (double dof : {1.0, 2.0, 5.0, 10.0, 20.0}) {
        for (double q : {0.01, 0.5, 0.95, 0.999}) {
            const double x = chi2_quantile(dof, q);
            CHECK(chi2_cdf(x, dof) == doctest::Approx(q).epsilon(1e-10));
            const double bis = oracle::invert_cdf([&](double t) { return chi2_cdf(t, dof); }, q, 0.0, 500.0);
            CHECK(x == doctest::Approx(bis).epsilon(1e-9));
        }
    }
}

TEST_CASE("normal, Student-t and skew-normal CDFs") {
    CHECK(1.0 - normal_cdf(1.959964) == doctest::Approx(0.0249999991).epsilon(1e-8));
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(student_t_cdf(0.0, 5.0) == 0.5);
    CHECK(student_t_cdf(2.015048, 5.0) == doctest::Approx(0.95).epsilon(1e-6));
    for (double t : {-2.0, -0.3, 0.0, 1.1, 3.0}) CHECK(skew_normal_cdf(t, 0.0, 1.0, 0.0) == doctest::Approx(normal_cdf(t)));
    // P(X <= 0) for SN(0, 1, a) is 1/2 - atan(a)/pi.
    CHECK(skew_normal_cdf(0.0, 0.0, 1.0, 3.0) == doctest::Approx(0.5 - std::atan(3.0) / std::numbers::pi));
}

TEST_CASE("F quantile") {
    const double x = f_quantile(2.0, 5.0, 0.99);
    const double bis = oracle::invert_cdf(
        [](double t) {
            // F(2, 5) CDF through the regularized incomplete beta: I_{2t/(2t+5)}(1, 2.5).
            const double z = 2.0 * t / (2.0 * t + 5.0);
            return 1.0 - std::pow(1.0 - z, 2.5);
        },
        0.99, 0.0, 1000.0);
    CHECK(x == doctest::Approx(bis).epsilon(1e-9));
}

TEST_CASE("binomial quantile") {
    CHECK(binomial_quantile(19, 0.1, 0.99) == 5);
    CHECK(binomial_quantile(0, 0.1, 0.99) == 0);
    CHECK(binomial_quantile(10, 1.0, 0.5) == 10);
    for (std::size_t n : {1u, 5u, 9u, 19u, 49u, 99u, 500u})
        for (double q : {0.5, 0.9, 0.99})
            for (double p : {0.05, 0.1, 0.3}) CHECK(binomial_quantile(n, p, q) == oracle::binomial_quantile(n, p, q));
}

TEST_CASE("skew-normal mean and covariance") {
    SkewNormalParams p;
    p.xi = Eigen::Vector2d(0.5, -1.0);
    p.omega.resize(2, 2);
    p.omega << 2.0, 0.6, 0.6, 1.0;
    p.alpha = Eigen::Vector2d(3.0, -1.0);
    const auto mc = sn_mean_cov(p);

    const auto ref = ReferenceDistribution::skew_normal(p, {2000, 500, 1, 1});
    Rng rng(21);
    const Points x = ref.sample(100000, rng);
    const Eigen::VectorXd mean = x.colwise().mean();
    const Points centered = x.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
    for (int j = 0; j < 2; ++j) {
        const double se = std::sqrt(mc.cov(j, j) / static_cast<double>(x.rows()));
        CHECK(std::abs(mean(j) - mc.mean(j)) <= 3.0 * se);
        CHECK(std::abs(mean(j) - mc.mean(j)) <= 0.03);
    }
    CHECK((cov - mc.cov).cwiseAbs().maxCoeff() <= 0.03);

    p.alpha.setZero();
    const auto sym = sn_mean_cov(p);
    CHECK((sym.mean - p.xi).norm() == doctest::Approx(0.0));
    CHECK((sym.cov - p.omega).norm() == doctest::Approx(0.0));
}

TEST_CASE("skew-normal with zero skewness has Gaussian depth") {
    SkewNormalParams p;
    p.xi = Eigen::Vector2d(1.0, 2.0);
    p.omega.resize(2, 2);
    p.omega << 1.5, -0.4, -0.4, 0.8;
    p.alpha = Eigen::Vector2d::Zero();
    const auto sn = ReferenceDistribution::skew_normal(p, {2000, 500, 3, 1});
    const auto g = ReferenceDistribution::gaussian(LocationScatter(p.xi, p.omega));
    Rng rng(22);
    std::normal_distribution<double> z(0.0, 1.5);
    for (int i = 0; i < 20; ++i) {
        const Eigen::Vector2d x(1.0 + z(rng), 2.0 + z(rng));
        CHECK(std::abs(sn.theoretical_depth(x) - g.theoretical_depth(x)) <= 0.01);
    }
}

TEST_CASE("elliptical references") {
    const LocationScatter ls(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
    const auto g = ReferenceDistribution::gaussian(ls);
    const auto t = ReferenceDistribution::student_t5(ls);
    CHECK(g.is_elliptical());
    CHECK(g.delta_cutoff(0.99) == doctest::Approx(9.21034037));
    // For t5 the squared radius over d follows F(d, 5).
    CHECK(t.delta_cutoff(0.99) == doctest::Approx(2.0 * f_quantile(2.0, 5.0, 0.99)));
    CHECK(g.marginal_cdf(1.0) == doctest::Approx(normal_cdf(1.0)));
    CHECK(t.marginal_cdf(1.0) == doctest::Approx(student_t_cdf(1.0, 5.0)));
    const Eigen::Vector2d x(1.0, 1.0);
    CHECK(g.theoretical_depth(x) == doctest::Approx(1.0 - normal_cdf(std::sqrt(2.0))));

    const auto spec = prepare_region(g, 0.99);
    CHECK(spec.delta_cutoff == doctest::Approx(9.21034037));
    CHECK(cbeta_contains(Eigen::Vector2d(3.0, 2.0), g, spec));
    CHECK_FALSE(cbeta_contains(Eigen::Vector2d(1.0, 1.0), g, spec));
}

TEST_CASE("depth region of a non-elliptical reference") {
    SkewNormalParams p;
    p.xi = Eigen::Vector2d::Zero();
    p.omega = Eigen::Matrix2d::Identity();
    p.alpha = Eigen::Vector2d(2.0, 2.0);
    const auto ref = ReferenceDistribution::skew_normal(p, {4000, 500, 5, 1});
    const auto spec = prepare_region(ref, 0.9);
    const auto& depths = ref.reference_depths();
    CHECK(std::is_sorted(depths.begin(), depths.end()));
    const auto below = std::count_if(depths.begin(), depths.end(), [&](double d) { return d <= spec.eta_beta; });
    CHECK(static_cast<double>(below) / static_cast<double>(depths.size()) == doctest::Approx(0.1).epsilon(0.02));
    CHECK(std::isnan(spec.delta_cutoff));
}

TEST_CASE("empirical reference needs enough draws") {
    CHECK_THROWS(ReferenceDistribution::empirical(Points::Zero(10, 2)));
}

TEST_CASE("reference family names") {
    CHECK(parse_reference_family("gaussian") == ReferenceFamily::Gaussian);
    CHECK(parse_reference_family("t5") == ReferenceFamily::StudentT5);
    CHECK(parse_reference_family("skewnormal") == ReferenceFamily::SkewNormal);
    CHECK(parse_reference_family("empirical") == ReferenceFamily::EmpiricalApprox);
    CHECK_THROWS_AS(parse_reference_family("cauchy"), ConfigError);
}
