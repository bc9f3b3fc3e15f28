#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "depthfilter/depth.hpp"
#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"
#include "oracles.hpp"

using namespace depthfilter;

namespace {

Points integer_cloud(std::size_t n, int range, Rng& rng) {
    std::uniform_int_distribution<int> u(-range, range);
    Points p(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) << u(rng), u(rng);
    return p;
}

Points gaussian_cloud(std::size_t n, Eigen::Index d, Rng& rng) {
    std::normal_distribution<double> z;
    Points p(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < d; ++j) p(i, j) = z(rng);
    return p;
}

} // namespace

TEST_CASE("one-dimensional depth counts closed half-lines") {
    const std::vector<double> s{1.0, 2.0, 2.0, 3.0, 10.0};
    CHECK(hs_depth_1d(2.0, s) == doctest::Approx(3.0 / 5.0));
    CHECK(hs_depth_1d(0.0, s) == 0.0);
    CHECK(hs_depth_1d(10.0, s) == doctest::Approx(1.0 / 5.0));
    CHECK(hs_depth_1d(2.5, s) == doctest::Approx(2.0 / 5.0));

    const std::vector<double> q{0.0, 2.0, 2.5, 10.0, 11.0};
    const auto batch = hs_depths_1d(q, s);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(batch[i] == hs_depth_1d(q[i], s));
}

TEST_CASE("exact bivariate depth on hand-checked configurations") {
    Points square(4, 2);
    square << 0, 0, 1, 0, 0, 1, 1, 1;
    CHECK(hs_depth_exact_2d({0.5, 0.5}, square) == doctest::Approx(0.5));
    CHECK(hs_depth_exact_2d({0.0, 0.0}, square) == doctest::Approx(0.25));
    CHECK(hs_depth_exact_2d({2.0, 2.0}, square) == 0.0);

    Points same(3, 2);
    same << 1, 1, 1, 1, 1, 1;
    CHECK(hs_depth_exact_2d({1.0, 1.0}, same) == 1.0);

    Points line(5, 2);
    line << 0, 0, 1, 1, 2, 2, 3, 3, 4, 4;
    CHECK(hs_depth_exact_2d({2.0, 2.0}, line) == doctest::Approx(3.0 / 5.0));
    CHECK(hs_depth_exact_2d({1.0, 1.0}, line) == doctest::Approx(2.0 / 5.0));
}

TEST_CASE("exact bivariate depth matches direction enumeration") {
    Rng rng(11);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n = 3 + static_cast<std::size_t>(rep % 25);
        const Points s = integer_cloud(n, rep % 3 == 0 ? 2 : 6, rng);
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            const Eigen::Vector2d x = s.row(i).transpose();
            REQUIRE(hs_depth_exact_2d(x, s) == oracle::hs_depth_2d(x, s));
        }
        const Points q = integer_cloud(5, 7, rng);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            const Eigen::Vector2d x = q.row(i).transpose();
            REQUIRE(hs_depth_exact_2d(x, s) == oracle::hs_depth_2d(x, s));
        }
    }
}

TEST_CASE("exact bivariate depth is affine invariant") {
    Rng rng(12);
    Eigen::Matrix2d a;
    a << 2.0, 1.0, -0.5, 3.0;
    const Eigen::Vector2d b(4.0, -7.0);
    const Points s = gaussian_cloud(40, 2, rng);
    const Points t = (s * a.transpose()).rowwise() + b.transpose();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const Eigen::Vector2d x = s.row(i).transpose();
        CHECK(hs_depth_exact_2d(a * x + b, t) == hs_depth_exact_2d(x, s));
    }
}

TEST_CASE("depth does not depend on the order of the sample") {
    Rng rng(13);
    const Points s = gaussian_cloud(30, 2, rng);
    std::vector<Eigen::Index> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Points t(30, 2);
    for (Eigen::Index i = 0; i < 30; ++i) t.row(i) = s.row(perm[static_cast<std::size_t>(i)]);
    const auto a = hs_depths_exact_2d(s, s);
    const auto b = hs_depths_exact_2d(s, t);
    CHECK(a == b);
}

TEST_CASE("random Tukey depth never undercuts the exact depth") {
    Rng rng(14);
    const Points s = gaussian_cloud(200, 2, rng);
    const Points q = gaussian_cloud(30, 2, rng);
    const auto dirs = DirectionSet::random(500, 2, rng);
    const auto approx = random_tukey_depths(q, s, dirs);
    const auto exact = hs_depths_exact_2d(q, s);
    for (std::size_t i = 0; i < exact.size(); ++i) CHECK(approx[i] >= exact[i]);
}

TEST_CASE("more random directions never raise the depth") {
    Rng rng(15);
    const Points s = gaussian_cloud(100, 3, rng);
    const Points q = gaussian_cloud(10, 3, rng);
    const auto dirs = DirectionSet::random(400, 3, rng);
    const auto few = random_tukey_depths(q, s, dirs.prefix(50));
    const auto many = random_tukey_depths(q, s, dirs);
    for (std::size_t i = 0; i < few.size(); ++i) CHECK(many[i] <= few[i]);
}

TEST_CASE("directions are unit vectors") {
    Rng rng(16);
    const auto dirs = DirectionSet::random(100, 4, rng);
    for (Eigen::Index i = 0; i < dirs.matrix().rows(); ++i) CHECK(dirs.matrix().row(i).norm() == doctest::Approx(1.0));
}

TEST_CASE("sample depth dispatch") {
    Rng rng(17);
    const Points s1 = gaussian_cloud(20, 1, rng);
    const auto d1 = sample_depths(s1, s1, {});
    for (Eigen::Index i = 0; i < s1.rows(); ++i) {
        const std::vector<double> col(s1.data(), s1.data() + s1.rows());
        CHECK(d1[static_cast<std::size_t>(i)] == hs_depth_1d(s1(i, 0), col));
    }
    const Points s2 = gaussian_cloud(20, 2, rng);
    CHECK(sample_depths(s2, s2, {}) == hs_depths_exact_2d(s2, s2));
    const Points s3 = gaussian_cloud(20, 3, rng);
    CHECK(sample_depths(s3, s3, {100, 5}) == sample_depths(s3, s3, {100, 5}));
}

TEST_CASE("elliptical and GY depth closed forms") {
    Eigen::Matrix2d sigma;
    sigma << 2.0, 0.5, 0.5, 1.0;
    const LocationScatter ls(Eigen::Vector2d(1.0, -1.0), sigma);
    CHECK(ls.mahalanobis_sq(Eigen::Vector2d(1.0, -1.0)) == 0.0);
    const Eigen::Vector2d x(2.0, 0.5);
    const Eigen::Vector2d diff = x - Eigen::Vector2d(1.0, -1.0);
    const double delta = diff.dot(sigma.inverse() * diff);
    CHECK(ls.mahalanobis_sq(x) == doctest::Approx(delta).epsilon(1e-12));
    CHECK(hs_depth_elliptical(x, ls, normal_cdf) == doctest::Approx(1.0 - normal_cdf(std::sqrt(delta))));
    CHECK(gy_depth(x, ls, [](double t) { return chi2_cdf(t, 2.0); }) == doctest::Approx(std::exp(-delta / 2.0)));
    CHECK(hs_depth_elliptical(Eigen::Vector2d(1.0, -1.0), ls, normal_cdf) == doctest::Approx(0.5));
}

TEST_CASE("location scatter rejects non-SPD scatter") {
    Eigen::Matrix2d bad;
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(LocationScatter(Eigen::Vector2d::Zero(), bad), NumericError);
}

TEST_CASE("deepest observation") {
    Points s(5, 2);
    s << 0, 0, 4, 0, 0, 4, 4, 4, 2, 2;
    const auto [idx, pt] = max_depth_observation(s, {});
    CHECK(idx == 4);
    CHECK(pt(0) == 2.0);
}
