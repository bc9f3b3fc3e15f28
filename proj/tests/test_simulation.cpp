#include <doctest.h>

#include <cmath>
#include <set>

#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"
#include "depthfilter/simulation.hpp"

using namespace depthfilter;

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
    std::vector<int> hit(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
    try {
        parallel_for(10, 3, [](std::size_t i) {
            if (i == 4 || i == 7) throw std::runtime_error(std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "4");
    }
}

TEST_CASE("cell-wise contamination") {
    Scenario s;
    s.p = 5;
    s.n = 40;
    Rng rng(51);
    const auto clean = gen_clean(s, rng);
    CHECK(clean.rows() == 40);
    CHECK(clean.cols() == 5);
    const auto c = contaminate_cellwise(clean, 0.1, 6.0, rng);
    CHECK(c.cells.size() == 20);
    std::set<std::pair<std::size_t, std::size_t>> uniq(c.cells.begin(), c.cells.end());
    CHECK(uniq.size() == 20);
    for (auto [i, j] : c.cells) CHECK(std::abs(c.data(i, j) - 6.0) < 1.0);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 5; ++j) changed += c.data(i, j) != clean(i, j) ? 1 : 0;
    CHECK(changed == 20);
}

TEST_CASE("case-wise contamination") {
    Rng rng(52);
    Scenario s;
    s.p = 4;
    s.n = 50;
    s.sigma0 = random_correlation(4, rng);
    s.validate();
    const auto clean = gen_clean(s, rng);
    const auto c = contaminate_casewise(clean, 0.1, 4.0, s.sigma0, rng);
    CHECK(c.rows.size() == 5);
    const auto v = casewise_direction(s.sigma0);
    CHECK(v.dot(s.sigma0.inverse() * v) == doctest::Approx(1.0));
    const double radius = std::sqrt(4.0 * chi2_quantile(4.0, 0.99));
    for (auto i : c.rows) {
        Eigen::VectorXd x(4);
        for (std::size_t j = 0; j < 4; ++j) x(static_cast<Eigen::Index>(j)) = c.data(i, j);
        const double along = std::abs(x.dot(v) / v.squaredNorm());
        CHECK(along == doctest::Approx(radius).epsilon(0.2));
    }
}

TEST_CASE("mixed contamination keeps case-wise rows intact") {
    Rng rng(53);
    Scenario s;
    s.p = 4;
    s.n = 60;
    const auto clean = gen_clean(s, rng);
    const auto c = contaminate_mixed(clean, 0.1, 0.05, 6.0, s.sigma(), rng);
    CHECK(c.rows.size() == 6);
    std::size_t in_case_rows = 0;
    for (auto [i, j] : c.cells) in_case_rows += std::find(c.rows.begin(), c.rows.end(), i) != c.rows.end();
    // Every cell of a replaced row, plus floor(0.05 * 60 * 4) cells elsewhere.
    CHECK(in_case_rows == 6 * 4);
    CHECK(c.cells.size() == 6 * 4 + 12);
}

TEST_CASE("random correlation matrices") {
    Rng rng(54);
    const auto r = random_correlation(6, rng);
    CHECK(r.diagonal().isOnes(1e-12));
    CHECK((r - r.transpose()).norm() == 0.0);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(r).info() == Eigen::Success);
}

TEST_CASE("LRT divergence") {
    const Eigen::Matrix3d sigma0 = Eigen::Matrix3d::Identity();
    CHECK(lrt_divergence(sigma0, sigma0) == doctest::Approx(0.0).epsilon(1e-14));
    // trace(2I) - log det(2I) - 3 = 6 - 3 ln 2 - 3.
    CHECK(lrt_divergence(2.0 * sigma0, sigma0) == doctest::Approx(3.0 - 3.0 * std::log(2.0)));
    Eigen::Matrix2d a;
    a << 2.0, 0.3, 0.3, 1.0;
    Eigen::Matrix2d b;
    b << 1.0, 0.5, 0.5, 1.0;
    const Eigen::Matrix2d m = a * b.inverse();
    CHECK(lrt_divergence(a, b) == doctest::Approx(m.trace() - std::log(m.determinant()) - 2.0));
    CHECK(lrt_divergence(b, a) > 0.0);
    CHECK(lrt_metric({a, b}, b) == doctest::Approx(0.5 * lrt_divergence(a, b)));
    CHECK(mse_metric({Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 2.0)}, Eigen::Vector2d::Zero()) ==
          doctest::Approx(2.5));
}

TEST_CASE("scenario validation") {
    Scenario s;
    CHECK_NOTHROW(s.validate());
    s.eps_cell = 0.6;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.eps_cell = 0.1;
    s.sigma0 = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK(parse_scenario_kind("casewise") == ScenarioKind::CaseWise);
    CHECK_THROWS_AS(parse_scenario_kind("bursty"), ConfigError);
}

TEST_CASE("experiment is reproducible and thread independent") {
    Scenario s;
    s.kind = ScenarioKind::CellWise;
    s.p = 4;
    s.n = 40;
    s.eps_cell = 0.1;
    s.k = 6.0;
    s.replicates = 3;
    s.seed = 99;
    ExperimentOptions opts;
    opts.filter.n_directions = 200;
    const std::vector<MethodSpec> methods{find_method("MLE"), find_method("HS-UBPF"), find_method("GY-UF")};
    const auto a = run_experiment({s}, methods, opts);
    opts.threads = 3;
    const auto b = run_experiment({s}, methods, opts);
    REQUIRE(a.rows.size() == 3);
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        CHECK(a.rows[r].mean_lrt == b.rows[r].mean_lrt);
        CHECK(a.rows[r].mean_mse == b.rows[r].mean_mse);
    }
    CHECK(a.rows[1].mean_lrt < a.rows[0].mean_lrt);
    CHECK(a.rows[0].mean_recall == 0.0);
}

TEST_CASE("max over k picks the worst contamination size") {
    std::vector<AggregateRow> rows;
    for (double k : {2.0, 4.0, 6.0}) {
        AggregateRow r;
        r.spec.kind = ScenarioKind::CellWise;
        r.spec.k = k;
        r.method = "MLE";
        r.replicates = 1;
        r.mean_lrt = k == 4.0 ? 10.0 : 1.0;
        r.mean_mse = k;
        rows.push_back(r);
    }
    const auto m = max_over_k(rows);
    REQUIRE(m.size() == 1);
    CHECK(m[0].max_lrt == 10.0);
    CHECK(m[0].k_at_max_lrt == 4.0);
    CHECK(m[0].max_mse == 6.0);
    CHECK(m[0].k_at_max_mse == 6.0);
}

TEST_CASE("presets and methods") {
    CHECK(preset_grid("table1-desk").size() == 6);
    CHECK(preset_grid("table2-desk").size() == 6);
    CHECK_THROWS_AS(preset_grid("table9"), ConfigError);
    CHECK(standard_methods().size() == 6);
    CHECK_THROWS_AS(find_method("MCD"), ConfigError);
    CHECK_FALSE(find_method("MLE").filter.has_value());
}

TEST_CASE("skew-normal injection bookkeeping") {
    SnInjectionConfig cfg;
    cfg.params = sn_injection_law();
    cfg.outlier_count = 5;
    cfg.base_n = 60;
    cfg.seed = 3;
    cfg.approx = {3000, 500, 9, 1};
    const auto res = sn_injection_experiment(cfg);
    REQUIRE(res.steps.size() == 6);
    CHECK(res.steps.front().added == 0);
    CHECK(res.steps.front().hs_injected_flagged == 0);
    CHECK(res.data.rows() == 65);
    for (const auto& st : res.steps) {
        CHECK(st.hs_injected_flagged <= st.added);
        CHECK(st.hs_n0 == flag_count(60 + st.added, st.hs_dn));
        CHECK(st.gy_n0 == flag_count(60 + st.added, st.gy_dn));
    }
    CHECK(res.hs_flagged.size() == res.steps.back().hs_n0);

    SnInjectionConfig bad = cfg;
    bad.params.xi = Eigen::Vector3d::Zero();
    CHECK_THROWS_AS(sn_injection_experiment(bad), ConfigError);
}
