#include "depthfilter/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "depthfilter/csv.hpp"
#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"
#include "depthfilter/report.hpp"
#include "depthfilter/screening.hpp"
#include "depthfilter/simulation.hpp"

namespace depthfilter {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : std::string("NA"); }

Eigen::VectorXd vector_from(const Json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

Eigen::MatrixXd matrix_from(const Json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty array of rows");
    const auto r = j.size();
    const auto c = j[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < r; ++i) {
        if (!j[i].is_array() || j[i].size() != c) throw ConfigError(std::string(what) + " rows must have equal length");
        for (std::size_t k = 0; k < c; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
    return m;
}

SkewNormalParams sn_from_json(const Json& j) {
    SkewNormalParams p;
    p.xi = vector_from(j.at("xi"), "xi");
    p.omega = matrix_from(j.at("omega"), "omega");
    p.alpha = vector_from(j.at("alpha"), "alpha");
    const auto d = p.xi.size();
    if (p.omega.rows() != d || p.omega.cols() != d || p.alpha.size() != d)
        throw ConfigError("skew-normal parameters have inconsistent dimensions");
    return p;
}

Json sn_to_json(const SkewNormalParams& p) {
    Json omega = Json::array();
    for (Eigen::Index i = 0; i < p.omega.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < p.omega.cols(); ++k) row.push_back(p.omega(i, k));
        omega.push_back(row);
    }
    return Json{{"xi", std::vector<double>(p.xi.data(), p.xi.data() + p.xi.size())},
                {"omega", omega},
                {"alpha", std::vector<double>(p.alpha.data(), p.alpha.data() + p.alpha.size())}};
}

template <class F>
auto json_guard(F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(e.what());
    }
}

} // namespace

void cmd_filter(const FilterCommand& c) {
    const auto m = load_csv(c.input, c.na_token);
    c.cfg.validate();
    const auto rep = c.sequence.empty() ? run_pipeline(m, c.cfg) : sequence_filter(m, c.sequence, c.cfg);
    write_csv(m.with_mask(rep.flags.usable_mask()), c.output, c.na_token);

    Json config = to_json(c.cfg);
    config["na_token"] = c.na_token;
    if (!c.sequence.empty()) config["sequence"] = c.sequence;
    Json report{
        {"schema", "depthfilter.report"},
        {"manifest", make_manifest("filter", config, c.cfg.seed, {c.input})},
        {"n", m.rows()},
        {"p", m.cols()},
        {"columns", m.names()},
    };
    const Json body = to_json(rep, m.names());
    for (const auto& [k, v] : body.items()) report[k] = v;
    write_json(report, c.report);
}

void cmd_estimate(const EstimateCommand& c) {
    const auto m = load_csv(c.input, c.na_token);
    c.cfg.validate();
    Json config = to_json(c.cfg);
    config["na_token"] = c.na_token;
    config["no_filter"] = c.no_filter;

    Json out{{"schema", "depthfilter.estimates"}, {"manifest", make_manifest("estimate", config, c.cfg.seed, {c.input})}};
    if (c.no_filter) {
        const auto est = find_estimator(c.cfg.estimator)(m, c.cfg.em_options());
        out["filter"] = nullptr;
        out["estimate"] = to_json(est, m.names());
    } else {
        const auto [rep, est] = two_step(m, c.cfg);
        out["filter"] = {{"cellwise_cells", rep.cellwise_flags},
                         {"casewise_rows", rep.casewise_rows},
                         {"filtered_cells", rep.flags.filtered_cell_count()},
                         {"warnings", rep.warnings}};
        out["estimate"] = to_json(est, m.names());
    }
    write_json(out, c.output);
}

namespace {

std::vector<Scenario> grid_from_json(const Json& j) {
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    const std::size_t reps = j.value("replicates", std::size_t{50});
    std::vector<Scenario> grid;
    std::size_t index = 0;
    for (const auto& sj : j.at("scenarios")) {
        Scenario base;
        base.kind = parse_scenario_kind(sj.at("kind").get<std::string>());
        base.p = sj.at("p").get<std::size_t>();
        base.n = sj.value("n", 10 * base.p);
        base.eps_cell = sj.value("eps_cell", 0.0);
        base.eps_case = sj.value("eps_case", 0.0);
        base.replicates = sj.value("replicates", reps);
        base.seed = sj.value("seed", seed);
        if (sj.contains("sigma0")) {
            const auto& s0 = sj.at("sigma0");
            if (s0.is_string() && s0.get<std::string>() == "random") {
                Rng rng(derive_seed(base.seed, {0xc0, index}));
                base.sigma0 = random_correlation(base.p, rng);
            } else if (!(s0.is_string() && s0.get<std::string>() == "identity")) {
                base.sigma0 = matrix_from(s0, "sigma0");
            }
        }
        std::vector<double> ks;
        if (!sj.contains("k"))
            ks.push_back(0.0);
        else if (sj.at("k").is_array())
            ks = sj.at("k").get<std::vector<double>>();
        else
            ks.push_back(sj.at("k").get<double>());
        for (double k : ks) {
            Scenario s = base;
            s.k = k;
            grid.push_back(s);
        }
        ++index;
    }
    return grid;
}

void simulate_grid(const SimulateCommand& c, std::vector<Scenario> grid, std::vector<std::string> method_names,
                   FilterConfig cfg, const Json& plan, const std::vector<std::filesystem::path>& inputs) {
    if (c.replicates)
        for (auto& s : grid) s.replicates = *c.replicates;
    if (c.seed)
        for (auto& s : grid) s.seed = *c.seed;
    if (!c.methods.empty()) method_names = c.methods;
    std::vector<MethodSpec> methods;
    if (method_names.empty())
        methods = standard_methods();
    else
        for (const auto& name : method_names) methods.push_back(find_method(name));

    const auto res = run_experiment(grid, methods, {cfg, c.threads});

    auto out = open_out(c.results);
    out << "scenario,kind,p,n,eps_cell,eps_case,k,method,replicates,failures,mean_lrt,mean_mse,mean_recall,"
           "mean_precision\n";
    for (const auto& r : res.rows)
        out << r.scenario << ',' << to_string(r.spec.kind) << ',' << r.spec.p << ',' << r.spec.n << ','
            << fmt(r.spec.eps_cell) << ',' << fmt(r.spec.eps_case) << ',' << fmt(r.spec.k) << ',' << r.method << ','
            << r.replicates << ',' << r.failures << ',' << fmt(r.mean_lrt) << ',' << fmt(r.mean_mse) << ','
            << fmt(r.mean_recall) << ',' << fmt(r.mean_precision) << '\n';

    Json scenarios = Json::array();
    for (const auto& s : grid) scenarios.push_back(to_json(s));
    Json names = Json::array();
    for (const auto& m : methods) names.push_back(m.name);
    Json config{{"plan", plan}, {"filter", to_json(cfg)}, {"methods", names}, {"scenarios", scenarios}};

    Json rows = Json::array();
    for (const auto& r : res.rows)
        rows.push_back({{"scenario", r.scenario},
                        {"kind", std::string(to_string(r.spec.kind))},
                        {"k", r.spec.k},
                        {"method", r.method},
                        {"replicates", r.replicates},
                        {"failures", r.failures},
                        {"mean_lrt", r.mean_lrt},
                        {"mean_mse", r.mean_mse},
                        {"mean_recall", r.mean_recall},
                        {"mean_precision", r.mean_precision}});
    Json max_rows = Json::array();
    for (const auto& r : res.max_rows)
        max_rows.push_back({{"kind", std::string(to_string(r.spec.kind))},
                            {"p", r.spec.p},
                            {"n", r.spec.n},
                            {"eps_cell", r.spec.eps_cell},
                            {"eps_case", r.spec.eps_case},
                            {"method", r.method},
                            {"max_lrt", r.max_lrt},
                            {"k_at_max_lrt", r.k_at_max_lrt},
                            {"max_mse", r.max_mse},
                            {"k_at_max_mse", r.k_at_max_mse}});
    Json errors = Json::array();
    for (const auto& rec : res.replicates)
        if (!rec.ok)
            errors.push_back(
                {{"scenario", rec.scenario}, {"method", rec.method}, {"replicate", rec.replicate}, {"error", rec.error}});

    const std::uint64_t seed = grid.empty() ? 0 : grid.front().seed;
    write_json(Json{{"schema", "depthfilter.summary"},
                    {"manifest", make_manifest("simulate", config, seed, inputs)},
                    {"type", "grid"},
                    {"rows", rows},
                    {"max_over_k", max_rows},
                    {"failures", errors}},
               c.summary);
}

struct SnPlan {
    SnInjectionConfig base;
    std::vector<Eigen::Vector2d> centers;
    std::size_t seeds = kSnInjectionSeeds;
};

SnPlan sn_plan_defaults() {
    SnPlan plan;
    plan.base.params = sn_injection_law();
    plan.centers = sn_injection_centers();
    plan.base.seed = 20190601;
    return plan;
}

SnPlan sn_plan_from_json(const Json& j) {
    SnPlan plan = sn_plan_defaults();
    auto& b = plan.base;
    if (j.contains("xi") || j.contains("omega") || j.contains("alpha")) b.params = sn_from_json(j);
    b.base_n = j.value("base_n", b.base_n);
    b.outlier_count = j.value("outlier_count", b.outlier_count);
    b.outlier_sd = j.value("outlier_sd", b.outlier_sd);
    b.beta = j.value("beta", b.beta);
    b.alpha = j.value("gy_alpha", b.alpha);
    b.seed = j.value("seed", b.seed);
    b.approx.reference_size = j.value("reference_size", b.approx.reference_size);
    b.approx.n_directions = j.value("directions", b.approx.n_directions);
    plan.seeds = j.value("seeds", plan.seeds);
    if (j.contains("centers")) {
        plan.centers.clear();
        for (const auto& cj : j.at("centers")) {
            const auto v = vector_from(cj, "center");
            if (v.size() != 2) throw ConfigError("centers must be 2-vectors");
            plan.centers.emplace_back(v(0), v(1));
        }
    }
    return plan;
}

void simulate_sn(const SimulateCommand& c, SnPlan plan, const Json& source,
                 const std::vector<std::filesystem::path>& inputs) {
    if (c.seed) plan.base.seed = *c.seed;
    if (c.replicates) plan.seeds = *c.replicates;
    plan.base.approx.seed = derive_seed(plan.base.seed, {0x5e});
    plan.base.approx.threads = c.threads;
    const auto ref = ReferenceDistribution::skew_normal(plan.base.params, plan.base.approx);

    auto out = open_out(c.results);
    out << "center_x,center_y,seed,added,hs_dn,hs_n0,hs_injected_flagged,gy_dn,gy_n0,gy_injected_flagged\n";
    Json runs = Json::array();
    for (const auto& center : plan.centers) {
        std::vector<SnInjectionResult> results(plan.seeds);
        parallel_for(plan.seeds, c.threads, [&](std::size_t s) {
            SnInjectionConfig cfg = plan.base;
            cfg.center = center;
            cfg.seed = derive_seed(plan.base.seed, {s});
            results[s] = sn_injection_experiment(cfg, &ref);
        });
        std::vector<double> hs_final, gy_final, gy_share;
        for (std::size_t s = 0; s < plan.seeds; ++s) {
            for (const auto& st : results[s].steps)
                out << fmt(center(0)) << ',' << fmt(center(1)) << ',' << s << ',' << st.added << ',' << fmt(st.hs_dn)
                    << ',' << st.hs_n0 << ',' << st.hs_injected_flagged << ',' << fmt(st.gy_dn) << ',' << st.gy_n0
                    << ',' << st.gy_injected_flagged << '\n';
            const auto& last = results[s].steps.back();
            hs_final.push_back(static_cast<double>(last.hs_n0));
            gy_final.push_back(static_cast<double>(last.gy_n0));
            gy_share.push_back(last.gy_n0 == 0 ? 0.0
                                               : static_cast<double>(last.gy_injected_flagged) /
                                                     static_cast<double>(last.gy_n0));
        }
        Json per_step = Json::array();
        for (std::size_t a = 0; a <= plan.base.outlier_count; ++a) {
            std::vector<double> hs, gy;
            for (const auto& r : results) {
                hs.push_back(static_cast<double>(r.steps[a].hs_n0));
                gy.push_back(static_cast<double>(r.steps[a].gy_n0));
            }
            per_step.push_back({{"added", a}, {"hs_n0_median", median(hs)}, {"gy_n0_median", median(gy)}});
        }
        runs.push_back({{"center", {center(0), center(1)}},
                        {"seeds", plan.seeds},
                        {"final_hs_n0_median", median(hs_final)},
                        {"final_gy_n0_median", median(gy_final)},
                        {"final_gy_injected_share_median", median(gy_share)},
                        {"steps", per_step}});
    }
    const auto region = prepare_region(ref, plan.base.beta);
    Json config{{"plan", source},
                {"law", sn_to_json(plan.base.params)},
                {"base_n", plan.base.base_n},
                {"outlier_count", plan.base.outlier_count},
                {"outlier_sd", plan.base.outlier_sd},
                {"beta", plan.base.beta},
                {"gy_alpha", plan.base.alpha},
                {"reference_size", plan.base.approx.reference_size},
                {"directions", plan.base.approx.n_directions},
                {"seeds", plan.seeds}};
    write_json(Json{{"schema", "depthfilter.summary"},
                    {"manifest", make_manifest("simulate", config, plan.base.seed, inputs)},
                    {"type", "sn-injection"},
                    {"eta_beta", region.eta_beta},
                    {"runs", runs}},
               c.summary);
}

} // namespace

std::vector<std::string> simulate_presets() {
    auto names = preset_names();
    names.push_back("sn-injection");
    return names;
}

void cmd_simulate(const SimulateCommand& c) {
    if (c.scenario.empty() == c.preset.empty()) throw ConfigError("give exactly one of a scenario file or --preset");
    FilterConfig cfg = c.cfg;
    cfg.threads = 1;
    if (!c.preset.empty()) {
        const Json plan{{"preset", c.preset}};
        if (c.preset == "sn-injection")
            simulate_sn(c, sn_plan_defaults(), plan, {});
        else
            simulate_grid(c, preset_grid(c.preset), {}, cfg, plan, {});
        return;
    }
    const Json j = read_json(c.scenario);
    json_guard([&] {
        const auto type = j.value("type", std::string("grid"));
        if (type == "sn-injection") {
            simulate_sn(c, sn_plan_from_json(j), j, {c.scenario});
        } else if (type == "grid") {
            std::vector<std::string> names;
            if (j.contains("methods")) names = j.at("methods").get<std::vector<std::string>>();
            if (j.contains("filter")) cfg = filter_config_from_json(j.at("filter"), cfg);
            cfg.threads = 1;
            simulate_grid(c, grid_from_json(j), names, cfg, j, {c.scenario});
        } else {
            throw ConfigError("unknown scenario type '" + type + "'");
        }
        return 0;
    });
}

void cmd_depth(const DepthCommand& c) {
    const auto m = c.sha256.empty() ? load_csv(c.input, c.na_token) : load_smallcap(c.input, c.sha256);
    const auto p = static_cast<Eigen::Index>(m.cols());
    if (!(c.screen_q > 0.0 && c.screen_q < 1.0)) throw ConfigError("screen quantile must lie in (0, 1)");
    if (c.directions < 1) throw ConfigError("directions must be at least 1");
    std::vector<std::filesystem::path> inputs{c.input};
    Json config{{"ref", std::string(to_string(c.ref))}, {"directions", c.directions},
                {"seed", c.seed},                        {"screen_q", c.screen_q},
                {"mad_k", c.mad_k},                      {"na_token", c.na_token}};

    ApproxOptions approx;
    approx.reference_size = c.reference_size;
    approx.n_directions = c.directions;
    approx.seed = derive_seed(c.seed, {0xde});
    approx.threads = c.threads;

    std::optional<ReferenceDistribution> ref;
    std::string scatter_source;
    switch (c.ref) {
    case ReferenceFamily::Gaussian:
    case ReferenceFamily::StudentT5: {
        Eigen::VectorXd mu;
        Eigen::MatrixXd sigma;
        if (!c.estimates.empty()) {
            inputs.emplace_back(c.estimates);
            const auto j = read_json(c.estimates);
            json_guard([&] {
                const auto& est = j.at("estimate");
                mu.resize(p);
                const auto& loc = est.at("location");
                for (std::size_t k = 0; k < m.cols(); ++k)
                    mu(static_cast<Eigen::Index>(k)) = loc.at(m.names()[k]).get<double>();
                sigma = matrix_from(est.at("scatter"), "scatter");
                return 0;
            });
            scatter_source = "estimates-file";
        } else {
            const auto est = em_gaussian_missing(m);
            mu = est.location;
            sigma = est.scatter;
            scatter_source = "em-gaussian";
        }
        if (sigma.rows() != p || sigma.cols() != p) throw ConfigError("estimates do not match the data dimension");
        ref = ReferenceDistribution::elliptical(c.ref, LocationScatter(mu, sigma));
        break;
    }
    case ReferenceFamily::SkewNormal: {
        if (c.sn_params.empty()) throw ConfigError("--ref skewnormal needs --sn-params");
        inputs.emplace_back(c.sn_params);
        const auto params = json_guard([&] { return sn_from_json(read_json(c.sn_params)); });
        if (params.xi.size() != p) throw ConfigError("skew-normal dimension does not match the data");
        ref = ReferenceDistribution::skew_normal(params, approx);
        scatter_source = "skew-normal moments";
        break;
    }
    case ReferenceFamily::EmpiricalApprox: {
        if (c.ref_sample.empty()) throw ConfigError("--ref empirical needs --ref-sample");
        inputs.emplace_back(c.ref_sample);
        const auto sample_m = load_csv(c.ref_sample, c.na_token);
        if (static_cast<Eigen::Index>(sample_m.cols()) != p) throw ConfigError("reference sample dimension mismatch");
        std::vector<std::size_t> cols(m.cols());
        for (std::size_t k = 0; k < cols.size(); ++k) cols[k] = k;
        ref = ReferenceDistribution::empirical(gather(sample_m, complete_rows(sample_m), cols), approx);
        scatter_source = "reference-sample moments";
        break;
    }
    }
    config["scatter_source"] = scatter_source;
    if (!c.sha256.empty()) config["sha256"] = c.sha256;
    if (c.ref != ReferenceFamily::Gaussian && c.ref != ReferenceFamily::StudentT5) config["reference_size"] = c.reference_size;

    const auto rows = complete_rows(m);
    std::vector<std::size_t> cols(m.cols());
    for (std::size_t k = 0; k < cols.size(); ++k) cols[k] = k;
    const Points sample = gather(m, rows, cols);
    std::vector<double> emp, theo, maha;
    if (!rows.empty()) {
        emp = sample_depths(sample, sample, {c.directions, derive_seed(c.seed, {0xd1})});
        theo = ref->theoretical_depths(sample);
        maha = ref->location_scatter().mahalanobis_sq_rows(sample);
    }
    const double cutoff = chi2_quantile(static_cast<double>(p), c.screen_q);
    const auto mads = mad_screen(m, c.mad_k);

    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> emp_all(m.rows(), nan), theo_all(m.rows(), nan), maha_all(m.rows(), nan);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        emp_all[rows[r]] = emp[r];
        theo_all[rows[r]] = theo[r];
        maha_all[rows[r]] = maha[r];
    }

    auto out = open_out(c.output);
    out << "row,sample_depth,theoretical_depth,mahalanobis_sq,exceeds,mad_cells\n";
    std::size_t exceeding = 0;
    std::size_t marked_identified = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::size_t cells = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) cells += mads.marked[i * m.cols() + j];
        const bool complete = std::isfinite(maha_all[i]);
        const bool exceeds = complete && maha_all[i] > cutoff;
        exceeding += exceeds ? 1 : 0;
        if (exceeds && cells > 0) ++marked_identified;
        out << i << ',' << fmt(emp_all[i]) << ',' << fmt(theo_all[i]) << ',' << fmt(maha_all[i]) << ','
            << (complete ? (exceeds ? "1" : "0") : "NA") << ',' << cells << '\n';
    }

    {
        write_json(Json{{"schema", "depthfilter.depth-summary"},
                        {"manifest", make_manifest("depth", config, c.seed, inputs)},
                        {"n", m.rows()},
                        {"p", m.cols()},
                        {"complete_rows", rows.size()},
                        {"mad_screen",
                         {{"k", c.mad_k},
                          {"marked_cells", mads.marked_cells},
                          {"cell_percent", mads.cell_percent},
                          {"marked_rows", mads.marked_rows.size()},
                          {"row_percent", mads.row_percent}}},
                        {"md_screen",
                         {{"quantile", c.screen_q},
                          {"cutoff", cutoff},
                          {"exceeding_rows", exceeding},
                          {"marked_rows_identified", marked_identified}}}},
                   c.summary);
    }
}

} // namespace depthfilter
