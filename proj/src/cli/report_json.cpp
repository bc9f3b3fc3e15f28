#include "depthfilter/report.hpp"

#include <cstdlib>
#include <fstream>

#include "depthfilter/errors.hpp"
#include "depthfilter/screening.hpp"

#ifndef DEPTHFILTER_VERSION
#define DEPTHFILTER_VERSION "0.0.0"
#endif

namespace depthfilter {

Json to_json(const FilterConfig& cfg) {
    return Json{
        {"method", std::string(to_string(cfg.method))},
        {"stages", to_string(cfg.stages)},
        {"beta", cfg.beta},
        {"alpha", cfg.alpha},
        {"delta", cfg.delta},
        {"binom_q", cfg.binom_q},
        {"directions", cfg.n_directions},
        {"ref", std::string(to_string(cfg.ref_family))},
        {"seed", cfg.seed},
        {"em_tol", cfg.em_tol},
        {"em_max_iter", cfg.em_max_iter},
        {"mad_scale", cfg.mad_scale},
        {"min_pair_rows", cfg.min_pair_rows},
        {"tuple_cap", cfg.tuple_cap},
        {"estimator", cfg.estimator},
        {"init_scatter", cfg.init_scatter},
    };
}

FilterConfig filter_config_from_json(const Json& j, FilterConfig cfg) {
    if (!j.is_object()) throw ConfigError("filter settings must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "method")
                cfg.method = parse_filter_method(v.get<std::string>());
            else if (key == "stages")
                cfg.stages = parse_stages(v.get<std::string>());
            else if (key == "beta")
                cfg.beta = v.get<double>();
            else if (key == "alpha")
                cfg.alpha = v.get<double>();
            else if (key == "delta")
                cfg.delta = v.get<double>();
            else if (key == "binom_q")
                cfg.binom_q = v.get<double>();
            else if (key == "directions")
                cfg.n_directions = v.get<std::size_t>();
            else if (key == "ref")
                cfg.ref_family = parse_reference_family(v.get<std::string>());
            else if (key == "seed")
                cfg.seed = v.get<std::uint64_t>();
            else if (key == "em_tol")
                cfg.em_tol = v.get<double>();
            else if (key == "em_max_iter")
                cfg.em_max_iter = v.get<std::size_t>();
            else if (key == "mad_scale")
                cfg.mad_scale = v.get<double>();
            else if (key == "min_pair_rows")
                cfg.min_pair_rows = v.get<std::size_t>();
            else if (key == "tuple_cap")
                cfg.tuple_cap = v.get<std::size_t>();
            else if (key == "estimator")
                cfg.estimator = v.get<std::string>();
            else if (key == "init_scatter")
                cfg.init_scatter = v.get<std::string>();
            else
                throw ConfigError("unknown filter setting '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("filter settings: ") + e.what());
    }
    return cfg;
}

namespace {

Json column_names(const std::vector<std::size_t>& cols, const std::vector<std::string>& names) {
    Json out = Json::array();
    for (auto c : cols) out.push_back(names.at(c));
    return out;
}

} // namespace

Json to_json(const FilterOutcome& o, const std::vector<std::string>& names) {
    return Json{
        {"stage", o.stage},     {"columns", column_names(o.columns, names)},
        {"n", o.n},             {"d_n", o.d_n},
        {"n0", o.n0},           {"flagged_rows", o.flagged},
        {"skipped", o.skipped}, {"note", o.note},
    };
}

Json to_json(const PipelineReport& rep, const std::vector<std::string>& names) {
    Json stages = Json::object();
    auto list = [&](const std::vector<FilterOutcome>& os) {
        Json a = Json::array();
        for (const auto& o : os) a.push_back(to_json(o, names));
        return a;
    };
    stages["univariate"] = list(rep.univariate);
    stages["bivariate"] = list(rep.bivariate);
    stages["pvariate"] = rep.pvariate ? to_json(*rep.pvariate, names) : Json(nullptr);
    stages["tuples"] = list(rep.tuples);

    Json pairs = Json::array();
    for (const auto& t : rep.pairs.triples()) pairs.push_back({t.row, names.at(t.j), names.at(t.k)});

    Json counts = Json::array();
    for (const auto& c : rep.cell_counts)
        counts.push_back({{"row", c.row}, {"column", names.at(c.col)}, {"m", c.m}, {"c", c.c}, {"flagged", c.flagged}});

    Json cells = Json::array();
    Json rows = Json::array();
    for (std::size_t i = 0; i < rep.flags.rows(); ++i) {
        if (rep.flags.cols() > 0 && rep.flags.state(i, 0) == CellState::CaseFlagged) {
            rows.push_back(i);
            continue;
        }
        for (std::size_t j = 0; j < rep.flags.cols(); ++j)
            if (rep.flags.state(i, j) == CellState::CellFlagged) cells.push_back({i, names.at(j)});
    }

    return Json{
        {"second_step_estimator", rep.config.estimator},
        {"stages", stages},
        {"pairs", pairs},
        {"cell_counts", counts},
        {"flags", {{"cells", cells}, {"rows", rows}}},
        {"totals",
         {{"cellwise_cells", rep.cellwise_flags},
          {"casewise_rows", rep.casewise_rows},
          {"filtered_cells", rep.flags.filtered_cell_count()}}},
        {"warnings", rep.warnings},
    };
}

Json to_json(const EstimatorResult& est, const std::vector<std::string>& names) {
    Json loc = Json::object();
    for (Eigen::Index j = 0; j < est.location.size(); ++j) loc[names.at(static_cast<std::size_t>(j))] = est.location(j);
    Json scatter = Json::array();
    for (Eigen::Index i = 0; i < est.scatter.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < est.scatter.cols(); ++j) row.push_back(est.scatter(i, j));
        scatter.push_back(row);
    }
    return Json{
        {"estimator", est.estimator},     {"columns", names},
        {"location", loc},                {"scatter", scatter},
        {"iterations", est.iterations},   {"converged", est.converged},
        {"loglik_trace", est.loglik_trace},
    };
}

Json to_json(const Scenario& s) {
    Json j{
        {"kind", std::string(to_string(s.kind))},
        {"p", s.p},
        {"n", s.n},
        {"eps_cell", s.eps_cell},
        {"eps_case", s.eps_case},
        {"k", s.k},
        {"replicates", s.replicates},
        {"seed", s.seed},
    };
    if (s.sigma0.size() == 0) {
        j["sigma0"] = "identity";
    } else {
        Json m = Json::array();
        for (Eigen::Index i = 0; i < s.sigma0.rows(); ++i) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < s.sigma0.cols(); ++c) row.push_back(s.sigma0(i, c));
            m.push_back(row);
        }
        j["sigma0"] = m;
    }
    return j;
}

Json make_manifest(const std::string& command, const Json& config, std::uint64_t seed,
                   const std::vector<std::filesystem::path>& inputs) {
    Json files = Json::array();
    for (const auto& p : inputs) files.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p.string())}});
    Json timestamp = nullptr;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        try {
            timestamp = std::stoll(epoch);
        } catch (const std::exception&) {
            throw ConfigError("SOURCE_DATE_EPOCH must be an integer");
        }
    }
    return Json{
        {"tool", "depthfilter"}, {"version", DEPTHFILTER_VERSION}, {"schema_version", kSchemaVersion},
        {"command", command},    {"seed", seed},                   {"config", config},
        {"inputs", files},       {"timestamp", timestamp},
    };
}

void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
}

} // namespace depthfilter
