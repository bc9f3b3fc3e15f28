#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "depthfilter/errors.hpp"
#include "depthfilter/simulation.hpp"

namespace depthfilter {

std::vector<MethodSpec> standard_methods() {
    const StageSet u{true, false, false};
    const StageSet ub{true, true, false};
    const StageSet ubp{true, true, true};
    return {
        {"MLE", std::nullopt, {}},
        {"GY-UF", FilterMethod::GY, u},
        {"GY-UBF", FilterMethod::GY, ub},
        {"HS-UF", FilterMethod::HS, u},
        {"HS-UBF", FilterMethod::HS, ub},
        {"HS-UBPF", FilterMethod::HS, ubp},
    };
}

MethodSpec find_method(std::string_view name) {
    for (auto& m : standard_methods())
        if (m.name == name) return m;
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

namespace {

struct Truth {
    std::set<std::pair<std::size_t, std::size_t>> cells;
};

/// Applies the selected stages in order, caching every prefix so methods sharing stages share work.
class StageCache {
public:
    StageCache(const DataMatrix& m, const FilterConfig& base) : m_(m), base_(base) {}

    const CellFlags& flags_for(FilterMethod method, const StageSet& stages) {
        FilterConfig cfg = base_;
        cfg.method = method;
        std::string key(to_string(method));
        const CellFlags* cur = &lookup(key, [&] { return CellFlags(m_); });
        auto step = [&](bool on, char tag, auto&& apply) {
            if (!on) return;
            const CellFlags& prev = *cur;
            key += tag;
            cur = &lookup(key, [&] { return apply(prev); });
        };
        step(stages.univariate, 'u', [&](const CellFlags& f) { return univariate_stage(m_, cfg, f).first; });
        step(stages.bivariate && m_.cols() >= 2, 'b', [&](const CellFlags& f) {
            const auto pairs = bivariate_stage(m_, cfg, f).first;
            return cell_flag_stage(pairs, f, cfg.delta, cfg.binom_q);
        });
        step(stages.pvariate, 'p', [&](const CellFlags& f) { return pvariate_stage(m_, cfg, f).first; });
        return *cur;
    }

private:
    template <class F>
    const CellFlags& lookup(const std::string& key, F&& make) {
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, make()).first;
        return it->second;
    }

    const DataMatrix& m_;
    FilterConfig base_;
    std::map<std::string, CellFlags> cache_;
};

Contaminated contaminate(const Scenario& s, Rng& rng) {
    auto clean = gen_clean(s, rng);
    switch (s.kind) {
    case ScenarioKind::Clean: return {clean, {}, {}};
    case ScenarioKind::CellWise: return contaminate_cellwise(clean, s.eps_cell, s.k, rng);
    case ScenarioKind::CaseWise: return contaminate_casewise(clean, s.eps_case, s.k, s.sigma(), rng);
    case ScenarioKind::Mixed: return contaminate_mixed(clean, s.eps_case, s.eps_cell, s.k, s.sigma(), rng);
    }
    return {clean, {}, {}};
}

} // namespace

ExperimentResult run_experiment(const std::vector<Scenario>& grid, const std::vector<MethodSpec>& methods,
                                const ExperimentOptions& opts) {
    for (const auto& s : grid) s.validate();
    opts.filter.validate();
    if (methods.empty()) throw ConfigError("no methods selected");

    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t s = 0; s < grid.size(); ++s)
        for (std::size_t r = 0; r < grid[s].replicates; ++r) tasks.emplace_back(s, r);

    std::vector<std::vector<ReplicateRecord>> slots(tasks.size());
    parallel_for(tasks.size(), opts.threads, [&](std::size_t t) {
        const auto [si, r] = tasks[t];
        const auto& s = grid[si];
        const auto seed = derive_seed(s.seed, {si, r});
        Rng rng(seed);
        const auto data = contaminate(s, rng);
        const Truth truth{{data.cells.begin(), data.cells.end()}};
        const Eigen::MatrixXd sigma0 = s.sigma();

        FilterConfig cfg = opts.filter;
        cfg.seed = derive_seed(seed, {0xf117e5});
        cfg.threads = 1;
        StageCache cache(data.data, cfg);

        auto& out = slots[t];
        for (const auto& method : methods) {
            ReplicateRecord rec;
            rec.scenario = si;
            rec.method = method.name;
            rec.replicate = r;
            try {
                DataMatrix input = data.data;
                if (method.filter) {
                    const auto& flags = cache.flags_for(*method.filter, method.stages);
                    input = data.data.with_mask(flags.usable_mask());
                    std::size_t hits = 0;
                    for (std::size_t i = 0; i < flags.rows(); ++i)
                        for (std::size_t j = 0; j < flags.cols(); ++j) {
                            if (!flags.observed(i, j) || flags.usable(i, j)) continue;
                            ++rec.filtered_cells;
                            if (truth.cells.count({i, j})) ++hits;
                        }
                    rec.recall = truth.cells.empty() ? 1.0 : static_cast<double>(hits) / truth.cells.size();
                    rec.precision =
                        rec.filtered_cells == 0 ? 1.0 : static_cast<double>(hits) / rec.filtered_cells;
                }
                const auto est = find_estimator(cfg.estimator)(input, cfg.em_options());
                rec.sq_error = est.location.squaredNorm();
                rec.lrt = lrt_divergence(est.scatter, sigma0);
                rec.ok = true;
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
            }
            out.push_back(std::move(rec));
        }
    });

    ExperimentResult res;
    for (auto& slot : slots)
        for (auto& rec : slot) res.replicates.push_back(std::move(rec));

    for (std::size_t si = 0; si < grid.size(); ++si)
        for (const auto& method : methods) {
            AggregateRow row;
            row.scenario = si;
            row.spec = grid[si];
            row.method = method.name;
            std::size_t ok = 0;
            for (const auto& rec : res.replicates) {
                if (rec.scenario != si || rec.method != method.name) continue;
                ++row.replicates;
                if (!rec.ok) {
                    ++row.failures;
                    continue;
                }
                ++ok;
                row.mean_lrt += rec.lrt;
                row.mean_mse += rec.sq_error;
                row.mean_recall += rec.recall;
                row.mean_precision += rec.precision;
            }
            if (ok > 0) {
                const auto d = static_cast<double>(ok);
                row.mean_lrt /= d;
                row.mean_mse /= d;
                row.mean_recall /= d;
                row.mean_precision /= d;
            }
            res.rows.push_back(std::move(row));
        }
    res.max_rows = max_over_k(res.rows);
    return res;
}

std::vector<MaxRow> max_over_k(const std::vector<AggregateRow>& rows) {
    using Key = std::tuple<int, std::size_t, std::size_t, double, double, std::string>;
    std::vector<Key> order;
    std::map<Key, MaxRow> groups;
    for (const auto& r : rows) {
        if (r.failures == r.replicates) continue;
        Key key{static_cast<int>(r.spec.kind), r.spec.p, r.spec.n, r.spec.eps_cell, r.spec.eps_case, r.method};
        auto it = groups.find(key);
        if (it == groups.end()) {
            order.push_back(key);
            MaxRow m{r.spec, r.method, r.mean_lrt, r.spec.k, r.mean_mse, r.spec.k};
            groups.emplace(key, m);
            continue;
        }
        auto& m = it->second;
        if (r.mean_lrt > m.max_lrt) {
            m.max_lrt = r.mean_lrt;
            m.k_at_max_lrt = r.spec.k;
            m.spec.k = r.spec.k;
        }
        if (r.mean_mse > m.max_mse) {
            m.max_mse = r.mean_mse;
            m.k_at_max_mse = r.spec.k;
        }
    }
    std::vector<MaxRow> out;
    for (const auto& k : order) out.push_back(groups.at(k));
    return out;
}

std::vector<std::string> preset_names() { return {"clean-desk", "table1-desk", "table2-desk"}; }

std::vector<Scenario> preset_grid(std::string_view name) {
    auto base = [](ScenarioKind kind, double k, std::size_t reps) {
        Scenario s;
        s.kind = kind;
        s.p = 10;
        s.n = 100;
        s.k = k;
        s.replicates = reps;
        s.seed = 20190501;
        if (kind == ScenarioKind::CellWise) s.eps_cell = 0.1;
        if (kind == ScenarioKind::CaseWise) s.eps_case = 0.1;
        return s;
    };
    std::vector<Scenario> grid;
    if (name == "clean-desk") {
        grid.push_back(base(ScenarioKind::Clean, 0.0, 200));
    } else if (name == "table1-desk") {
        grid.push_back(base(ScenarioKind::Clean, 0.0, 50));
        for (double k : {2.0, 4.0, 6.0, 8.0, 10.0}) grid.push_back(base(ScenarioKind::CellWise, k, 50));
    } else if (name == "table2-desk") {
        for (double k : {2.0, 4.0, 10.0, 20.0, 50.0, 100.0}) grid.push_back(base(ScenarioKind::CaseWise, k, 50));
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    return grid;
}

} // namespace depthfilter
