#include "depthfilter/filter.hpp"

#include <algorithm>
#include <cmath>

#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"

namespace depthfilter {

namespace {

enum StageId : std::uint64_t { kUnivariate = 1, kBivariate = 2, kPvariate = 3 };

FilterOutcome run_method(const Points& sample, const LocationScatter& ls, const FilterConfig& cfg,
                         std::uint64_t depth_seed) {
    if (cfg.method == FilterMethod::GY) return gy_filter(sample, ls, cfg.alpha);
    const auto ref = ReferenceDistribution::elliptical(cfg.ref_family, ls);
    const auto spec = prepare_region(ref, cfg.beta);
    return hs_filter(sample, ref, spec, {cfg.n_directions, depth_seed});
}

FilterOutcome skipped(std::string stage, std::vector<std::size_t> cols, std::size_t n, std::string note) {
    FilterOutcome out;
    out.stage = std::move(stage);
    out.columns = std::move(cols);
    out.n = n;
    out.skipped = true;
    out.note = std::move(note);
    return out;
}

// Second-step estimator on the tuple columns, filtered cells as NA.
Eigen::MatrixXd second_step_scatter(const DataMatrix& m, const CellFlags& flags, const std::vector<std::size_t>& cols,
                                    const FilterConfig& cfg) {
    const auto n = m.rows();
    const auto q = cols.size();
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
    std::vector<std::uint8_t> mask(n * q);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < q; ++a) {
            const bool ok = flags.usable(i, cols[a]);
            mask[i * q + a] = ok ? 1 : 0;
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = ok ? m(i, cols[a]) : 0.0;
        }
    const DataMatrix sub(std::move(values), std::move(mask));
    return find_estimator(cfg.estimator)(sub, cfg.em_options()).scatter;
}

} // namespace

FilterOutcome tuple_filter(const DataMatrix& m, const CellFlags& flags, const std::vector<std::size_t>& cols,
                           const FilterConfig& cfg, std::uint64_t task_seed, std::size_t min_rows) {
    const std::string stage = "tuple";
    const auto rows = usable_rows(flags, cols);
    if (rows.size() < min_rows)
        return skipped(stage, cols, rows.size(),
                       "only " + std::to_string(rows.size()) + " usable rows, need " + std::to_string(min_rows));

    const Points sample = gather(m, rows, cols);
    const auto [deepest, location] = max_depth_observation(sample, {cfg.n_directions, derive_seed(task_seed, {1})});

    FilterOutcome out;
    try {
        const Eigen::MatrixXd scatter =
            cfg.init_scatter == "ogk" ? ogk_scatter(sample, cfg.mad_scale).scatter : second_step_scatter(m, flags, cols, cfg);
        out = run_method(sample, LocationScatter(location, scatter), cfg, derive_seed(task_seed, {2}));
    } catch (const NumericError& e) {
        return skipped(stage, cols, rows.size(), e.what());
    }
    out.stage = stage;
    out.columns = cols;
    for (auto& idx : out.flagged) idx = rows[idx];
    return out;
}

std::pair<CellFlags, std::vector<FilterOutcome>> univariate_stage(const DataMatrix& m, const FilterConfig& cfg,
                                                                  const CellFlags& flags) {
    cfg.validate();
    const auto p = m.cols();
    std::vector<FilterOutcome> outcomes(p);
    parallel_for(p, cfg.threads, [&](std::size_t j) {
        const auto rows = usable_rows(flags, {j});
        if (rows.empty()) {
            outcomes[j] = skipped("univariate", {j}, 0, "no usable cells");
            return;
        }
        std::vector<double> xs(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) xs[r] = m(rows[r], j);
        const double s = mad(xs, cfg.mad_scale);
        if (!(s > 0.0)) {
            outcomes[j] = skipped("univariate", {j}, rows.size(), "zero MAD");
            return;
        }
        const LocationScatter ls(Eigen::VectorXd::Constant(1, median(xs)), Eigen::MatrixXd::Constant(1, 1, s * s));
        const Points sample = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        auto out = run_method(sample, ls, cfg, derive_seed(cfg.seed, {kUnivariate, j}));
        out.stage = "univariate";
        out.columns = {j};
        for (auto& idx : out.flagged) idx = rows[idx];
        outcomes[j] = std::move(out);
    });

    CellFlags next = flags;
    for (const auto& o : outcomes)
        for (auto i : o.flagged) next.flag_cell(i, o.columns[0]);
    return {std::move(next), std::move(outcomes)};
}

std::pair<PairFlagSet, std::vector<FilterOutcome>> bivariate_stage(const DataMatrix& m, const FilterConfig& cfg,
                                                                   const CellFlags& flags) {
    cfg.validate();
    const auto p = m.cols();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = j + 1; k < p; ++k) pairs.emplace_back(j, k);

    const std::size_t min_rows = std::max<std::size_t>(cfg.min_pair_rows, 3);
    std::vector<FilterOutcome> outcomes(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t t) {
        const auto [j, k] = pairs[t];
        outcomes[t] = tuple_filter(m, flags, {j, k}, cfg, derive_seed(cfg.seed, {kBivariate, j, k}), min_rows);
        outcomes[t].stage = "bivariate";
    });

    PairFlagSet set(m.rows(), p);
    for (const auto& o : outcomes)
        for (auto i : o.flagged) set.insert(i, o.columns[0], o.columns[1]);
    return {std::move(set), std::move(outcomes)};
}

CellFlags cell_flag_stage(const PairFlagSet& pairs, const CellFlags& flags, double delta, double q,
                          std::vector<CellCount>* counts) {
    const auto n = flags.rows();
    const auto p = flags.cols();
    std::vector<std::size_t> m_ij(n * p, 0);
    for (const auto& t : pairs.triples()) {
        ++m_ij[t.row * p + t.j];
        ++m_ij[t.row * p + t.k];
    }
    CellFlags next = flags;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            const auto mc = m_ij[i * p + j];
            if (mc == 0 || !flags.usable(i, j)) continue;
            const auto c = binomial_quantile(flags.usable_in_row_except(i, j), delta, q);
            const bool flag = mc > c;
            if (flag) next.flag_cell(i, j);
            if (counts) counts->push_back({i, j, mc, c, flag});
        }
    return next;
}

std::pair<CellFlags, FilterOutcome> pvariate_stage(const DataMatrix& m, const FilterConfig& cfg,
                                                   const CellFlags& flags) {
    cfg.validate();
    const auto p = m.cols();
    std::vector<std::size_t> cols(p);
    for (std::size_t j = 0; j < p; ++j) cols[j] = j;
    auto out = tuple_filter(m, flags, cols, cfg, derive_seed(cfg.seed, {kPvariate}), p + 1);
    out.stage = "pvariate";
    CellFlags next = flags;
    for (auto i : out.flagged) next.flag_row(i);
    return {std::move(next), std::move(out)};
}

namespace {

void finish(PipelineReport& rep) {
    rep.cellwise_flags = rep.flags.cell_flag_count();
    rep.casewise_rows = rep.flags.case_flag_count();
    auto note = [&](const FilterOutcome& o) {
        if (!o.skipped) return;
        std::string cols;
        for (auto c : o.columns) cols += (cols.empty() ? "" : ",") + std::to_string(c);
        rep.warnings.push_back(o.stage + " [" + cols + "] skipped: " + o.note);
    };
    for (const auto& o : rep.univariate) note(o);
    for (const auto& o : rep.bivariate) note(o);
    for (const auto& o : rep.tuples) note(o);
    if (rep.pvariate) note(*rep.pvariate);
}

} // namespace

PipelineReport run_pipeline(const DataMatrix& m, const FilterConfig& cfg) {
    cfg.validate();
    PipelineReport rep{cfg, {}, {}, std::nullopt, {}, CellFlags(m), PairFlagSet(m.rows(), m.cols()), {}, 0, 0, {}};
    if (cfg.stages.univariate) std::tie(rep.flags, rep.univariate) = univariate_stage(m, cfg, rep.flags);
    if (cfg.stages.bivariate && m.cols() >= 2) {
        std::tie(rep.pairs, rep.bivariate) = bivariate_stage(m, cfg, rep.flags);
        rep.flags = cell_flag_stage(rep.pairs, rep.flags, cfg.delta, cfg.binom_q, &rep.cell_counts);
    }
    if (cfg.stages.pvariate) {
        auto [flags, outcome] = pvariate_stage(m, cfg, rep.flags);
        rep.flags = std::move(flags);
        rep.pvariate = std::move(outcome);
    }
    finish(rep);
    return rep;
}

PipelineReport sequence_filter(const DataMatrix& m, const std::vector<std::size_t>& dims, const FilterConfig& cfg) {
    cfg.validate();
    const auto p = m.cols();
    if (dims.empty()) throw ConfigError("sequence_filter: empty dimension list");
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] < 1 || dims[i] > p) throw ConfigError("sequence_filter: dimensions must lie in [1, p]");
        if (i > 0 && dims[i] <= dims[i - 1]) throw ConfigError("sequence_filter: dimensions must be increasing");
    }
    for (auto d : dims) {
        // C(p, d) computed incrementally; exact while it stays below the cap.
        double count = 1.0;
        for (std::size_t i = 0; i < d; ++i) count = count * static_cast<double>(p - i) / static_cast<double>(i + 1);
        if (std::round(count) > static_cast<double>(cfg.tuple_cap))
            throw ConfigError("sequence_filter: C(" + std::to_string(p) + ", " + std::to_string(d) +
                              ") tuples exceed the cap of " + std::to_string(cfg.tuple_cap));
    }

    PipelineReport rep{cfg, {}, {}, std::nullopt, {}, CellFlags(m), PairFlagSet(m.rows(), p), {}, 0, 0, {}};
    for (auto d : dims) {
        if (d == 1) {
            std::tie(rep.flags, rep.univariate) = univariate_stage(m, cfg, rep.flags);
            continue;
        }
        if (d == p) {
            auto [flags, outcome] = pvariate_stage(m, cfg, rep.flags);
            rep.flags = std::move(flags);
            rep.pvariate = std::move(outcome);
            continue;
        }
        std::vector<std::vector<std::size_t>> tuples;
        std::vector<std::size_t> cur(d);
        for (std::size_t i = 0; i < d; ++i) cur[i] = i;
        while (true) {
            tuples.push_back(cur);
            std::size_t i = d;
            while (i > 0 && cur[i - 1] == p - d + (i - 1)) --i;
            if (i == 0) break;
            ++cur[i - 1];
            for (std::size_t k = i; k < d; ++k) cur[k] = cur[k - 1] + 1;
        }
        const std::size_t min_rows = std::max(cfg.min_pair_rows, d + 1);
        const CellFlags snapshot = rep.flags;
        std::vector<FilterOutcome> outcomes(tuples.size());
        parallel_for(tuples.size(), cfg.threads, [&](std::size_t t) {
            const auto& cols = tuples[t];
            std::uint64_t seed = derive_seed(cfg.seed, {10 + d});
            for (auto c : cols) seed = derive_seed(seed, {c});
            outcomes[t] = tuple_filter(m, snapshot, cols, cfg, seed, min_rows);
            if (d == 2) outcomes[t].stage = "bivariate";
        });
        for (auto& o : outcomes) {
            for (auto i : o.flagged) {
                for (auto c : o.columns) rep.flags.flag_cell(i, c);
                if (d == 2) rep.pairs.insert(i, o.columns[0], o.columns[1]);
            }
            (d == 2 ? rep.bivariate : rep.tuples).push_back(std::move(o));
        }
    }
    finish(rep);
    return rep;
}

std::pair<PipelineReport, EstimatorResult> two_step(const DataMatrix& m, const FilterConfig& cfg) {
    auto rep = run_pipeline(m, cfg);
    const auto filtered = m.with_mask(rep.flags.usable_mask());
    auto est = find_estimator(cfg.estimator)(filtered, cfg.em_options());
    return {std::move(rep), std::move(est)};
}

} // namespace depthfilter
