#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "depthfilter/cli.hpp"
#include "depthfilter/errors.hpp"

using namespace depthfilter;

namespace {

struct FilterFlags {
    std::string method = "hs";
    std::string stages = "u,b,p";
    std::string ref = "gaussian";
    FilterConfig cfg;

    void add(CLI::App* app, bool run_flags = true) {
        app->add_option("--method", method, "hs or gy")->capture_default_str();
        app->add_option("--stages", stages, "comma-separated subset of u,b,p")->capture_default_str();
        app->add_option("--beta", cfg.beta, "probability content of the central region")->capture_default_str();
        app->add_option("--alpha", cfg.alpha, "GY cutoff quantile")->capture_default_str();
        app->add_option("--delta", cfg.delta, "binomial success probability")->capture_default_str();
        app->add_option("--binom-q", cfg.binom_q, "binomial quantile order")->capture_default_str();
        app->add_option("--directions", cfg.n_directions, "random Tukey directions")->capture_default_str();
        app->add_option("--ref", ref, "gaussian or t5")->capture_default_str();
        if (run_flags) {
            app->add_option("--seed", cfg.seed)->capture_default_str();
            app->add_option("--threads", cfg.threads)->capture_default_str();
        }
        app->add_option("--estimator", cfg.estimator, "second-step estimator")->capture_default_str();
        app->add_option("--init-scatter", cfg.init_scatter, "initial scatter for d > 1: ogk or second-step")
            ->capture_default_str();
        app->add_option("--em-tol", cfg.em_tol)->capture_default_str();
        app->add_option("--em-max-iter", cfg.em_max_iter)->capture_default_str();
        app->add_option("--min-pair-rows", cfg.min_pair_rows)->capture_default_str();
    }

    FilterConfig resolve() const {
        FilterConfig out = cfg;
        out.method = parse_filter_method(method);
        out.stages = parse_stages(stages);
        out.ref_family = parse_reference_family(ref);
        return out;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Depth-based filters for cell-wise and case-wise outliers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(DEPTHFILTER_VERSION));

    std::string na_token = "NA";

    FilterCommand filter;
    FilterFlags filter_flags;
    auto* f = app.add_subcommand("filter", "flag outlying cells and rows, write the filtered CSV and a report");
    f->add_option("input", filter.input, "input CSV")->required()->check(CLI::ExistingFile);
    f->add_option("-o,--output", filter.output)->capture_default_str();
    f->add_option("--report", filter.report)->capture_default_str();
    f->add_option("--sequence", filter.sequence, "filter dimensions d1 < ... < dk instead of the u,b,p pipeline");
    f->add_option("--na-token", na_token)->capture_default_str();
    filter_flags.add(f);

    EstimateCommand estimate;
    FilterFlags estimate_flags;
    auto* e = app.add_subcommand("estimate", "filter, then estimate location and scatter");
    e->add_option("input", estimate.input, "input CSV")->required()->check(CLI::ExistingFile);
    e->add_option("-o,--output", estimate.output)->capture_default_str();
    e->add_flag("--no-filter", estimate.no_filter, "skip filtering and run the estimator on the raw data");
    e->add_option("--na-token", na_token)->capture_default_str();
    estimate_flags.add(e);

    SimulateCommand simulate;
    FilterFlags simulate_flags;
    std::size_t sim_replicates = 0;
    std::uint64_t sim_seed = 0;
    auto* s = app.add_subcommand("simulate", "run a contamination experiment grid or the skew-normal injection study");
    s->add_option("scenario", simulate.scenario, "scenario JSON")->check(CLI::ExistingFile);
    s->add_option("--preset", simulate.preset, "built-in experiment")->check(CLI::IsMember(simulate_presets()));
    s->add_option("--results", simulate.results)->capture_default_str();
    s->add_option("--summary", simulate.summary)->capture_default_str();
    s->add_option("--methods", simulate.methods, "subset of MLE, GY-UF, GY-UBF, HS-UF, HS-UBF, HS-UBPF");
    auto* reps_opt = s->add_option("--replicates", sim_replicates, "override the replicate count");
    auto* seed_opt = s->add_option("--seed", sim_seed, "override the scenario seed");
    s->add_option("--threads", simulate.threads)->capture_default_str();
    simulate_flags.add(s, false);

    DepthCommand depth;
    std::string depth_ref = "gaussian";
    auto* d = app.add_subcommand("depth", "per-row sample and reference depths with Mahalanobis screening");
    d->add_option("input", depth.input, "input CSV")->required()->check(CLI::ExistingFile);
    d->add_option("-o,--output", depth.output)->capture_default_str();
    d->add_option("--summary", depth.summary)->capture_default_str();
    d->add_option("--ref", depth_ref, "gaussian, t5, skewnormal or empirical")->capture_default_str();
    d->add_option("--estimates", depth.estimates, "estimates JSON for elliptical references")
        ->check(CLI::ExistingFile);
    d->add_option("--sha256", depth.sha256, "expected input checksum; also drops a leading date column");
    d->add_option("--sn-params", depth.sn_params, "JSON with xi, omega, alpha")->check(CLI::ExistingFile);
    d->add_option("--ref-sample", depth.ref_sample, "CSV sample for the empirical reference")
        ->check(CLI::ExistingFile);
    d->add_option("--directions", depth.directions)->capture_default_str();
    d->add_option("--reference-size", depth.reference_size)->capture_default_str();
    d->add_option("--seed", depth.seed)->capture_default_str();
    d->add_option("--screen-q", depth.screen_q, "chi-squared quantile for the distance screen")->capture_default_str();
    d->add_option("--mad-k", depth.mad_k, "MAD multiple for the univariate screen")->capture_default_str();
    d->add_option("--threads", depth.threads)->capture_default_str();
    d->add_option("--na-token", na_token)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        if (f->parsed()) {
            filter.cfg = filter_flags.resolve();
            filter.na_token = na_token;
            cmd_filter(filter);
        } else if (e->parsed()) {
            estimate.cfg = estimate_flags.resolve();
            estimate.na_token = na_token;
            cmd_estimate(estimate);
        } else if (s->parsed()) {
            simulate.cfg = simulate_flags.resolve();
            if (reps_opt->count() > 0) simulate.replicates = sim_replicates;
            if (seed_opt->count() > 0) simulate.seed = sim_seed;
            cmd_simulate(simulate);
        } else if (d->parsed()) {
            depth.ref = parse_reference_family(depth_ref);
            depth.na_token = na_token;
            cmd_depth(depth);
        }
    } catch (const ParseError& err) {
        std::cerr << "parse error: " << err.what() << '\n';
        return kExitParse;
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& err) {
        std::cerr << "numeric error: " << err.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitOther;
    }
    return kExitOk;
}
