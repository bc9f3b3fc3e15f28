#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "depthfilter/filter.hpp"
#include "depthfilter/reference.hpp"

namespace depthfilter {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitOther = 1, kExitParse = 2, kExitConfig = 3, kExitNumeric = 4 };

struct FilterCommand {
    std::string input;
    std::string output = "filtered.csv";
    std::string report = "report.json";
    std::string na_token = "NA";
    FilterConfig cfg;
    std::vector<std::size_t> sequence; ///< non-empty: run sequence_filter with these dimensions
};

struct EstimateCommand {
    std::string input;
    std::string output = "estimates.json";
    std::string na_token = "NA";
    FilterConfig cfg;
    bool no_filter = false;
};

struct SimulateCommand {
    std::string scenario; ///< scenario.json path; empty when a preset is used
    std::string preset;
    std::string results = "results.csv";
    std::string summary = "summary.json";
    FilterConfig cfg;
    std::vector<std::string> methods; ///< empty: all standard methods
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
};

struct DepthCommand {
    std::string input;
    std::string output = "depths.csv";
    std::string summary = "depth_summary.json"; ///< manifest plus screening counts
    std::string na_token = "NA";
    ReferenceFamily ref = ReferenceFamily::Gaussian;
    std::string estimates;  ///< estimates.json supplying location/scatter for elliptical references
    std::string sn_params;  ///< JSON with xi, omega, alpha
    std::string ref_sample; ///< CSV sample for the empirical reference
    std::string sha256;     ///< when set, verify the input and drop a leading date column
    std::size_t directions = 5000;
    std::size_t reference_size = 100000;
    std::uint64_t seed = 0;
    double screen_q = 0.9999;
    double mad_k = 3.0;
    std::size_t threads = 1;
};

void cmd_filter(const FilterCommand& c);
void cmd_estimate(const EstimateCommand& c);
void cmd_simulate(const SimulateCommand& c);
void cmd_depth(const DepthCommand& c);

/// Preset names accepted by cmd_simulate.
std::vector<std::string> simulate_presets();

} // namespace depthfilter
