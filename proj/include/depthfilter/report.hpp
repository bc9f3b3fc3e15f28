#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "depthfilter/estimation.hpp"
#include "depthfilter/filter.hpp"
#include "depthfilter/simulation.hpp"

namespace depthfilter {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Resolved filter settings. The thread count is deliberately absent: it never changes results.
Json to_json(const FilterConfig& cfg);
/// Applies the recognised keys of `j` on top of `cfg`.
FilterConfig filter_config_from_json(const Json& j, FilterConfig cfg = {});

Json to_json(const FilterOutcome& o, const std::vector<std::string>& names);
Json to_json(const PipelineReport& rep, const std::vector<std::string>& names);
Json to_json(const EstimatorResult& est, const std::vector<std::string>& names);
Json to_json(const Scenario& s);

/**
 * Run manifest: command, resolved configuration, seed, tool version and the
 * SHA-256 of every input file. The timestamp is taken from SOURCE_DATE_EPOCH
 * when set and is null otherwise, so reruns are byte-identical.
 */
Json make_manifest(const std::string& command, const Json& config, std::uint64_t seed,
                   const std::vector<std::filesystem::path>& inputs);

/// Pretty-printed with a trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

} // namespace depthfilter
