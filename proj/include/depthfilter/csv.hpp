#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "depthfilter/data.hpp"

namespace depthfilter {

inline constexpr std::string_view kDefaultNaToken = "NA";

/// Parse CSV text with one header row. Cells equal to `na_token` (or empty) are unobserved.
DataMatrix parse_csv(std::string_view text, std::string_view na_token = kDefaultNaToken);
DataMatrix load_csv(const std::filesystem::path& path, std::string_view na_token = kDefaultNaToken);

/// Values are written with 17 significant digits so that load_csv restores them exactly.
void write_csv(const DataMatrix& m, std::ostream& out, std::string_view na_token = kDefaultNaToken);
void write_csv(const DataMatrix& m, const std::filesystem::path& path,
               std::string_view na_token = kDefaultNaToken);

/// Shortest text for a double that parses back to the same bits ("%.17g").
std::string format_double(double v);

} // namespace depthfilter
