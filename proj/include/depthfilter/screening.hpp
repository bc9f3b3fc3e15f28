#pragma once

#include <string>
#include <vector>

#include "depthfilter/data.hpp"
#include "depthfilter/depth.hpp"

namespace depthfilter {

/// Cells further than `k` scaled MADs from their column median.
struct MadScreen {
    std::vector<std::uint8_t> marked; ///< n x p, row-major
    std::vector<std::size_t> marked_rows;
    std::size_t marked_cells = 0;
    std::size_t observed_cells = 0;
    double cell_percent = 0.0;
    double row_percent = 0.0;
};

MadScreen mad_screen(const DataMatrix& m, double k = 3.0, double scale = 1.4826);

/// Squared Mahalanobis distances of complete rows against a chi-squared cutoff.
struct MdScreen {
    std::vector<double> distances; ///< NaN for rows with unobserved cells
    double cutoff = 0.0;
    std::vector<std::size_t> exceeding;
};

MdScreen md_screen(const DataMatrix& m, const LocationScatter& ls, double q);

/// Number of `rows` that appear in `screen.exceeding`.
std::size_t identified(const MdScreen& screen, const std::vector<std::size_t>& rows);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/**
 * Loads the weekly small-cap returns CSV after verifying its SHA-256
 * against `expected_sha256` (hex). A leading non-numeric column such as a
 * date is dropped. Throws ParseError on checksum mismatch.
 */
DataMatrix load_smallcap(const std::string& path, const std::string& expected_sha256);

} // namespace depthfilter
