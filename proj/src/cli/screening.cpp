#include "depthfilter/screening.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "depthfilter/csv.hpp"
#include "depthfilter/distributions.hpp"
#include "depthfilter/errors.hpp"
#include "depthfilter/estimation.hpp"

namespace depthfilter {

MadScreen mad_screen(const DataMatrix& m, double k, double scale) {
    const auto n = m.rows();
    const auto p = m.cols();
    MadScreen out;
    out.marked.assign(n * p, 0);
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> xs;
        for (std::size_t i = 0; i < n; ++i)
            if (m.observed(i, j)) xs.push_back(m(i, j));
        out.observed_cells += xs.size();
        if (xs.empty()) continue;
        const double med = median(xs);
        const double s = mad(xs, scale);
        for (std::size_t i = 0; i < n; ++i) {
            if (!m.observed(i, j)) continue;
            if (std::abs(m(i, j) - med) > k * s) {
                out.marked[i * p + j] = 1;
                ++out.marked_cells;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (out.marked[i * p + j]) {
                out.marked_rows.push_back(i);
                break;
            }
    out.cell_percent = 100.0 * static_cast<double>(out.marked_cells) / static_cast<double>(n * p);
    out.row_percent = 100.0 * static_cast<double>(out.marked_rows.size()) / static_cast<double>(n);
    return out;
}

MdScreen md_screen(const DataMatrix& m, const LocationScatter& ls, double q) {
    const auto p = m.cols();
    if (static_cast<std::size_t>(ls.dim()) != p) throw ConfigError("md screen: dimension mismatch");
    MdScreen out;
    out.cutoff = chi2_quantile(static_cast<double>(p), q);
    out.distances.assign(m.rows(), std::numeric_limits<double>::quiet_NaN());
    Eigen::VectorXd x(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        bool complete = true;
        for (std::size_t j = 0; j < p && complete; ++j) {
            complete = m.observed(i, j);
            if (complete) x(static_cast<Eigen::Index>(j)) = m(i, j);
        }
        if (!complete) continue;
        out.distances[i] = ls.mahalanobis_sq(x);
        if (out.distances[i] > out.cutoff) out.exceeding.push_back(i);
    }
    return out;
}

std::size_t identified(const MdScreen& screen, const std::vector<std::size_t>& rows) {
    std::size_t count = 0;
    for (auto r : rows)
        if (std::binary_search(screen.exceeding.begin(), screen.exceeding.end(), r)) ++count;
    return count;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

DataMatrix load_smallcap(const std::string& path, const std::string& expected_sha256) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto digest = sha256_hex(text);
    if (digest != expected_sha256)
        throw ParseError("checksum mismatch for '" + path + "': expected " + expected_sha256 + ", got " + digest);

    // Drop a leading date column: detected by a non-numeric first cell on the first data line.
    std::istringstream lines(text);
    std::string header;
    std::string first;
    std::getline(lines, header);
    std::getline(lines, first);
    const auto comma = first.find(',');
    double probe = 0.0;
    const auto cell = first.substr(0, comma);
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), probe);
    const bool numeric = (ec == std::errc{} && end == cell.data() + cell.size()) || cell == "NA";
    if (numeric) return parse_csv(text);

    std::string stripped;
    std::istringstream again(text);
    for (std::string line; std::getline(again, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c = line.find(',');
        stripped += (c == std::string::npos ? std::string() : line.substr(c + 1)) + '\n';
    }
    return parse_csv(stripped);
}

} // namespace depthfilter
