#include "depthfilter/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "depthfilter/errors.hpp"

namespace depthfilter {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

} // namespace

DataMatrix parse_csv(std::string_view text, std::string_view na_token) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        if (!trim(line).empty()) lines.push_back(line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (lines.empty()) throw ParseError("csv: missing header row");

    std::vector<std::string> names;
    for (auto f : split(lines.front())) names.emplace_back(unquote(f));
    const std::size_t p = names.size();
    const std::size_t n = lines.size() - 1;
    if (n == 0) throw ParseError("csv: empty data section");

    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::vector<std::uint8_t> mask(n * p, 1);
    for (std::size_t i = 0; i < n; ++i) {
        auto fields = split(lines[i + 1]);
        if (fields.size() != p)
            throw ParseError("csv: row " + std::to_string(i + 1) + " has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(p));
        for (std::size_t j = 0; j < p; ++j) {
            auto cell = unquote(fields[j]);
            if (cell.empty() || cell == na_token) {
                mask[i * p + j] = 0;
                values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
                continue;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = first + cell.size();
            if (*first == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last)
                throw ParseError("csv: malformed number '" + std::string(cell) + "' at row " +
                                 std::to_string(i + 1) + ", column " + std::to_string(j + 1));
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return DataMatrix(std::move(values), std::move(mask), std::move(names));
}

DataMatrix load_csv(const std::filesystem::path& path, std::string_view na_token) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), na_token);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const DataMatrix& m, std::ostream& out, std::string_view na_token) {
    const auto& names = m.names();
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            if (m.observed(i, j))
                out << format_double(m(i, j));
            else
                out << na_token;
        }
        out << '\n';
    }
}

void write_csv(const DataMatrix& m, const std::filesystem::path& path, std::string_view na_token) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_csv(m, out, na_token);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace depthfilter
