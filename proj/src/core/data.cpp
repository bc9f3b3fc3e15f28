#include "depthfilter/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "depthfilter/errors.hpp"

namespace depthfilter {

namespace {

std::vector<std::string> default_names(std::size_t p) {
    std::vector<std::string> names;
    names.reserve(p);
    for (std::size_t j = 0; j < p; ++j) names.push_back("V" + std::to_string(j + 1));
    return names;
}

} // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd values, std::vector<std::string> names)
    : DataMatrix(values, std::vector<std::uint8_t>(static_cast<std::size_t>(values.size()), 1),
                 std::move(names)) {}

DataMatrix::DataMatrix(Eigen::MatrixXd values, std::vector<std::uint8_t> mask,
                       std::vector<std::string> names)
    : values_(std::move(values)), mask_(std::move(mask)), names_(std::move(names)) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw ParseError("data matrix needs at least one row and one column");
    if (mask_.size() != static_cast<std::size_t>(values_.size()))
        throw std::invalid_argument("mask shape does not match values");
    if (names_.empty()) names_ = default_names(cols());
    if (names_.size() != cols()) throw std::invalid_argument("column name count does not match");
    for (std::size_t i = 0; i < rows(); ++i)
        for (std::size_t j = 0; j < cols(); ++j) {
            auto& cell = mask_[i * cols() + j];
            cell = cell ? 1 : 0;
            if (!cell) values_(i, j) = std::numeric_limits<double>::quiet_NaN();
        }
}

DataMatrix DataMatrix::with_mask(const std::vector<std::uint8_t>& keep) const {
    if (keep.size() != mask_.size()) throw std::invalid_argument("mask shape does not match");
    std::vector<std::uint8_t> m(mask_.size());
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = (mask_[c] && keep[c]) ? 1 : 0;
    return DataMatrix(values_, std::move(m), names_);
}

std::size_t DataMatrix::observed_count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

bool operator==(const DataMatrix& a, const DataMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (a.mask_ != b.mask_ || a.names_ != b.names_) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a.observed(i, j) && a(i, j) != b(i, j)) return false;
    return true;
}

CellFlags::CellFlags(const DataMatrix& m)
    : n_(m.rows()), p_(m.cols()), state_(n_ * p_, CellState::Clean), observed_(n_ * p_) {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < p_; ++j) observed_[i * p_ + j] = m.observed(i, j) ? 1 : 0;
}

void CellFlags::flag_cell(std::size_t i, std::size_t j) {
    if (usable(i, j)) state_[i * p_ + j] = CellState::CellFlagged;
}

void CellFlags::flag_row(std::size_t i) {
    for (std::size_t j = 0; j < p_; ++j) state_[i * p_ + j] = CellState::CaseFlagged;
}

std::size_t CellFlags::usable_in_row_except(std::size_t i, std::size_t j) const {
    std::size_t count = 0;
    for (std::size_t k = 0; k < p_; ++k)
        if (k != j && usable(i, k)) ++count;
    return count;
}

std::size_t CellFlags::cell_flag_count() const {
    return static_cast<std::size_t>(std::count(state_.begin(), state_.end(), CellState::CellFlagged));
}

std::size_t CellFlags::case_flag_count() const {
    std::size_t rows = 0;
    for (std::size_t i = 0; i < n_; ++i)
        if (p_ > 0 && state_[i * p_] == CellState::CaseFlagged) ++rows;
    return rows;
}

std::size_t CellFlags::filtered_cell_count() const {
    return static_cast<std::size_t>(
        std::count_if(state_.begin(), state_.end(), [](CellState s) { return s != CellState::Clean; }));
}

std::vector<std::uint8_t> CellFlags::usable_mask() const {
    std::vector<std::uint8_t> keep(n_ * p_);
    for (std::size_t c = 0; c < keep.size(); ++c)
        keep[c] = (observed_[c] && state_[c] == CellState::Clean) ? 1 : 0;
    return keep;
}

void PairFlagSet::insert(std::size_t row, std::size_t j, std::size_t k) {
    if (row >= n_ || j >= k || k >= p_) throw std::out_of_range("pair flag index out of range");
    triples_.insert(PairFlag{row, j, k});
}

bool PairFlagSet::contains(std::size_t row, std::size_t j, std::size_t k) const {
    if (j > k) std::swap(j, k);
    return triples_.count(PairFlag{row, j, k}) != 0;
}

std::size_t PairFlagSet::count_for_cell(std::size_t row, std::size_t col) const {
    std::size_t count = 0;
    for (auto it = triples_.lower_bound(PairFlag{row, 0, 0});
         it != triples_.end() && it->row == row; ++it)
        if (it->j == col || it->k == col) ++count;
    return count;
}

std::vector<IndexedPoint2> complete_pairs(const DataMatrix& m, std::size_t j, std::size_t k) {
    if (j == k) throw std::invalid_argument("complete_pairs needs two distinct columns");
    std::vector<IndexedPoint2> out;
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (m.observed(i, j) && m.observed(i, k)) out.push_back({i, Eigen::Vector2d(m(i, j), m(i, k))});
    return out;
}

std::vector<std::size_t> complete_rows(const DataMatrix& m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        bool all = true;
        for (std::size_t j = 0; j < m.cols() && all; ++j) all = m.observed(i, j);
        if (all) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> usable_rows(const CellFlags& flags, const std::vector<std::size_t>& cols) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < flags.rows(); ++i) {
        bool all = true;
        for (std::size_t j : cols)
            if (!flags.usable(i, j)) {
                all = false;
                break;
            }
        if (all) out.push_back(i);
    }
    return out;
}

Eigen::MatrixXd gather(const DataMatrix& m, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
    return out;
}

} // namespace depthfilter
