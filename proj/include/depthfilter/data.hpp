#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace depthfilter {

/**
 * @brief Partially observed n x p numeric matrix.
 *
 * `mask(i, j)` is true when cell (i, j) is observed. Values of unobserved
 * cells are stored as NaN and are never read by any computation in this
 * library. Instances are immutable once constructed.
 */
class DataMatrix {
public:
    DataMatrix(Eigen::MatrixXd values, std::vector<std::string> names = {});
    DataMatrix(Eigen::MatrixXd values, std::vector<std::uint8_t> mask,
               std::vector<std::string> names = {});

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }

    bool observed(std::size_t i, std::size_t j) const { return mask_[i * cols() + j] != 0; }
    /// Only valid for observed cells.
    double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }

    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& names() const { return names_; }

    /// Copy with the given cells masked out (mask(i,j) && keep(i,j)).
    DataMatrix with_mask(const std::vector<std::uint8_t>& keep) const;

    std::size_t observed_count() const;

    friend bool operator==(const DataMatrix& a, const DataMatrix& b);

private:
    Eigen::MatrixXd values_;
    std::vector<std::uint8_t> mask_;
    std::vector<std::string> names_;
};

enum class CellState : std::uint8_t { Clean = 0, CellFlagged = 1, CaseFlagged = 2 };

/**
 * Tri-state flag map plus the derived usability matrix U.
 *
 * U(i, j) is 1 when the cell is observed in the data and has not been
 * filtered, 0 otherwise.
 */
class CellFlags {
public:
    explicit CellFlags(const DataMatrix& m);

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return p_; }

    CellState state(std::size_t i, std::size_t j) const { return state_[i * p_ + j]; }
    bool observed(std::size_t i, std::size_t j) const { return observed_[i * p_ + j] != 0; }
    bool usable(std::size_t i, std::size_t j) const {
        return observed(i, j) && state(i, j) == CellState::Clean;
    }

    /// Marks an observed clean cell as cell-wise outlier. No-op on other cells.
    void flag_cell(std::size_t i, std::size_t j);
    /// Marks every cell of row i as case-wise outlier.
    void flag_row(std::size_t i);

    std::size_t usable_in_row_except(std::size_t i, std::size_t j) const;
    std::size_t cell_flag_count() const;
    std::size_t case_flag_count() const; ///< rows
    std::size_t filtered_cell_count() const;

    /// Byte vector suitable for DataMatrix::with_mask: 1 where usable.
    std::vector<std::uint8_t> usable_mask() const;

    friend bool operator==(const CellFlags& a, const CellFlags& b) = default;

private:
    std::size_t n_;
    std::size_t p_;
    std::vector<CellState> state_;
    std::vector<std::uint8_t> observed_;
};

/// One flagged bivariate pair: row i, columns j < k.
struct PairFlag {
    std::size_t row;
    std::size_t j;
    std::size_t k;
    auto operator<=>(const PairFlag&) const = default;
};

/// The set J of flagged (row, j, k) triples.
class PairFlagSet {
public:
    PairFlagSet(std::size_t n, std::size_t p) : n_(n), p_(p) {}

    /// Throws std::out_of_range on bad indices or j >= k.
    void insert(std::size_t row, std::size_t j, std::size_t k);
    bool contains(std::size_t row, std::size_t j, std::size_t k) const;
    std::size_t size() const { return triples_.size(); }
    const std::set<PairFlag>& triples() const { return triples_; }

    /// Number of flagged pairs in which cell (row, col) takes part, either role.
    std::size_t count_for_cell(std::size_t row, std::size_t col) const;

    friend bool operator==(const PairFlagSet& a, const PairFlagSet& b) = default;

private:
    std::size_t n_;
    std::size_t p_;
    std::set<PairFlag> triples_;
};

struct IndexedPoint2 {
    std::size_t row;
    Eigen::Vector2d point;
};

/// Rows where both cells j and k are observed.
std::vector<IndexedPoint2> complete_pairs(const DataMatrix& m, std::size_t j, std::size_t k);
/// Rows where every cell is observed.
std::vector<std::size_t> complete_rows(const DataMatrix& m);

/// Rows whose cells in `cols` are all usable under `flags`.
std::vector<std::size_t> usable_rows(const CellFlags& flags, const std::vector<std::size_t>& cols);
/// Stack the given rows/columns of `m` into an (rows x cols) matrix.
Eigen::MatrixXd gather(const DataMatrix& m, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols);

} // namespace depthfilter
