#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dcopt {

struct SparseEntry {
  std::uint32_t row;
  double value;
};

// One sparse column: entries sorted by strictly increasing row, no explicit
// zeros stored.
using SparseColumn = std::vector<SparseEntry>;

// Column-major sparse matrix. The column is the unit of partitioning and of
// shipping to workers, so columns are kept as independent vectors rather than
// as one packed CSC block.
class ColumnMatrix {
 public:
  ColumnMatrix() = default;
  ColumnMatrix(std::size_t n_rows, std::vector<SparseColumn> columns);

  static ColumnMatrix identity(std::size_t n);

  std::size_t rows() const { return n_rows_; }
  std::size_t cols() const { return cols_.size(); }
  std::size_t nonzeros() const;

  const SparseColumn& column(std::size_t j) const { return cols_[j]; }

  double column_sqnorm(std::size_t j) const;
  double column_norm(std::size_t j) const;

  // out += scale * column j
  void add_scaled_column(std::size_t j, double scale,
                         std::span<double> out) const;
  // column j . x
  double column_dot(std::size_t j, std::span<const double> x) const;

  // A * alpha, alpha over all columns.
  std::vector<double> matvec(std::span<const double> alpha) const;
  // A^T * y
  std::vector<double> transpose_matvec(std::span<const double> y) const;

  ColumnMatrix transposed() const;
  ColumnMatrix select_columns(std::span<const std::uint32_t> idx) const;

  // Divides every column of norm > 1 by its norm, in place. Returns the
  // factor applied per column (1 for untouched columns).
  std::vector<double> normalize_columns();

  // Throws contract_error if any column breaks the ordering / bounds / no
  // explicit zero invariants.
  void validate() const;

 private:
  std::size_t n_rows_ = 0;
  std::vector<SparseColumn> cols_;
};

// Disjoint cover of the column indices by k blocks.
struct Partition {
  std::uint32_t k_blocks = 0;
  std::vector<std::uint32_t> assignment;            // column -> block
  std::vector<std::vector<std::uint32_t>> blocks;   // block -> sorted columns

  // Shuffled round-robin: sizes differ by at most one, assignment is a
  // deterministic function of (n_cols, k, seed).
  static Partition balanced(std::size_t n_cols, std::uint32_t k,
                            std::uint64_t seed);
  static Partition from_assignment(std::vector<std::uint32_t> assignment,
                                   std::uint32_t k);

  std::size_t block_size(std::uint32_t k) const { return blocks[k].size(); }
  void validate(std::size_t n_cols) const;
};

// A[block] * alpha with alpha given over all columns; entries outside the
// block must be exactly zero (contract_error otherwise).
std::vector<double> block_matvec(const ColumnMatrix& m, const Partition& p,
                                 std::uint32_t block,
                                 std::span<const double> alpha);

}  // namespace dcopt
