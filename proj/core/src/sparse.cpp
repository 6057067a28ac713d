#include "dcopt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dcopt/error.hpp"

namespace dcopt {

ColumnMatrix::ColumnMatrix(std::size_t n_rows, std::vector<SparseColumn> columns)
    : n_rows_(n_rows), cols_(std::move(columns)) {
  validate();
}

void ColumnMatrix::validate() const {
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    const SparseColumn& c = cols_[j];
    for (std::size_t t = 0; t < c.size(); ++t) {
      if (c[t].row >= n_rows_)
        throw contract_error("column " + std::to_string(j) +
                             ": row index out of range");
      if (t > 0 && c[t].row <= c[t - 1].row)
        throw contract_error("column " + std::to_string(j) +
                             ": row indices not strictly increasing");
      if (c[t].value == 0.0)
        throw contract_error("column " + std::to_string(j) +
                             ": explicit zero stored");
    }
  }
}

ColumnMatrix ColumnMatrix::identity(std::size_t n) {
  std::vector<SparseColumn> cols(n);
  for (std::size_t j = 0; j < n; ++j)
    cols[j] = {{static_cast<std::uint32_t>(j), 1.0}};
  return ColumnMatrix(n, std::move(cols));
}

std::size_t ColumnMatrix::nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& c : cols_) nnz += c.size();
  return nnz;
}

double ColumnMatrix::column_sqnorm(std::size_t j) const {
  double s = 0;
  for (const auto& e : cols_[j]) s += e.value * e.value;
  return s;
}

double ColumnMatrix::column_norm(std::size_t j) const {
  return std::sqrt(column_sqnorm(j));
}

void ColumnMatrix::add_scaled_column(std::size_t j, double scale,
                                     std::span<double> out) const {
  for (const auto& e : cols_[j]) out[e.row] += scale * e.value;
}

double ColumnMatrix::column_dot(std::size_t j, std::span<const double> x) const {
  double s = 0;
  for (const auto& e : cols_[j]) s += e.value * x[e.row];
  return s;
}

std::vector<double> ColumnMatrix::matvec(std::span<const double> alpha) const {
  if (alpha.size() != cols())
    throw contract_error("matvec: alpha length mismatch");
  std::vector<double> out(n_rows_, 0.0);
  for (std::size_t j = 0; j < cols_.size(); ++j)
    if (alpha[j] != 0.0) add_scaled_column(j, alpha[j], out);
  return out;
}

std::vector<double> ColumnMatrix::transpose_matvec(
    std::span<const double> y) const {
  if (y.size() != n_rows_)
    throw contract_error("transpose_matvec: y length mismatch");
  std::vector<double> out(cols());
  for (std::size_t j = 0; j < cols_.size(); ++j) out[j] = column_dot(j, y);
  return out;
}

ColumnMatrix ColumnMatrix::transposed() const {
  std::vector<SparseColumn> t(n_rows_);
  // counting pass keeps allocation linear
  std::vector<std::size_t> counts(n_rows_, 0);
  for (const auto& c : cols_)
    for (const auto& e : c) ++counts[e.row];
  for (std::size_t r = 0; r < n_rows_; ++r) t[r].reserve(counts[r]);
  for (std::size_t j = 0; j < cols_.size(); ++j)
    for (const auto& e : cols_[j])
      t[e.row].push_back({static_cast<std::uint32_t>(j), e.value});
  ColumnMatrix out;
  out.n_rows_ = cols_.size();
  out.cols_ = std::move(t);
  return out;
}

ColumnMatrix ColumnMatrix::select_columns(
    std::span<const std::uint32_t> idx) const {
  std::vector<SparseColumn> sel;
  sel.reserve(idx.size());
  for (std::uint32_t j : idx) {
    if (j >= cols())
      throw contract_error("select_columns: index out of range");
    sel.push_back(cols_[j]);
  }
  ColumnMatrix out;
  out.n_rows_ = n_rows_;
  out.cols_ = std::move(sel);
  return out;
}

std::vector<double> ColumnMatrix::normalize_columns() {
  std::vector<double> factors(cols(), 1.0);
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    double norm = column_norm(j);
    if (norm > 1.0) {
      factors[j] = norm;
      for (auto& e : cols_[j]) e.value /= norm;
    }
  }
  return factors;
}

Partition Partition::balanced(std::size_t n_cols, std::uint32_t k,
                              std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("partition: k must be positive");
  if (k > n_cols)
    throw std::invalid_argument("partition: k exceeds column count");
  std::vector<std::uint32_t> order(n_cols);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Partition p;
  p.k_blocks = k;
  p.assignment.assign(n_cols, 0);
  p.blocks.assign(k, {});
  for (std::size_t t = 0; t < n_cols; ++t) {
    std::uint32_t b = static_cast<std::uint32_t>(t % k);
    p.assignment[order[t]] = b;
    p.blocks[b].push_back(order[t]);
  }
  for (auto& blk : p.blocks) std::sort(blk.begin(), blk.end());
  return p;
}

Partition Partition::from_assignment(std::vector<std::uint32_t> assignment,
                                     std::uint32_t k) {
  if (k == 0) throw std::invalid_argument("partition: k must be positive");
  Partition p;
  p.k_blocks = k;
  p.blocks.assign(k, {});
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    if (assignment[j] >= k)
      throw std::invalid_argument("partition: block id out of range");
    p.blocks[assignment[j]].push_back(static_cast<std::uint32_t>(j));
  }
  p.assignment = std::move(assignment);
  return p;
}

void Partition::validate(std::size_t n_cols) const {
  if (assignment.size() != n_cols)
    throw contract_error("partition: assignment length mismatch");
  std::size_t total = 0;
  for (const auto& blk : blocks) total += blk.size();
  if (total != n_cols)
    throw contract_error("partition: blocks do not cover all columns");
  for (std::uint32_t b = 0; b < k_blocks; ++b)
    for (std::uint32_t j : blocks[b])
      if (j >= n_cols || assignment[j] != b)
        throw contract_error("partition: assignment/blocks inconsistent");
}

std::vector<double> block_matvec(const ColumnMatrix& m, const Partition& p,
                                 std::uint32_t block,
                                 std::span<const double> alpha) {
  if (block >= p.k_blocks)
    throw contract_error("block_matvec: block id out of range");
  if (alpha.size() != m.cols())
    throw contract_error("block_matvec: alpha length mismatch");
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j] != 0.0 && p.assignment[j] != block)
      throw contract_error("block_matvec: support outside block " +
                           std::to_string(block));
  std::vector<double> out(m.rows(), 0.0);
  for (std::uint32_t j : p.blocks[block])
    if (alpha[j] != 0.0) m.add_scaled_column(j, alpha[j], out);
  return out;
}

}  // namespace dcopt
