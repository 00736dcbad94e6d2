#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "distarray/errors.hpp"

namespace da {

enum class Axis { rows = 0, cols = 1 };
enum class ReduceKind { sum, min, max };
enum class UnaryKind { power, sqrt, scale, add_scalar };
enum class BinaryKind { add, sub, mul };

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// One tile of a distributed array: a dense row-major matrix or a CSR
/// sparse matrix of doubles. Immutable in normal use; dense_at() exists for
/// in-place construction before a block is handed to the runtime.
class Block {
public:
  Block() = default; // 0 x 0 dense

  static Block dense(std::size_t rows, std::size_t cols);
  static Block dense(std::size_t rows, std::size_t cols,
                     std::vector<double> values);
  static Block from_rows(const std::vector<std::vector<double>>& rows);
  static Block identity(std::size_t n);

  /// CSR storage: offsets has rows + 1 entries, column indices are strictly
  /// increasing within each row. Violations throw std::invalid_argument.
  static Block sparse(std::size_t rows, std::size_t cols,
                      std::vector<std::size_t> offsets,
                      std::vector<std::size_t> columns,
                      std::vector<double> values);

  /// Duplicate coordinates keep the last occurrence.
  static Block sparse_from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_sparse() const noexcept { return sparse_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  /// Stored entries: rows*cols for dense, explicit entries for sparse.
  std::size_t stored() const noexcept;

  double at(std::size_t i, std::size_t j) const;

  std::span<const double> dense_data() const;
  double& dense_at(std::size_t i, std::size_t j);

  std::span<const std::size_t> offsets() const;
  std::span<const std::size_t> columns() const;
  std::span<const double> values() const;

  Block to_dense() const;
  /// Drops exact zeros.
  Block to_sparse() const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool sparse_ = false;
  std::vector<double> data_;          // dense payload or CSR values
  std::vector<std::size_t> offsets_;  // CSR only
  std::vector<std::size_t> columns_;  // CSR only
};

bool same_values(const Block& a, const Block& b); // elementwise bit equality

Block transposed(const Block& b);

/// power/add_scalar on sparse storage throw UnsupportedOperation when the
/// result would stop being sparse (exponent <= 0, shift != 0).
Block apply_unary(const Block& b, UnaryKind op, double arg);

/// Result is sparse only when both operands are. mul keeps sparsity; for
/// add/sub a sparse result may store explicit zeros from cancellation.
Block apply_binary(const Block& a, const Block& b, BinaryKind op);

/// Collapses the given axis within one block: axis == rows produces a
/// 1 x cols partial, axis == cols produces rows x 1. Always dense. Empty
/// extents yield the reduction identity (0, +inf, -inf).
Block reduce_block(const Block& b, Axis axis, ReduceKind kind);

/// Combines two same-shape dense partials elementwise.
Block combine_partials(const Block& a, const Block& b, ReduceKind kind);

Block rows_range(const Block& b, std::size_t begin, std::size_t end);
Block cols_range(const Block& b, std::size_t begin, std::size_t end);
Block take_rows(const Block& b, std::span<const std::size_t> indices);

/// Stitches row-aligned parts left to right / column-aligned parts top to
/// bottom. Parts must share storage format.
Block hconcat(std::span<const Block> parts);
Block vconcat(std::span<const Block> parts);

/// Rebuilds a block by picking rows out of several sources;
/// picks[i] = (source index, row within that source).
Block assemble_rows(std::span<const Block> sources,
                    std::span<const std::pair<std::size_t, std::size_t>> picks);

/// acc (a.rows x b.cols, row-major) += a * b for any storage combination.
void add_product(const Block& a, const Block& b, std::vector<double>& acc);

} // namespace da
