#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "distarray/block.hpp"
#include "distarray/task_runtime.hpp"

namespace da {

/// Regular tile shape of a distributed array. Every tile has this shape
/// except the last tile row/column, which may be smaller when the shape
/// does not divide the total extent.
struct BlockShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  friend bool operator==(const BlockShape&, const BlockShape&) = default;
};

using BlockPtr = std::shared_ptr<const Block>;

inline Payload block_payload(Block b) {
  return Payload(std::make_shared<const Block>(std::move(b)));
}

inline const Block& payload_block(const Payload& p) {
  return *std::any_cast<const BlockPtr&>(p);
}

/// Two-dimensional array of doubles, tiled into blocks whose payloads live
/// behind runtime handles. The structure (shape, tiling, storage format,
/// handle grid) is driver-side metadata; the data itself may still be being
/// computed. All operations build new arrays, nothing mutates in place.
///
/// Storage is homogeneous: every block is dense or every block is CSR.
class DistArray {
public:
  /// Uniformly distributed values in [0, 1). One "random" task per block;
  /// each block's stream depends only on (seed, block row, block column),
  /// so the result is independent of worker count and scheduling.
  static DistArray random(TaskRuntime& rt, std::size_t rows, std::size_t cols,
                          BlockShape block, std::uint64_t seed);

  /// Partitions an in-memory matrix. Data is registered directly with the
  /// runtime; no tasks are spawned. sparse selects the block storage.
  static DistArray from_dense(TaskRuntime& rt, const Block& values,
                              BlockShape block, bool sparse = false);

  /// Wraps an existing handle grid. grid[i][j] must resolve to a block of
  /// the implied extent; sizes are validated, contents are trusted.
  static DistArray from_grid(TaskRuntime& rt, std::size_t rows,
                             std::size_t cols, BlockShape block,
                             std::vector<std::vector<Handle>> grid,
                             bool sparse);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  BlockShape reg_block() const noexcept { return block_; }
  bool is_sparse() const noexcept { return sparse_; }
  std::size_t grid_rows() const noexcept { return grid_.size(); }
  std::size_t grid_cols() const noexcept {
    return grid_.empty() ? 0 : grid_.front().size();
  }
  TaskRuntime& runtime() const noexcept { return *rt_; }

  const Handle& block_handle(std::size_t bi, std::size_t bj) const;
  std::size_t block_row_extent(std::size_t bi) const;
  std::size_t block_col_extent(std::size_t bj) const;

  /// Fetches every block and stitches the full matrix together.
  Block collect() const;

  /// Single element; fetches only the block containing it.
  double element(std::size_t i, std::size_t j) const;

  /// Half-open row/column windows. The result is re-tiled to the regular
  /// block shape, so window boundaries need not align with tile boundaries.
  DistArray slice_rows(std::size_t begin, std::size_t end) const;
  DistArray slice_cols(std::size_t begin, std::size_t end) const;

  /// New array whose i-th row is row indices[i]; duplicates allowed.
  DistArray gather_rows(std::span<const std::size_t> indices) const;

  // --- blockwise parallel operations ---

  /// One "transpose" task per row of blocks; block (i, j) lands at (j, i).
  DistArray transpose() const;

  /// Random row permutation in two task waves (split then merge), seeded
  /// and stable across worker counts. Row block sizes are preserved.
  DistArray shuffle_rows(std::uint64_t seed) const;

  /// Collapses one axis. axis == rows gives a 1 x cols array (one task per
  /// column of blocks), axis == cols gives rows x 1 (one task per row of
  /// blocks). The result is dense.
  DistArray reduce(Axis axis, ReduceKind kind) const;
  DistArray mean(Axis axis) const;

  /// Euclidean norm along an axis: sqrt of the sum of squares.
  DistArray norm(Axis axis) const;

  DistArray pow(double exponent) const;
  DistArray sqrt() const;
  DistArray scale(double factor) const;
  DistArray add_scalar(double value) const;

  friend DistArray operator+(const DistArray& a, const DistArray& b);
  friend DistArray operator-(const DistArray& a, const DistArray& b);
  /// Elementwise product.
  friend DistArray operator*(const DistArray& a, const DistArray& b);

private:
  DistArray(TaskRuntime& rt, std::size_t rows, std::size_t cols,
            BlockShape block, std::vector<std::vector<Handle>> grid,
            bool sparse);

  DistArray map_blocks(const char* tag, UnaryKind op, double arg) const;
  friend DistArray zip_blocks(const DistArray& a, const DistArray& b,
                              BinaryKind op);
  friend DistArray matmul(const DistArray& a, const DistArray& b);

  TaskRuntime* rt_ = nullptr;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  BlockShape block_;
  bool sparse_ = false;
  std::vector<std::vector<Handle>> grid_;
};

/// Blocked matrix product; one "matmul" task per output block. Requires
/// a.cols() == b.rows() and matching inner tile extents.
DistArray matmul(const DistArray& a, const DistArray& b);

} // namespace da
