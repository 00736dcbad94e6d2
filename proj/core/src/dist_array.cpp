#include "distarray/dist_array.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "rng.hpp"

namespace da {

namespace {

std::size_t div_up(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void validate_blocking(std::size_t rows, std::size_t cols, BlockShape block) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("array shape must be at least 1 x 1");
  }
  if (block.rows == 0 || block.cols == 0) {
    throw std::invalid_argument("block shape must be at least 1 x 1");
  }
  if (block.rows > rows || block.cols > cols) {
    throw std::invalid_argument("block shape exceeds array shape");
  }
}

using RangeList = std::vector<std::pair<std::size_t, std::size_t>>;
using RangeListPtr = std::shared_ptr<const RangeList>;

} // namespace

DistArray::DistArray(TaskRuntime& rt, std::size_t rows, std::size_t cols,
                     BlockShape block, std::vector<std::vector<Handle>> grid,
                     bool sparse)
    : rt_(&rt), rows_(rows), cols_(cols), block_(block), sparse_(sparse),
      grid_(std::move(grid)) {}

const Handle& DistArray::block_handle(std::size_t bi, std::size_t bj) const {
  if (bi >= grid_rows() || bj >= grid_cols()) {
    throw std::out_of_range("block_handle: block index out of range");
  }
  return grid_[bi][bj];
}

std::size_t DistArray::block_row_extent(std::size_t bi) const {
  if (bi >= grid_rows()) {
    throw std::out_of_range("block_row_extent: index out of range");
  }
  return std::min(block_.rows, rows_ - bi * block_.rows);
}

std::size_t DistArray::block_col_extent(std::size_t bj) const {
  if (bj >= grid_cols()) {
    throw std::out_of_range("block_col_extent: index out of range");
  }
  return std::min(block_.cols, cols_ - bj * block_.cols);
}

DistArray DistArray::random(TaskRuntime& rt, std::size_t rows,
                            std::size_t cols, BlockShape block,
                            std::uint64_t seed) {
  validate_blocking(rows, cols, block);
  std::size_t gr = div_up(rows, block.rows);
  std::size_t gc = div_up(cols, block.cols);
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(gc));
  for (std::size_t i = 0; i < gr; ++i) {
    std::size_t r = std::min(block.rows, rows - i * block.rows);
    for (std::size_t j = 0; j < gc; ++j) {
      std::size_t c = std::min(block.cols, cols - j * block.cols);
      std::uint64_t block_seed =
          detail::mix_seed(seed, detail::role_block_fill, i * gc + j);
      auto out = rt.submit(
          "random",
          [block_seed, r, c](const std::vector<TaskInput>&) {
            detail::Rng rng(block_seed);
            Block b = Block::dense(r, c);
            for (std::size_t ii = 0; ii < r; ++ii) {
              for (std::size_t jj = 0; jj < c; ++jj) {
                b.dense_at(ii, jj) = rng.unit();
              }
            }
            return std::vector<Payload>{block_payload(std::move(b))};
          },
          {});
      grid[i][j] = out[0];
    }
  }
  return DistArray(rt, rows, cols, block, std::move(grid), false);
}

DistArray DistArray::from_dense(TaskRuntime& rt, const Block& values,
                                BlockShape block, bool sparse) {
  validate_blocking(values.rows(), values.cols(), block);
  std::size_t gr = div_up(values.rows(), block.rows);
  std::size_t gc = div_up(values.cols(), block.cols);
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(gc));
  for (std::size_t i = 0; i < gr; ++i) {
    std::size_t r0 = i * block.rows;
    std::size_t r1 = std::min(values.rows(), r0 + block.rows);
    Block band = rows_range(values, r0, r1);
    for (std::size_t j = 0; j < gc; ++j) {
      std::size_t c0 = j * block.cols;
      std::size_t c1 = std::min(values.cols(), c0 + block.cols);
      Block cell = cols_range(band, c0, c1);
      grid[i][j] =
          rt.put(block_payload(sparse ? cell.to_sparse() : cell.to_dense()));
    }
  }
  return DistArray(rt, values.rows(), values.cols(), block, std::move(grid),
                   sparse);
}

DistArray DistArray::from_grid(TaskRuntime& rt, std::size_t rows,
                               std::size_t cols, BlockShape block,
                               std::vector<std::vector<Handle>> grid,
                               bool sparse) {
  validate_blocking(rows, cols, block);
  std::size_t gr = div_up(rows, block.rows);
  std::size_t gc = div_up(cols, block.cols);
  if (grid.size() != gr) {
    throw std::invalid_argument("from_grid: wrong number of block rows");
  }
  for (const auto& row : grid) {
    if (row.size() != gc) {
      throw std::invalid_argument("from_grid: wrong number of block columns");
    }
    for (const auto& h : row) {
      if (!h.valid()) {
        throw std::invalid_argument("from_grid: invalid handle");
      }
    }
  }
  return DistArray(rt, rows, cols, block, std::move(grid), sparse);
}

Block DistArray::collect() const {
  std::size_t gr = grid_rows();
  std::size_t gc = grid_cols();
  std::vector<std::vector<BlockPtr>> cells(gr, std::vector<BlockPtr>(gc));
  for (std::size_t i = 0; i < gr; ++i) {
    for (std::size_t j = 0; j < gc; ++j) {
      Payload p = rt_->fetch(grid_[i][j]);
      cells[i][j] = std::any_cast<const BlockPtr&>(p);
      if (cells[i][j]->rows() != block_row_extent(i) ||
          cells[i][j]->cols() != block_col_extent(j)) {
        throw std::logic_error("collect: block extent mismatch");
      }
    }
  }
  if (!sparse_) {
    std::vector<double> out;
    out.reserve(rows_ * cols_);
    for (std::size_t i = 0; i < gr; ++i) {
      std::size_t r = block_row_extent(i);
      for (std::size_t lr = 0; lr < r; ++lr) {
        for (std::size_t j = 0; j < gc; ++j) {
          auto data = cells[i][j]->dense_data();
          std::size_t c = cells[i][j]->cols();
          out.insert(out.end(),
                     data.begin() + static_cast<std::ptrdiff_t>(lr * c),
                     data.begin() + static_cast<std::ptrdiff_t>((lr + 1) * c));
        }
      }
    }
    return Block::dense(rows_, cols_, std::move(out));
  }
  std::vector<std::size_t> offsets(rows_ + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  for (std::size_t i = 0; i < gr; ++i) {
    std::size_t r = block_row_extent(i);
    for (std::size_t lr = 0; lr < r; ++lr) {
      std::size_t col_shift = 0;
      for (std::size_t j = 0; j < gc; ++j) {
        const Block& cell = *cells[i][j];
        auto off = cell.offsets();
        auto col = cell.columns();
        auto val = cell.values();
        for (std::size_t k = off[lr]; k < off[lr + 1]; ++k) {
          columns.push_back(col[k] + col_shift);
          values.push_back(val[k]);
        }
        col_shift += cell.cols();
      }
      offsets[i * block_.rows + lr + 1] = columns.size();
    }
  }
  return Block::sparse(rows_, cols_, std::move(offsets), std::move(columns),
                       std::move(values));
}

double DistArray::element(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) {
    throw std::out_of_range("element: index out of range");
  }
  std::size_t bi = i / block_.rows;
  std::size_t bj = j / block_.cols;
  Payload p = rt_->fetch(grid_[bi][bj]);
  return payload_block(p).at(i - bi * block_.rows, j - bj * block_.cols);
}

namespace {

// Splits [begin, end) of a blocked extent into per-source-block local
// ranges for one destination tile.
RangeList source_ranges(std::size_t begin, std::size_t end,
                        std::size_t block) {
  RangeList out;
  std::size_t pos = begin;
  while (pos < end) {
    std::size_t src = pos / block;
    std::size_t lo = pos - src * block;
    std::size_t hi = std::min(block, end - src * block);
    out.emplace_back(lo, hi);
    pos = src * block + hi;
  }
  return out;
}

} // namespace

DistArray DistArray::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin >= end) {
    throw std::invalid_argument("slice_rows: empty window");
  }
  if (end > rows_) {
    throw std::out_of_range("slice_rows: window exceeds array");
  }
  std::size_t n = end - begin;
  std::size_t out_gr = div_up(n, block_.rows);
  std::size_t gc = grid_cols();
  std::vector<std::vector<Handle>> grid(out_gr, std::vector<Handle>(gc));
  for (std::size_t oi = 0; oi < out_gr; ++oi) {
    std::size_t g0 = begin + oi * block_.rows;
    std::size_t g1 = std::min(end, g0 + block_.rows);
    std::size_t s0 = g0 / block_.rows;
    auto ranges = std::make_shared<const RangeList>(
        source_ranges(g0, g1, block_.rows));
    for (std::size_t bj = 0; bj < gc; ++bj) {
      std::vector<Handle> srcs;
      for (std::size_t s = 0; s < ranges->size(); ++s) {
        srcs.push_back(grid_[s0 + s][bj]);
      }
      auto out = rt_->submit(
          "slice",
          [ranges](const std::vector<TaskInput>& in) {
            const auto& parts = in[0].items();
            std::vector<Block> cut;
            cut.reserve(parts.size());
            for (std::size_t s = 0; s < parts.size(); ++s) {
              cut.push_back(rows_range(payload_block(parts[s]), (*ranges)[s].first,
                                       (*ranges)[s].second));
            }
            return std::vector<Payload>{block_payload(vconcat(cut))};
          },
          {Arg::collection(std::move(srcs))});
      grid[oi][bj] = out[0];
    }
  }
  return DistArray(*rt_, n, cols_, block_, std::move(grid), sparse_);
}

DistArray DistArray::slice_cols(std::size_t begin, std::size_t end) const {
  if (begin >= end) {
    throw std::invalid_argument("slice_cols: empty window");
  }
  if (end > cols_) {
    throw std::out_of_range("slice_cols: window exceeds array");
  }
  std::size_t n = end - begin;
  std::size_t out_gc = div_up(n, block_.cols);
  std::size_t gr = grid_rows();
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(out_gc));
  for (std::size_t oj = 0; oj < out_gc; ++oj) {
    std::size_t g0 = begin + oj * block_.cols;
    std::size_t g1 = std::min(end, g0 + block_.cols);
    std::size_t s0 = g0 / block_.cols;
    auto ranges = std::make_shared<const RangeList>(
        source_ranges(g0, g1, block_.cols));
    for (std::size_t bi = 0; bi < gr; ++bi) {
      std::vector<Handle> srcs;
      for (std::size_t s = 0; s < ranges->size(); ++s) {
        srcs.push_back(grid_[bi][s0 + s]);
      }
      auto out = rt_->submit(
          "slice",
          [ranges](const std::vector<TaskInput>& in) {
            const auto& parts = in[0].items();
            std::vector<Block> cut;
            cut.reserve(parts.size());
            for (std::size_t s = 0; s < parts.size(); ++s) {
              cut.push_back(cols_range(payload_block(parts[s]), (*ranges)[s].first,
                                       (*ranges)[s].second));
            }
            return std::vector<Payload>{block_payload(hconcat(cut))};
          },
          {Arg::collection(std::move(srcs))});
      grid[bi][oj] = out[0];
    }
  }
  return DistArray(*rt_, rows_, n, block_, std::move(grid), sparse_);
}

DistArray DistArray::gather_rows(std::span<const std::size_t> indices) const {
  if (indices.empty()) {
    throw std::invalid_argument("gather_rows: empty selection");
  }
  for (auto i : indices) {
    if (i >= rows_) {
      throw std::out_of_range("gather_rows: row index out of range");
    }
  }
  std::size_t n = indices.size();
  std::size_t out_gr = div_up(n, block_.rows);
  std::size_t gc = grid_cols();
  std::vector<std::vector<Handle>> grid(out_gr, std::vector<Handle>(gc));
  for (std::size_t oi = 0; oi < out_gr; ++oi) {
    std::size_t lo = oi * block_.rows;
    std::size_t hi = std::min(n, lo + block_.rows);
    // sources in first-use order; picks refer to positions in that list
    std::vector<std::size_t> srcs;
    auto picks = std::make_shared<RangeList>();
    for (std::size_t r = lo; r < hi; ++r) {
      std::size_t s = indices[r] / block_.rows;
      std::size_t pos = 0;
      for (; pos < srcs.size(); ++pos) {
        if (srcs[pos] == s) {
          break;
        }
      }
      if (pos == srcs.size()) {
        srcs.push_back(s);
      }
      picks->emplace_back(pos, indices[r] - s * block_.rows);
    }
    std::shared_ptr<const RangeList> picks_ro = picks;
    for (std::size_t bj = 0; bj < gc; ++bj) {
      std::vector<Handle> deps;
      deps.reserve(srcs.size());
      for (auto s : srcs) {
        deps.push_back(grid_[s][bj]);
      }
      auto out = rt_->submit(
          "gather",
          [picks_ro](const std::vector<TaskInput>& in) {
            const auto& parts = in[0].items();
            std::vector<Block> sources;
            sources.reserve(parts.size());
            for (const auto& p : parts) {
              sources.push_back(payload_block(p));
            }
            return std::vector<Payload>{
                block_payload(assemble_rows(sources, *picks_ro))};
          },
          {Arg::collection(std::move(deps))});
      grid[oi][bj] = out[0];
    }
  }
  return DistArray(*rt_, n, cols_, block_, std::move(grid), sparse_);
}

} // namespace da
