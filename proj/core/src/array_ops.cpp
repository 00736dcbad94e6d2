#include <algorithm>
#include <string>
#include <utility>

#include "distarray/dist_array.hpp"
#include "rng.hpp"

namespace da {

namespace {

std::vector<Handle> grid_row(const DistArray& a, std::size_t bi) {
  std::vector<Handle> out;
  out.reserve(a.grid_cols());
  for (std::size_t j = 0; j < a.grid_cols(); ++j) {
    out.push_back(a.block_handle(bi, j));
  }
  return out;
}

std::vector<Handle> grid_col(const DistArray& a, std::size_t bj) {
  std::vector<Handle> out;
  out.reserve(a.grid_rows());
  for (std::size_t i = 0; i < a.grid_rows(); ++i) {
    out.push_back(a.block_handle(i, bj));
  }
  return out;
}

std::vector<Block> collect_blocks(const std::vector<Payload>& items) {
  std::vector<Block> out;
  out.reserve(items.size());
  for (const auto& p : items) {
    out.push_back(payload_block(p));
  }
  return out;
}

} // namespace

DistArray DistArray::transpose() const {
  std::size_t gr = grid_rows();
  std::size_t gc = grid_cols();
  std::vector<std::vector<Handle>> grid(gc, std::vector<Handle>(gr));
  for (std::size_t bi = 0; bi < gr; ++bi) {
    auto out = rt_->submit(
        "transpose",
        [](const std::vector<TaskInput>& in) {
          std::vector<Payload> outs;
          outs.reserve(in[0].items().size());
          for (const auto& p : in[0].items()) {
            outs.push_back(block_payload(transposed(payload_block(p))));
          }
          return outs;
        },
        {Arg::collection(grid_row(*this, bi))}, gc);
    for (std::size_t bj = 0; bj < gc; ++bj) {
      grid[bj][bi] = out[bj];
    }
  }
  return DistArray(*rt_, cols_, rows_, {block_.cols, block_.rows},
                   std::move(grid), sparse_);
}

DistArray DistArray::shuffle_rows(std::uint64_t seed) const {
  std::size_t gr = grid_rows();
  std::size_t gc = grid_cols();
  std::vector<std::size_t> sizes(gr);
  for (std::size_t i = 0; i < gr; ++i) {
    sizes[i] = block_row_extent(i);
  }
  auto quota = detail::shuffle_quotas(sizes, seed);

  // wave 1: each block row permutes its rows and deals them out into one
  // bundle per destination block row
  std::vector<std::vector<Handle>> parts(gr); // parts[i][d]
  for (std::size_t i = 0; i < gr; ++i) {
    auto q = std::make_shared<const std::vector<std::size_t>>(quota[i]);
    std::uint64_t split_seed =
        detail::mix_seed(seed, detail::role_shuffle_split, i);
    auto out = rt_->submit(
        "shuffle",
        [q, split_seed](const std::vector<TaskInput>& in) {
          Block wide = hconcat(collect_blocks(in[0].items()));
          detail::Rng rng(split_seed);
          auto perm = detail::permutation(wide.rows(), rng);
          Block mixed = take_rows(wide, perm);
          std::vector<Payload> outs;
          outs.reserve(q->size());
          std::size_t pos = 0;
          for (auto count : *q) {
            outs.push_back(block_payload(rows_range(mixed, pos, pos + count)));
            pos += count;
          }
          return outs;
        },
        {Arg::collection(grid_row(*this, i))}, gr);
    parts[i] = std::move(out);
  }

  // wave 2: each destination block row concatenates its bundles in source
  // order, applies its own seeded permutation, and re-cuts column tiles
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(gc));
  for (std::size_t d = 0; d < gr; ++d) {
    std::vector<Handle> incoming;
    incoming.reserve(gr);
    for (std::size_t i = 0; i < gr; ++i) {
      incoming.push_back(parts[i][d]);
    }
    std::uint64_t merge_seed =
        detail::mix_seed(seed, detail::role_shuffle_merge, d);
    std::vector<std::size_t> cuts(gc);
    for (std::size_t j = 0; j < gc; ++j) {
      cuts[j] = block_col_extent(j);
    }
    auto cuts_ptr = std::make_shared<const std::vector<std::size_t>>(cuts);
    auto out = rt_->submit(
        "shuffle",
        [merge_seed, cuts_ptr](const std::vector<TaskInput>& in) {
          Block bundle = vconcat(collect_blocks(in[0].items()));
          detail::Rng rng(merge_seed);
          auto perm = detail::permutation(bundle.rows(), rng);
          Block mixed = take_rows(bundle, perm);
          std::vector<Payload> outs;
          outs.reserve(cuts_ptr->size());
          std::size_t pos = 0;
          for (auto width : *cuts_ptr) {
            outs.push_back(
                block_payload(cols_range(mixed, pos, pos + width)));
            pos += width;
          }
          return outs;
        },
        {Arg::collection(std::move(incoming))}, gc);
    grid[d] = std::move(out);
  }
  return DistArray(*rt_, rows_, cols_, block_, std::move(grid), sparse_);
}

DistArray DistArray::reduce(Axis axis, ReduceKind kind) const {
  auto fold = [axis, kind](const std::vector<TaskInput>& in) {
    const auto& items = in[0].items();
    Block acc = reduce_block(payload_block(items[0]), axis, kind);
    for (std::size_t k = 1; k < items.size(); ++k) {
      acc = combine_partials(
          acc, reduce_block(payload_block(items[k]), axis, kind), kind);
    }
    return std::vector<Payload>{block_payload(std::move(acc))};
  };
  if (axis == Axis::rows) {
    std::size_t gc = grid_cols();
    std::vector<std::vector<Handle>> grid(1, std::vector<Handle>(gc));
    for (std::size_t bj = 0; bj < gc; ++bj) {
      grid[0][bj] =
          rt_->submit("reduce", fold, {Arg::collection(grid_col(*this, bj))})[0];
    }
    return DistArray(*rt_, 1, cols_, {1, block_.cols}, std::move(grid), false);
  }
  std::size_t gr = grid_rows();
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(1));
  for (std::size_t bi = 0; bi < gr; ++bi) {
    grid[bi][0] =
        rt_->submit("reduce", fold, {Arg::collection(grid_row(*this, bi))})[0];
  }
  return DistArray(*rt_, rows_, 1, {block_.rows, 1}, std::move(grid), false);
}

DistArray DistArray::mean(Axis axis) const {
  std::size_t extent = axis == Axis::rows ? rows_ : cols_;
  return reduce(axis, ReduceKind::sum)
      .scale(1.0 / static_cast<double>(extent));
}

DistArray DistArray::norm(Axis axis) const {
  return pow(2.0).reduce(axis, ReduceKind::sum).sqrt();
}

DistArray DistArray::map_blocks(const char* tag, UnaryKind op,
                                double arg) const {
  if (sparse_) {
    // reject densifying combinations before any task is spawned
    if (op == UnaryKind::power && arg <= 0.0) {
      throw UnsupportedOperation(
          "power with a non-positive exponent is not defined for sparse "
          "arrays");
    }
    if (op == UnaryKind::add_scalar && arg != 0.0) {
      throw UnsupportedOperation(
          "adding a non-zero scalar is not defined for sparse arrays");
    }
  }
  std::size_t gr = grid_rows();
  std::size_t gc = grid_cols();
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(gc));
  for (std::size_t bi = 0; bi < gr; ++bi) {
    for (std::size_t bj = 0; bj < gc; ++bj) {
      grid[bi][bj] = rt_->submit(
          tag,
          [op, arg](const std::vector<TaskInput>& in) {
            return std::vector<Payload>{block_payload(
                apply_unary(payload_block(in[0].value()), op, arg))};
          },
          {Arg::handle(grid_[bi][bj])})[0];
    }
  }
  return DistArray(*rt_, rows_, cols_, block_, std::move(grid), sparse_);
}

DistArray DistArray::pow(double exponent) const {
  return map_blocks("map", UnaryKind::power, exponent);
}

DistArray DistArray::sqrt() const { return map_blocks("map", UnaryKind::sqrt, 0.0); }

DistArray DistArray::scale(double factor) const {
  return map_blocks("map", UnaryKind::scale, factor);
}

DistArray DistArray::add_scalar(double value) const {
  return map_blocks("map", UnaryKind::add_scalar, value);
}

DistArray zip_blocks(const DistArray& a, const DistArray& b, BinaryKind op) {
  if (&a.runtime() != &b.runtime()) {
    throw std::invalid_argument("elementwise op: different runtimes");
  }
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("elementwise op: shape mismatch");
  }
  if (a.reg_block() != b.reg_block()) {
    throw std::invalid_argument("elementwise op: block shape mismatch");
  }
  std::size_t gr = a.grid_rows();
  std::size_t gc = a.grid_cols();
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(gc));
  for (std::size_t bi = 0; bi < gr; ++bi) {
    for (std::size_t bj = 0; bj < gc; ++bj) {
      grid[bi][bj] = a.runtime().submit(
          "zip",
          [op](const std::vector<TaskInput>& in) {
            return std::vector<Payload>{block_payload(
                apply_binary(payload_block(in[0].value()),
                             payload_block(in[1].value()), op))};
          },
          {Arg::handle(a.block_handle(bi, bj)),
           Arg::handle(b.block_handle(bi, bj))})[0];
    }
  }
  return DistArray::from_grid(a.runtime(), a.rows(), a.cols(), a.reg_block(),
                              std::move(grid),
                              a.is_sparse() && b.is_sparse());
}

DistArray operator+(const DistArray& a, const DistArray& b) {
  return zip_blocks(a, b, BinaryKind::add);
}

DistArray operator-(const DistArray& a, const DistArray& b) {
  return zip_blocks(a, b, BinaryKind::sub);
}

DistArray operator*(const DistArray& a, const DistArray& b) {
  return zip_blocks(a, b, BinaryKind::mul);
}

DistArray matmul(const DistArray& a, const DistArray& b) {
  if (&a.runtime() != &b.runtime()) {
    throw std::invalid_argument("matmul: different runtimes");
  }
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions do not match");
  }
  if (a.reg_block().cols != b.reg_block().rows) {
    throw std::invalid_argument("matmul: inner block extents do not match");
  }
  bool sparse_out = a.is_sparse() && b.is_sparse();
  std::size_t gr = a.grid_rows();
  std::size_t gc = b.grid_cols();
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(gc));
  for (std::size_t oi = 0; oi < gr; ++oi) {
    std::size_t out_r = a.block_row_extent(oi);
    for (std::size_t oj = 0; oj < gc; ++oj) {
      std::size_t out_c = b.block_col_extent(oj);
      grid[oi][oj] = a.runtime().submit(
          "matmul",
          [out_r, out_c, sparse_out](const std::vector<TaskInput>& in) {
            const auto& lhs = in[0].items();
            const auto& rhs = in[1].items();
            std::vector<double> acc(out_r * out_c, 0.0);
            for (std::size_t k = 0; k < lhs.size(); ++k) {
              add_product(payload_block(lhs[k]), payload_block(rhs[k]), acc);
            }
            Block out = Block::dense(out_r, out_c, std::move(acc));
            return std::vector<Payload>{
                block_payload(sparse_out ? out.to_sparse() : std::move(out))};
          },
          {Arg::collection(grid_row(a, oi)),
           Arg::collection(grid_col(b, oj))})[0];
    }
  }
  return DistArray::from_grid(a.runtime(), a.rows(), b.cols(),
                              {a.reg_block().rows, b.reg_block().cols},
                              std::move(grid), sparse_out);
}

} // namespace da
