#include "distarray/block.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

namespace da {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) {
    throw std::invalid_argument(msg);
  }
}

double reduce_identity(ReduceKind kind) {
  switch (kind) {
  case ReduceKind::sum:
    return 0.0;
  case ReduceKind::min:
    return std::numeric_limits<double>::infinity();
  case ReduceKind::max:
    return -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double reduce_step(double acc, double v, ReduceKind kind) {
  switch (kind) {
  case ReduceKind::sum:
    return acc + v;
  case ReduceKind::min:
    return v < acc ? v : acc;
  case ReduceKind::max:
    return v > acc ? v : acc;
  }
  return acc;
}

} // namespace

Block Block::dense(std::size_t rows, std::size_t cols) {
  Block b;
  b.rows_ = rows;
  b.cols_ = cols;
  b.data_.assign(rows * cols, 0.0);
  return b;
}

Block Block::dense(std::size_t rows, std::size_t cols,
                   std::vector<double> values) {
  require(values.size() == rows * cols, "dense: value count != rows * cols");
  Block b;
  b.rows_ = rows;
  b.cols_ = cols;
  b.data_ = std::move(values);
  return b;
}

Block Block::from_rows(const std::vector<std::vector<double>>& rows) {
  Block b;
  b.rows_ = rows.size();
  b.cols_ = rows.empty() ? 0 : rows.front().size();
  b.data_.reserve(b.rows_ * b.cols_);
  for (const auto& r : rows) {
    require(r.size() == b.cols_, "from_rows: ragged rows");
    b.data_.insert(b.data_.end(), r.begin(), r.end());
  }
  return b;
}

Block Block::identity(std::size_t n) {
  Block b = dense(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    b.data_[i * n + i] = 1.0;
  }
  return b;
}

Block Block::sparse(std::size_t rows, std::size_t cols,
                    std::vector<std::size_t> offsets,
                    std::vector<std::size_t> columns,
                    std::vector<double> values) {
  require(offsets.size() == rows + 1, "sparse: offsets size != rows + 1");
  require(offsets.front() == 0, "sparse: offsets must start at 0");
  require(offsets.back() == columns.size(), "sparse: offsets end != nnz");
  require(columns.size() == values.size(), "sparse: columns/values mismatch");
  for (std::size_t i = 0; i < rows; ++i) {
    require(offsets[i] <= offsets[i + 1], "sparse: offsets must not decrease");
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      require(columns[k] < cols, "sparse: column index out of range");
      require(k == offsets[i] || columns[k - 1] < columns[k],
              "sparse: columns must be strictly increasing within a row");
    }
  }
  Block b;
  b.rows_ = rows;
  b.cols_ = cols;
  b.sparse_ = true;
  b.offsets_ = std::move(offsets);
  b.columns_ = std::move(columns);
  b.data_ = std::move(values);
  return b;
}

Block Block::sparse_from_triplets(std::size_t rows, std::size_t cols,
                                  std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    require(t.row < rows && t.col < cols,
            "sparse_from_triplets: coordinate out of range");
  }
  // stable sort keeps input order among duplicates, so the last entry of
  // each equal-coordinate run is the last occurrence in the input
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) {
                     return a.row != b.row ? a.row < b.row : a.col < b.col;
                   });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  columns.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    if (i + 1 < triplets.size() && triplets[i + 1].row == triplets[i].row &&
        triplets[i + 1].col == triplets[i].col) {
      continue;
    }
    columns.push_back(triplets[i].col);
    values.push_back(triplets[i].value);
    ++offsets[triplets[i].row + 1];
  }
  for (std::size_t i = 0; i < rows; ++i) {
    offsets[i + 1] += offsets[i];
  }
  Block b;
  b.rows_ = rows;
  b.cols_ = cols;
  b.sparse_ = true;
  b.offsets_ = std::move(offsets);
  b.columns_ = std::move(columns);
  b.data_ = std::move(values);
  return b;
}

std::size_t Block::stored() const noexcept {
  return sparse_ ? data_.size() : rows_ * cols_;
}

double Block::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) {
    throw std::out_of_range("Block::at: index out of range");
  }
  if (!sparse_) {
    return data_[i * cols_ + j];
  }
  auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) {
    return 0.0;
  }
  return data_[static_cast<std::size_t>(it - columns_.begin())];
}

std::span<const double> Block::dense_data() const {
  if (sparse_) {
    throw std::logic_error("dense_data: block is sparse");
  }
  return data_;
}

double& Block::dense_at(std::size_t i, std::size_t j) {
  if (sparse_) {
    throw std::logic_error("dense_at: block is sparse");
  }
  if (i >= rows_ || j >= cols_) {
    throw std::out_of_range("dense_at: index out of range");
  }
  return data_[i * cols_ + j];
}

std::span<const std::size_t> Block::offsets() const {
  if (!sparse_) {
    throw std::logic_error("offsets: block is dense");
  }
  return offsets_;
}

std::span<const std::size_t> Block::columns() const {
  if (!sparse_) {
    throw std::logic_error("columns: block is dense");
  }
  return columns_;
}

std::span<const double> Block::values() const {
  if (!sparse_) {
    throw std::logic_error("values: block is dense");
  }
  return data_;
}

Block Block::to_dense() const {
  if (!sparse_) {
    return *this;
  }
  Block b = dense(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      b.data_[i * cols_ + columns_[k]] = data_[k];
    }
  }
  return b;
}

Block Block::to_sparse() const {
  if (sparse_) {
    return *this;
  }
  std::vector<std::size_t> offsets(rows_ + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      double v = data_[i * cols_ + j];
      if (v != 0.0) {
        columns.push_back(j);
        values.push_back(v);
      }
    }
    offsets[i + 1] = columns.size();
  }
  Block b;
  b.rows_ = rows_;
  b.cols_ = cols_;
  b.sparse_ = true;
  b.offsets_ = std::move(offsets);
  b.columns_ = std::move(columns);
  b.data_ = std::move(values);
  return b;
}

bool same_values(const Block& a, const Block& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (std::bit_cast<std::uint64_t>(a.at(i, j)) !=
          std::bit_cast<std::uint64_t>(b.at(i, j))) {
        return false;
      }
    }
  }
  return true;
}

Block transposed(const Block& b) {
  if (!b.is_sparse()) {
    Block t = Block::dense(b.cols(), b.rows());
    auto src = b.dense_data();
    for (std::size_t i = 0; i < b.rows(); ++i) {
      for (std::size_t j = 0; j < b.cols(); ++j) {
        t.dense_at(j, i) = src[i * b.cols() + j];
      }
    }
    return t;
  }
  // counting sort by column; result rows come out with ascending indices
  auto off = b.offsets();
  auto col = b.columns();
  auto val = b.values();
  std::vector<std::size_t> t_offsets(b.cols() + 1, 0);
  for (std::size_t k = 0; k < col.size(); ++k) {
    ++t_offsets[col[k] + 1];
  }
  for (std::size_t j = 0; j < b.cols(); ++j) {
    t_offsets[j + 1] += t_offsets[j];
  }
  std::vector<std::size_t> cursor(t_offsets.begin(), t_offsets.end() - 1);
  std::vector<std::size_t> t_columns(col.size());
  std::vector<double> t_values(col.size());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
      std::size_t pos = cursor[col[k]]++;
      t_columns[pos] = i;
      t_values[pos] = val[k];
    }
  }
  return Block::sparse(b.cols(), b.rows(), std::move(t_offsets),
                       std::move(t_columns), std::move(t_values));
}

Block apply_unary(const Block& b, UnaryKind op, double arg) {
  if (b.is_sparse()) {
    if (op == UnaryKind::power && arg <= 0.0) {
      throw UnsupportedOperation(
          "power with a non-positive exponent is not defined for sparse "
          "storage");
    }
    if (op == UnaryKind::add_scalar && arg != 0.0) {
      throw UnsupportedOperation(
          "adding a non-zero scalar is not defined for sparse storage");
    }
  }
  auto f = [op, arg](double v) {
    switch (op) {
    case UnaryKind::power:
      return std::pow(v, arg);
    case UnaryKind::sqrt:
      return std::sqrt(v);
    case UnaryKind::scale:
      return v * arg;
    case UnaryKind::add_scalar:
      return v + arg;
    }
    return v;
  };
  if (!b.is_sparse()) {
    auto src = b.dense_data();
    std::vector<double> out(src.size());
    for (std::size_t k = 0; k < src.size(); ++k) {
      out[k] = f(src[k]);
    }
    return Block::dense(b.rows(), b.cols(), std::move(out));
  }
  auto val = b.values();
  std::vector<double> out(val.size());
  for (std::size_t k = 0; k < val.size(); ++k) {
    out[k] = f(val[k]);
  }
  return Block::sparse(b.rows(), b.cols(),
                       {b.offsets().begin(), b.offsets().end()},
                       {b.columns().begin(), b.columns().end()},
                       std::move(out));
}

namespace {

double binary_step(double x, double y, BinaryKind op) {
  switch (op) {
  case BinaryKind::add:
    return x + y;
  case BinaryKind::sub:
    return x - y;
  case BinaryKind::mul:
    return x * y;
  }
  return 0.0;
}

Block binary_sparse_sparse(const Block& a, const Block& b, BinaryKind op) {
  std::vector<std::size_t> offsets(a.rows() + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  auto ao = a.offsets(), bo = b.offsets();
  auto ac = a.columns(), bc = b.columns();
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::size_t ka = ao[i], kb = bo[i];
    while (ka < ao[i + 1] || kb < bo[i + 1]) {
      bool take_a = kb == bo[i + 1] ||
                    (ka < ao[i + 1] && ac[ka] <= bc[kb]);
      bool take_b = ka == ao[i + 1] ||
                    (kb < bo[i + 1] && bc[kb] <= ac[ka]);
      if (take_a && take_b) {
        columns.push_back(ac[ka]);
        values.push_back(binary_step(av[ka], bv[kb], op));
        ++ka;
        ++kb;
      } else if (take_a) {
        if (op != BinaryKind::mul) {
          columns.push_back(ac[ka]);
          values.push_back(binary_step(av[ka], 0.0, op));
        }
        ++ka;
      } else {
        if (op != BinaryKind::mul) {
          columns.push_back(bc[kb]);
          values.push_back(binary_step(0.0, bv[kb], op));
        }
        ++kb;
      }
    }
    offsets[i + 1] = columns.size();
  }
  return Block::sparse(a.rows(), a.cols(), std::move(offsets),
                       std::move(columns), std::move(values));
}

} // namespace

Block apply_binary(const Block& a, const Block& b, BinaryKind op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "apply_binary: shape mismatch");
  if (a.is_sparse() && b.is_sparse()) {
    return binary_sparse_sparse(a, b, op);
  }
  // mixed storage densifies; named temporaries keep the spans alive
  Block lhs = a.to_dense();
  Block rhs = b.to_dense();
  std::vector<double> out(lhs.rows() * lhs.cols());
  auto x = lhs.dense_data();
  auto y = rhs.dense_data();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = binary_step(x[k], y[k], op);
  }
  return Block::dense(a.rows(), a.cols(), std::move(out));
}

Block reduce_block(const Block& b, Axis axis, ReduceKind kind) {
  std::size_t out_rows = axis == Axis::rows ? 1 : b.rows();
  std::size_t out_cols = axis == Axis::rows ? b.cols() : 1;
  Block out = Block::dense(out_rows, out_cols);
  std::vector<double> acc(out_rows * out_cols, reduce_identity(kind));

  if (!b.is_sparse()) {
    auto src = b.dense_data();
    for (std::size_t i = 0; i < b.rows(); ++i) {
      for (std::size_t j = 0; j < b.cols(); ++j) {
        std::size_t slot = axis == Axis::rows ? j : i;
        acc[slot] = reduce_step(acc[slot], src[i * b.cols() + j], kind);
      }
    }
  } else {
    auto off = b.offsets();
    auto col = b.columns();
    auto val = b.values();
    std::vector<std::size_t> counts(acc.size(), 0);
    for (std::size_t i = 0; i < b.rows(); ++i) {
      for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
        std::size_t slot = axis == Axis::rows ? col[k] : i;
        acc[slot] = reduce_step(acc[slot], val[k], kind);
        ++counts[slot];
      }
    }
    if (kind != ReduceKind::sum) {
      // implicit zeros take part in min/max
      std::size_t extent = axis == Axis::rows ? b.rows() : b.cols();
      for (std::size_t s = 0; s < acc.size(); ++s) {
        if (counts[s] < extent) {
          acc[s] = reduce_step(acc[s], 0.0, kind);
        }
      }
    }
  }
  for (std::size_t s = 0; s < acc.size(); ++s) {
    out.dense_at(axis == Axis::rows ? 0 : s, axis == Axis::rows ? s : 0) =
        acc[s];
  }
  return out;
}

Block combine_partials(const Block& a, const Block& b, ReduceKind kind) {
  require(!a.is_sparse() && !b.is_sparse(), "combine_partials: dense only");
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "combine_partials: shape mismatch");
  auto x = a.dense_data();
  auto y = b.dense_data();
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = reduce_step(x[k], y[k], kind);
  }
  return Block::dense(a.rows(), a.cols(), std::move(out));
}

Block rows_range(const Block& b, std::size_t begin, std::size_t end) {
  if (begin > end || end > b.rows()) {
    throw std::out_of_range("rows_range: bad range");
  }
  std::size_t n = end - begin;
  if (!b.is_sparse()) {
    auto src = b.dense_data();
    std::vector<double> out(src.begin() + static_cast<std::ptrdiff_t>(begin * b.cols()),
                            src.begin() + static_cast<std::ptrdiff_t>(end * b.cols()));
    return Block::dense(n, b.cols(), std::move(out));
  }
  auto off = b.offsets();
  auto col = b.columns();
  auto val = b.values();
  std::size_t k0 = off[begin], k1 = off[end];
  std::vector<std::size_t> offsets(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    offsets[i] = off[begin + i] - k0;
  }
  return Block::sparse(n, b.cols(), std::move(offsets),
                       {col.begin() + static_cast<std::ptrdiff_t>(k0),
                        col.begin() + static_cast<std::ptrdiff_t>(k1)},
                       {val.begin() + static_cast<std::ptrdiff_t>(k0),
                        val.begin() + static_cast<std::ptrdiff_t>(k1)});
}

Block cols_range(const Block& b, std::size_t begin, std::size_t end) {
  if (begin > end || end > b.cols()) {
    throw std::out_of_range("cols_range: bad range");
  }
  std::size_t n = end - begin;
  if (!b.is_sparse()) {
    std::vector<double> out;
    out.reserve(b.rows() * n);
    auto src = b.dense_data();
    for (std::size_t i = 0; i < b.rows(); ++i) {
      auto first = src.begin() + static_cast<std::ptrdiff_t>(i * b.cols() + begin);
      out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(n));
    }
    return Block::dense(b.rows(), n, std::move(out));
  }
  auto off = b.offsets();
  auto col = b.columns();
  auto val = b.values();
  std::vector<std::size_t> offsets(b.rows() + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  for (std::size_t i = 0; i < b.rows(); ++i) {
    auto row_first = col.begin() + static_cast<std::ptrdiff_t>(off[i]);
    auto row_last = col.begin() + static_cast<std::ptrdiff_t>(off[i + 1]);
    auto lo = std::lower_bound(row_first, row_last, begin);
    auto hi = std::lower_bound(lo, row_last, end);
    for (auto it = lo; it != hi; ++it) {
      columns.push_back(*it - begin);
      values.push_back(val[static_cast<std::size_t>(it - col.begin())]);
    }
    offsets[i + 1] = columns.size();
  }
  return Block::sparse(b.rows(), n, std::move(offsets), std::move(columns),
                       std::move(values));
}

Block take_rows(const Block& b, std::span<const std::size_t> indices) {
  for (auto i : indices) {
    if (i >= b.rows()) {
      throw std::out_of_range("take_rows: row index out of range");
    }
  }
  if (!b.is_sparse()) {
    std::vector<double> out;
    out.reserve(indices.size() * b.cols());
    auto src = b.dense_data();
    for (auto i : indices) {
      auto first = src.begin() + static_cast<std::ptrdiff_t>(i * b.cols());
      out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(b.cols()));
    }
    return Block::dense(indices.size(), b.cols(), std::move(out));
  }
  auto off = b.offsets();
  auto col = b.columns();
  auto val = b.values();
  std::vector<std::size_t> offsets(indices.size() + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::size_t i = indices[r];
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
      columns.push_back(col[k]);
      values.push_back(val[k]);
    }
    offsets[r + 1] = columns.size();
  }
  return Block::sparse(indices.size(), b.cols(), std::move(offsets),
                       std::move(columns), std::move(values));
}

Block hconcat(std::span<const Block> parts) {
  require(!parts.empty(), "hconcat: no parts");
  std::size_t rows = parts.front().rows();
  bool sparse = parts.front().is_sparse();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    require(p.rows() == rows, "hconcat: row count mismatch");
    require(p.is_sparse() == sparse, "hconcat: storage mismatch");
    cols += p.cols();
  }
  if (!sparse) {
    std::vector<double> out;
    out.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (const auto& p : parts) {
        auto src = p.dense_data();
        auto first = src.begin() + static_cast<std::ptrdiff_t>(i * p.cols());
        out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(p.cols()));
      }
    }
    return Block::dense(rows, cols, std::move(out));
  }
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t shift = 0;
    for (const auto& p : parts) {
      auto off = p.offsets();
      auto col = p.columns();
      auto val = p.values();
      for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
        columns.push_back(col[k] + shift);
        values.push_back(val[k]);
      }
      shift += p.cols();
    }
    offsets[i + 1] = columns.size();
  }
  return Block::sparse(rows, cols, std::move(offsets), std::move(columns),
                       std::move(values));
}

Block vconcat(std::span<const Block> parts) {
  require(!parts.empty(), "vconcat: no parts");
  std::size_t cols = parts.front().cols();
  bool sparse = parts.front().is_sparse();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require(p.cols() == cols, "vconcat: column count mismatch");
    require(p.is_sparse() == sparse, "vconcat: storage mismatch");
    rows += p.rows();
  }
  if (!sparse) {
    std::vector<double> out;
    out.reserve(rows * cols);
    for (const auto& p : parts) {
      auto src = p.dense_data();
      out.insert(out.end(), src.begin(), src.end());
    }
    return Block::dense(rows, cols, std::move(out));
  }
  std::vector<std::size_t> offsets;
  offsets.reserve(rows + 1);
  offsets.push_back(0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  for (const auto& p : parts) {
    auto off = p.offsets();
    auto col = p.columns();
    auto val = p.values();
    std::size_t base = offsets.back();
    for (std::size_t i = 1; i <= p.rows(); ++i) {
      offsets.push_back(base + off[i]);
    }
    columns.insert(columns.end(), col.begin(), col.end());
    values.insert(values.end(), val.begin(), val.end());
  }
  return Block::sparse(rows, cols, std::move(offsets), std::move(columns),
                       std::move(values));
}

Block assemble_rows(
    std::span<const Block> sources,
    std::span<const std::pair<std::size_t, std::size_t>> picks) {
  require(!sources.empty(), "assemble_rows: no sources");
  std::size_t cols = sources.front().cols();
  bool sparse = sources.front().is_sparse();
  for (const auto& s : sources) {
    require(s.cols() == cols, "assemble_rows: column count mismatch");
    require(s.is_sparse() == sparse, "assemble_rows: storage mismatch");
  }
  for (const auto& [src, row] : picks) {
    require(src < sources.size(), "assemble_rows: source index out of range");
    if (row >= sources[src].rows()) {
      throw std::out_of_range("assemble_rows: row index out of range");
    }
  }
  if (!sparse) {
    std::vector<double> out;
    out.reserve(picks.size() * cols);
    for (const auto& [src, row] : picks) {
      auto data = sources[src].dense_data();
      auto first = data.begin() + static_cast<std::ptrdiff_t>(row * cols);
      out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(cols));
    }
    return Block::dense(picks.size(), cols, std::move(out));
  }
  std::vector<std::size_t> offsets(picks.size() + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  for (std::size_t r = 0; r < picks.size(); ++r) {
    const auto& s = sources[picks[r].first];
    auto off = s.offsets();
    auto col = s.columns();
    auto val = s.values();
    std::size_t i = picks[r].second;
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
      columns.push_back(col[k]);
      values.push_back(val[k]);
    }
    offsets[r + 1] = columns.size();
  }
  return Block::sparse(picks.size(), cols, std::move(offsets),
                       std::move(columns), std::move(values));
}

void add_product(const Block& a, const Block& b, std::vector<double>& acc) {
  require(a.cols() == b.rows(), "add_product: inner dimension mismatch");
  require(acc.size() == a.rows() * b.cols(), "add_product: bad accumulator");
  std::size_t cb = b.cols();
  // contributions to each output element accumulate in ascending k in all
  // four storage combinations, matching a plain i,j,k triple loop bit for bit
  if (!a.is_sparse() && !b.is_sparse()) {
    auto x = a.dense_data();
    auto y = b.dense_data();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t k = 0; k < a.cols(); ++k) {
        double aik = x[i * a.cols() + k];
        for (std::size_t j = 0; j < cb; ++j) {
          acc[i * cb + j] += aik * y[k * cb + j];
        }
      }
    }
  } else if (a.is_sparse() && !b.is_sparse()) {
    auto off = a.offsets();
    auto col = a.columns();
    auto val = a.values();
    auto y = b.dense_data();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t e = off[i]; e < off[i + 1]; ++e) {
        double aik = val[e];
        std::size_t k = col[e];
        for (std::size_t j = 0; j < cb; ++j) {
          acc[i * cb + j] += aik * y[k * cb + j];
        }
      }
    }
  } else if (!a.is_sparse() && b.is_sparse()) {
    auto x = a.dense_data();
    auto off = b.offsets();
    auto col = b.columns();
    auto val = b.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t k = 0; k < a.cols(); ++k) {
        double aik = x[i * a.cols() + k];
        for (std::size_t e = off[k]; e < off[k + 1]; ++e) {
          acc[i * cb + col[e]] += aik * val[e];
        }
      }
    }
  } else {
    auto ao = a.offsets();
    auto acol = a.columns();
    auto aval = a.values();
    auto bo = b.offsets();
    auto bcol = b.columns();
    auto bval = b.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t e = ao[i]; e < ao[i + 1]; ++e) {
        double aik = aval[e];
        std::size_t k = acol[e];
        for (std::size_t f = bo[k]; f < bo[k + 1]; ++f) {
          acc[i * cb + bcol[f]] += aik * bval[f];
        }
      }
    }
  }
}

} // namespace da
