#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "distarray/als.hpp"
#include "rng.hpp"

namespace da {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FitPartial {
  double sse = 0.0;
  std::uint64_t count = 0;
};

using FitPtr = std::shared_ptr<const FitPartial>;

std::vector<Handle> row_handles(const DistArray& a, std::size_t bi) {
  std::vector<Handle> out;
  out.reserve(a.grid_cols());
  for (std::size_t j = 0; j < a.grid_cols(); ++j) {
    out.push_back(a.block_handle(bi, j));
  }
  return out;
}

std::vector<Handle> col_handles(const DistArray& a, std::size_t bj) {
  std::vector<Handle> out;
  out.reserve(a.grid_rows());
  for (std::size_t i = 0; i < a.grid_rows(); ++i) {
    out.push_back(a.block_handle(i, bj));
  }
  return out;
}

Eigen::Map<const RowMat> factor_map(const Block& b) {
  return {b.dense_data().data(), static_cast<Eigen::Index>(b.rows()),
          static_cast<Eigen::Index>(b.cols())};
}

// (A + reg I) f = rhs; A is positive definite once the ridge is added
void ridge_solve(Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, double reg,
                 Block& out, std::size_t row) {
  A.diagonal().array() += reg;
  Eigen::VectorXd f = Eigen::LLT<Eigen::MatrixXd>(A).solve(rhs);
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    out.dense_at(row, static_cast<std::size_t>(j)) = f(j);
  }
}

// User half-sweep: one "als_user" task per row of blocks, each solving the
// normal equations of its users against the full item factors. Entries feed
// the accumulators in ascending item order, so the result does not depend
// on the column tiling. Returns the stitched n_users x rank factors.
Block solve_users(const DistArray& ratings, const Block& users,
                  const Block& items_f, double reg) {
  auto& rt = ratings.runtime();
  std::size_t k = items_f.cols();
  auto vptr = std::make_shared<const Block>(items_f);
  std::vector<Handle> outs;
  outs.reserve(ratings.grid_rows());
  std::size_t r0 = 0;
  for (std::size_t bi = 0; bi < ratings.grid_rows(); ++bi) {
    std::size_t extent = ratings.block_row_extent(bi);
    auto prev =
        std::make_shared<const Block>(rows_range(users, r0, r0 + extent));
    r0 += extent;
    outs.push_back(rt.submit(
        "als_user",
        [vptr, prev, k, reg](const std::vector<TaskInput>& in) {
          const auto& items = in[0].items();
          auto vmap = factor_map(*vptr);
          const auto ek = static_cast<Eigen::Index>(k);
          std::size_t rows = payload_block(items[0]).rows();
          Block out = Block::dense(rows, k);
          Eigen::MatrixXd A(ek, ek);
          Eigen::VectorXd rhs(ek);
          for (std::size_t r = 0; r < rows; ++r) {
            A.setZero();
            rhs.setZero();
            bool seen = false;
            std::size_t off = 0;
            for (const auto& p : items) {
              const Block& b = payload_block(p);
              auto offs = b.offsets();
              auto cols = b.columns();
              auto vals = b.values();
              for (std::size_t e = offs[r]; e < offs[r + 1]; ++e) {
                auto v = vmap.row(static_cast<Eigen::Index>(off + cols[e]));
                A.noalias() += v.transpose() * v;
                rhs.noalias() += vals[e] * v.transpose();
                seen = true;
              }
              off += b.cols();
            }
            if (seen) {
              ridge_solve(A, rhs, reg, out, r);
            } else {
              for (std::size_t j = 0; j < k; ++j) {
                out.dense_at(r, j) = prev->at(r, j);
              }
            }
          }
          return std::vector<Payload>{block_payload(std::move(out))};
        },
        {Arg::collection(row_handles(ratings, bi))})[0]);
  }
  std::vector<Block> parts;
  parts.reserve(outs.size());
  for (const auto& h : outs) {
    parts.push_back(payload_block(rt.fetch(h)));
  }
  return vconcat(parts);
}

// Item half-sweep: one "als_item" task per column of blocks. Each task walks
// the CSR entries of its column stripe top to bottom, accumulating per-item
// normal equations in ascending user order, so the result does not depend
// on the row tiling and no transposed ratings are needed. Returns the
// stitched n_items x rank factors.
Block solve_items(const DistArray& ratings, const Block& users,
                  const Block& items_f, double reg) {
  auto& rt = ratings.runtime();
  std::size_t k = users.cols();
  auto uptr = std::make_shared<const Block>(users);
  std::vector<Handle> outs;
  outs.reserve(ratings.grid_cols());
  std::size_t c0 = 0;
  for (std::size_t bj = 0; bj < ratings.grid_cols(); ++bj) {
    std::size_t extent = ratings.block_col_extent(bj);
    auto prev =
        std::make_shared<const Block>(rows_range(items_f, c0, c0 + extent));
    c0 += extent;
    outs.push_back(rt.submit(
        "als_item",
        [uptr, prev, k, reg](const std::vector<TaskInput>& in) {
          const auto& items = in[0].items();
          auto umap = factor_map(*uptr);
          const auto ek = static_cast<Eigen::Index>(k);
          std::size_t width = payload_block(items[0]).cols();
          std::vector<Eigen::MatrixXd> A(width, Eigen::MatrixXd::Zero(ek, ek));
          std::vector<Eigen::VectorXd> rhs(width, Eigen::VectorXd::Zero(ek));
          std::vector<char> seen(width, 0);
          std::size_t off = 0;
          for (const auto& p : items) {
            const Block& b = payload_block(p);
            auto offs = b.offsets();
            auto cols = b.columns();
            auto vals = b.values();
            for (std::size_t r = 0; r < b.rows(); ++r) {
              auto u = umap.row(static_cast<Eigen::Index>(off + r));
              for (std::size_t e = offs[r]; e < offs[r + 1]; ++e) {
                A[cols[e]].noalias() += u.transpose() * u;
                rhs[cols[e]].noalias() += vals[e] * u.transpose();
                seen[cols[e]] = 1;
              }
            }
            off += b.rows();
          }
          Block out = Block::dense(width, k);
          for (std::size_t c = 0; c < width; ++c) {
            if (seen[c]) {
              ridge_solve(A[c], rhs[c], reg, out, c);
            } else {
              for (std::size_t j = 0; j < k; ++j) {
                out.dense_at(c, j) = prev->at(c, j);
              }
            }
          }
          return std::vector<Payload>{block_payload(std::move(out))};
        },
        {Arg::collection(col_handles(ratings, bj))})[0]);
  }
  std::vector<Block> parts;
  parts.reserve(outs.size());
  for (const auto& h : outs) {
    parts.push_back(payload_block(rt.fetch(h)));
  }
  return vconcat(parts);
}

// Squared error over the stored entries: one "als_rmse" task per row of
// blocks, partials summed driver-side in block-row order.
std::pair<double, std::uint64_t> measure(const DistArray& ratings,
                                         const Block& users,
                                         const Block& items_f) {
  auto& rt = ratings.runtime();
  auto uptr = std::make_shared<const Block>(users);
  auto vptr = std::make_shared<const Block>(items_f);
  std::vector<Handle> outs;
  outs.reserve(ratings.grid_rows());
  std::size_t r0 = 0;
  for (std::size_t bi = 0; bi < ratings.grid_rows(); ++bi) {
    std::size_t row_off = r0;
    r0 += ratings.block_row_extent(bi);
    outs.push_back(rt.submit(
        "als_rmse",
        [uptr, vptr, row_off](const std::vector<TaskInput>& in) {
          auto umap = factor_map(*uptr);
          auto vmap = factor_map(*vptr);
          auto out = std::make_shared<FitPartial>();
          std::size_t off = 0;
          for (const auto& p : in[0].items()) {
            const Block& b = payload_block(p);
            auto offs = b.offsets();
            auto cols = b.columns();
            auto vals = b.values();
            for (std::size_t r = 0; r < b.rows(); ++r) {
              auto u = umap.row(static_cast<Eigen::Index>(row_off + r));
              for (std::size_t e = offs[r]; e < offs[r + 1]; ++e) {
                double diff =
                    vals[e] -
                    u.dot(vmap.row(static_cast<Eigen::Index>(off + cols[e])));
                out->sse += diff * diff;
                ++out->count;
              }
            }
            off += b.cols();
          }
          return std::vector<Payload>{Payload(FitPtr(std::move(out)))};
        },
        {Arg::collection(row_handles(ratings, bi))})[0]);
  }
  double sse = 0.0;
  std::uint64_t count = 0;
  for (const auto& h : outs) {
    const auto& part = *std::any_cast<const FitPtr&>(rt.fetch(h));
    sse += part.sse;
    count += part.count;
  }
  return {sse, count};
}

double frob2(const Block& b) {
  double acc = 0.0;
  for (double v : b.dense_data()) {
    acc += v * v;
  }
  return acc;
}

} // namespace

ALSModel als_fit(const DistArray& ratings, const ALSParams& params) {
  if (!ratings.is_sparse()) {
    throw UnsupportedOperation(
        "alternating least squares requires sparse ratings");
  }
  if (params.rank == 0) {
    throw std::invalid_argument("als: rank must be at least 1");
  }
  if (!(params.regularization > 0.0)) {
    throw std::invalid_argument("als: regularization must be positive");
  }
  if (params.tol < 0.0) {
    throw std::invalid_argument("als: negative tolerance");
  }

  std::size_t n = ratings.rows();
  std::size_t m = ratings.cols();
  std::size_t k = params.rank;

  ALSModel model;
  model.params = params;

  // item factors start from the seed, user factors start at zero; the first
  // user solve reads only the item factors
  Block item_f = Block::dense(m, k);
  detail::Rng rng(detail::mix_seed(params.seed, detail::role_als_init, 0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      item_f.dense_at(i, j) = rng.unit();
    }
  }
  Block user_f = Block::dense(n, k);

  double prev_rmse = std::numeric_limits<double>::infinity();
  for (std::size_t sweep = 0; sweep < params.max_iter; ++sweep) {
    user_f = solve_users(ratings, user_f, item_f, params.regularization);
    item_f = solve_items(ratings, user_f, item_f, params.regularization);
    auto [sse, count] = measure(ratings, user_f, item_f);
    double rmse =
        count == 0 ? 0.0 : std::sqrt(sse / static_cast<double>(count));
    model.rmse_history.push_back(rmse);
    model.objective_history.push_back(
        sse + params.regularization * (frob2(user_f) + frob2(item_f)));
    model.sweeps = sweep + 1;
    if (std::abs(prev_rmse - rmse) < params.tol) {
      model.converged = true;
      break;
    }
    prev_rmse = rmse;
  }
  model.user_factors = std::move(user_f);
  model.item_factors = std::move(item_f);
  return model;
}

double als_predict(const ALSModel& model, std::size_t user, std::size_t item) {
  if (user >= model.user_factors.rows() ||
      item >= model.item_factors.rows()) {
    throw std::out_of_range("als predict: index out of range");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < model.user_factors.cols(); ++j) {
    acc += model.user_factors.at(user, j) * model.item_factors.at(item, j);
  }
  return acc;
}

DistArray als_full(TaskRuntime& rt, const ALSModel& model, BlockShape block) {
  if (model.user_factors.empty() || model.item_factors.empty()) {
    throw std::invalid_argument("als_full: model has no factors");
  }
  std::size_t k = model.user_factors.cols();
  DistArray u = DistArray::from_dense(rt, model.user_factors, {block.rows, k});
  DistArray vt =
      DistArray::from_dense(rt, transposed(model.item_factors),
                            {k, block.cols});
  return matmul(u, vt);
}

} // namespace da
