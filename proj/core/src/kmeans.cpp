#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "distarray/kmeans.hpp"
#include "rng.hpp"

namespace da {

namespace {

struct LloydPartial {
  std::vector<double> sums;          // k x n_features, row-major
  std::vector<std::uint64_t> counts; // members per center
  double inertia = 0.0;
};

using PartialPtr = std::shared_ptr<const LloydPartial>;

std::vector<Handle> row_handles(const DistArray& a, std::size_t bi) {
  std::vector<Handle> out;
  out.reserve(a.grid_cols());
  for (std::size_t j = 0; j < a.grid_cols(); ++j) {
    out.push_back(a.block_handle(bi, j));
  }
  return out;
}

// Nearest-center index per local row of one block row; the inputs are the
// column blocks left to right. Ties go to the lower center index.
std::vector<std::size_t> nearest(const std::vector<Payload>& blocks,
                                 const Block& centers,
                                 std::vector<double>& best_dist) {
  std::size_t k = centers.rows();
  std::size_t d = centers.cols();
  auto cd = centers.dense_data();
  std::size_t rows = payload_block(blocks[0]).rows();
  std::vector<double> dist(rows * k, 0.0);
  std::size_t off = 0;
  for (const auto& p : blocks) {
    const Block& b = payload_block(p);
    auto x = b.dense_data();
    std::size_t bc = b.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < bc; ++j) {
          double diff = x[r * bc + j] - cd[c * d + off + j];
          acc += diff * diff;
        }
        dist[r * k + c] += acc;
      }
    }
    off += bc;
  }
  std::vector<std::size_t> best(rows, 0);
  best_dist.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (dist[r * k + c] < dist[r * k + arg]) {
        arg = c;
      }
    }
    best[r] = arg;
    best_dist[r] = dist[r * k + arg];
  }
  return best;
}

// One data row stitched across column blocks, fetched driver-side.
std::vector<double> fetch_row(const DistArray& a, std::size_t row) {
  std::size_t bi = row / a.reg_block().rows;
  std::size_t lr = row - bi * a.reg_block().rows;
  std::vector<double> out;
  out.reserve(a.cols());
  for (std::size_t bj = 0; bj < a.grid_cols(); ++bj) {
    const Block& b = payload_block(a.runtime().fetch(a.block_handle(bi, bj)));
    for (std::size_t j = 0; j < b.cols(); ++j) {
      out.push_back(b.at(lr, j));
    }
  }
  return out;
}

Block initial_centers(const DistArray& data, const KMeansParams& p) {
  detail::Rng rng(detail::mix_seed(p.seed, detail::role_kmeans_init, 0));
  auto picks = detail::sample_distinct(p.k, data.rows(), rng);
  Block centers = Block::dense(p.k, data.cols());
  for (std::size_t c = 0; c < p.k; ++c) {
    auto row = fetch_row(data, picks[c]);
    for (std::size_t j = 0; j < row.size(); ++j) {
      centers.dense_at(c, j) = row[j];
    }
  }
  return centers;
}

// One Lloyd assignment pass: per block row a "kmeans" task produces partial
// sums/counts/inertia for the current centers, a single "kmeans_reduce" task
// folds them in block-row order. Results never depend on worker count.
LloydPartial assignment_pass(const DistArray& data, const Block& centers) {
  auto& rt = data.runtime();
  auto cptr = std::make_shared<const Block>(centers);
  std::size_t k = centers.rows();
  std::size_t d = centers.cols();
  std::vector<Handle> partials;
  partials.reserve(data.grid_rows());
  for (std::size_t bi = 0; bi < data.grid_rows(); ++bi) {
    partials.push_back(rt.submit(
        "kmeans",
        [cptr, k, d](const std::vector<TaskInput>& in) {
          const auto& items = in[0].items();
          std::vector<double> best_dist;
          auto best = nearest(items, *cptr, best_dist);
          auto out = std::make_shared<LloydPartial>();
          out->sums.assign(k * d, 0.0);
          out->counts.assign(k, 0);
          for (double v : best_dist) {
            out->inertia += v;
          }
          for (auto c : best) {
            ++out->counts[c];
          }
          std::size_t off = 0;
          for (const auto& p : items) {
            const Block& b = payload_block(p);
            auto x = b.dense_data();
            std::size_t bc = b.cols();
            for (std::size_t r = 0; r < b.rows(); ++r) {
              double* dst = out->sums.data() + best[r] * d + off;
              for (std::size_t j = 0; j < bc; ++j) {
                dst[j] += x[r * bc + j];
              }
            }
            off += bc;
          }
          return std::vector<Payload>{Payload(PartialPtr(std::move(out)))};
        },
        {Arg::collection(row_handles(data, bi))})[0]);
  }
  Handle merged = rt.submit(
      "kmeans_reduce",
      [k, d](const std::vector<TaskInput>& in) {
        auto out = std::make_shared<LloydPartial>();
        out->sums.assign(k * d, 0.0);
        out->counts.assign(k, 0);
        for (const auto& p : in[0].items()) {
          const auto& part = *std::any_cast<const PartialPtr&>(p);
          for (std::size_t i = 0; i < out->sums.size(); ++i) {
            out->sums[i] += part.sums[i];
          }
          for (std::size_t c = 0; c < k; ++c) {
            out->counts[c] += part.counts[c];
          }
          out->inertia += part.inertia;
        }
        return std::vector<Payload>{Payload(PartialPtr(std::move(out)))};
      },
      {Arg::collection(std::move(partials))})[0];
  return *std::any_cast<const PartialPtr&>(rt.fetch(merged));
}

} // namespace

KMeansModel kmeans_fit(const DistArray& data, const KMeansParams& params) {
  if (data.is_sparse()) {
    throw UnsupportedOperation("k-means requires dense storage");
  }
  if (params.k == 0) {
    throw std::invalid_argument("k-means: k must be at least 1");
  }
  if (params.k > data.rows()) {
    throw std::invalid_argument("k-means: more centers than data rows");
  }
  if (params.tol < 0.0) {
    throw std::invalid_argument("k-means: negative tolerance");
  }

  KMeansModel model;
  model.params = params;
  model.centers = initial_centers(data, params);

  std::size_t k = params.k;
  std::size_t d = data.cols();
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    LloydPartial stats = assignment_pass(data, model.centers);
    model.inertia_history.push_back(stats.inertia);

    Block next = Block::dense(k, d);
    for (std::size_t c = 0; c < k; ++c) {
      if (stats.counts[c] > 0) {
        double inv = 1.0 / static_cast<double>(stats.counts[c]);
        for (std::size_t j = 0; j < d; ++j) {
          next.dense_at(c, j) = stats.sums[c * d + j] * inv;
        }
      } else {
        // restart a starved cluster from a seeded random data row
        detail::Rng rng(detail::mix_seed(params.seed,
                                         detail::role_kmeans_reseed,
                                         iter * k + c));
        auto row = fetch_row(data, rng.bounded(data.rows()));
        for (std::size_t j = 0; j < d; ++j) {
          next.dense_at(c, j) = row[j];
        }
      }
    }

    double moved = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double diff = next.at(c, j) - model.centers.at(c, j);
        acc += diff * diff;
      }
      moved = std::max(moved, std::sqrt(acc));
    }
    model.centers = std::move(next);
    model.iterations = iter + 1;
    if (moved <= params.tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

DistArray kmeans_predict(const KMeansModel& model, const DistArray& data) {
  if (data.is_sparse()) {
    throw UnsupportedOperation("k-means requires dense storage");
  }
  if (model.centers.cols() != data.cols()) {
    throw std::invalid_argument("k-means predict: feature count mismatch");
  }
  auto& rt = data.runtime();
  auto cptr = std::make_shared<const Block>(model.centers);
  std::size_t gr = data.grid_rows();
  std::vector<std::vector<Handle>> grid(gr, std::vector<Handle>(1));
  for (std::size_t bi = 0; bi < gr; ++bi) {
    grid[bi][0] = rt.submit(
        "kmeans_predict",
        [cptr](const std::vector<TaskInput>& in) {
          std::vector<double> best_dist;
          auto best = nearest(in[0].items(), *cptr, best_dist);
          Block out = Block::dense(best.size(), 1);
          for (std::size_t r = 0; r < best.size(); ++r) {
            out.dense_at(r, 0) = static_cast<double>(best[r]);
          }
          return std::vector<Payload>{block_payload(std::move(out))};
        },
        {Arg::collection(row_handles(data, bi))})[0];
  }
  return DistArray::from_grid(rt, data.rows(), 1, {data.reg_block().rows, 1},
                              std::move(grid), false);
}

} // namespace da
