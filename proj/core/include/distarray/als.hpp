#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "distarray/dist_array.hpp"

namespace da {

struct ALSParams {
  std::size_t rank = 8;
  double regularization = 0.1;
  std::size_t max_iter = 50; // full sweeps
  /// Converged when the observed-entry RMSE changes by less than this
  /// between consecutive sweeps.
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

struct ALSModel {
  ALSParams params;
  Block user_factors; // n_users x rank, dense
  Block item_factors; // n_items x rank, dense
  std::size_t sweeps = 0;
  bool converged = false;
  /// Observed-entry RMSE after each full sweep.
  std::vector<double> rmse_history;
  /// sum of squared errors + regularization * (|U|_F^2 + |V|_F^2) after
  /// each full sweep; never increases.
  std::vector<double> objective_history;
};

/// Alternating ridge regressions over the stored entries of a sparse
/// ratings matrix (users x items; a stored zero counts as an observed
/// rating of zero). Each sweep solves all users, then all items, then
/// measures the fit: one "als_user" task per row of blocks, one "als_item"
/// task per column of blocks, one "als_rmse" task per row of blocks, each
/// solving rank x rank normal equations per user/item. Item solves walk the
/// CSR column stripes directly, so no transposed copy of the ratings is
/// ever materialized. Users or items without any stored rating keep their
/// previous factors.
ALSModel als_fit(const DistArray& ratings, const ALSParams& params);

/// Predicted rating for one (user, item) pair.
double als_predict(const ALSModel& model, std::size_t user, std::size_t item);

/// Dense n_users x n_items reconstruction of the full ratings matrix,
/// tiled to the given block shape.
DistArray als_full(TaskRuntime& rt, const ALSModel& model, BlockShape block);

} // namespace da
