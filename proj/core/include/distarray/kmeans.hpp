#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "distarray/dist_array.hpp"

namespace da {

struct KMeansParams {
  std::size_t k = 2;
  std::size_t max_iter = 100;
  /// Converged when no center moves farther than this (L2) in one update.
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct KMeansModel {
  KMeansParams params;
  Block centers; // k x n_features, dense
  std::size_t iterations = 0;
  bool converged = false;
  /// Sum of squared distances to the nearest center, one value per
  /// iteration, measured against the centers that iteration started with.
  std::vector<double> inertia_history;
};

/// Lloyd iterations over a blocked dense array. Starting centers are k
/// distinct rows drawn from the data by seed. Each iteration runs one
/// "kmeans" task per row of blocks (partial sums, counts, inertia) and one
/// "kmeans_reduce" task folding the partials; the centers update happens
/// driver-side. Distance ties pick the lowest center index; a cluster left
/// without members is restarted from a seeded random data row. Results
/// depend only on data, parameters, and the partials fold order, never on
/// worker count.
KMeansModel kmeans_fit(const DistArray& data, const KMeansParams& params);

/// Nearest-center index for every row, as an n x 1 array (one
/// "kmeans_predict" task per row of blocks).
DistArray kmeans_predict(const KMeansModel& model, const DistArray& data);

} // namespace da
