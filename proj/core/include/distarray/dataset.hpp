#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "distarray/block.hpp"
#include "distarray/task_runtime.hpp"

namespace da {

/// One row partition of a SubsetDataset: a samples block and, optionally, a
/// column of labels aligned with it.
struct Subset {
  Handle samples;
  std::optional<Handle> labels;
  std::size_t rows = 0;
  std::size_t n_features = 0;
};

Subset make_subset(TaskRuntime& rt, Block samples);
Subset make_subset(TaskRuntime& rt, Block samples, Block labels);

/// Ordered list of row partitions sharing one feature count. Unlike the
/// blocked array there is no column tiling: a subset always carries whole
/// rows. Values are immutable; every operation builds a new dataset.
class SubsetDataset {
public:
  /// Cuts a matrix into ceil(rows / subset_rows) subsets of subset_rows
  /// rows each (the last may be shorter). One packaging task per subset.
  static SubsetDataset from_dense(TaskRuntime& rt, const Block& samples,
                                  std::size_t subset_rows);
  static SubsetDataset from_dense(TaskRuntime& rt, const Block& samples,
                                  const Block& labels,
                                  std::size_t subset_rows);

  std::size_t subset_count() const noexcept { return subsets_.size(); }
  std::size_t n_features() const noexcept { return n_features_; }
  bool has_labels() const noexcept { return labeled_; }
  std::size_t total_rows() const noexcept;
  const Subset& subset(std::size_t i) const;
  std::size_t subset_size(std::size_t i) const;
  TaskRuntime& runtime() const noexcept { return *rt_; }

  /// Metadata-only; the appended subset must match on feature count and
  /// label presence.
  SubsetDataset append(const Subset& s) const;

  /// Feature-major view of the samples: with N subsets, each subset's
  /// feature stripe is cut N ways (N^2 tasks) and the stripes are merged
  /// into N new subsets (N more tasks). Labels do not survive.
  SubsetDataset transpose() const;

  /// Random row redistribution. Every source subset sends one bundle to
  /// each of min(subset_count, its rows) destinations, then each
  /// destination merges what it received under its own seeded permutation.
  SubsetDataset shuffle(std::uint64_t seed) const;

  /// Per-feature minima and maxima as two 1 x n_features blocks.
  std::pair<Block, Block> minmax_features() const;

  Block collect_samples() const;
  Block collect_labels() const;

private:
  SubsetDataset(TaskRuntime& rt, std::size_t n_features, bool labeled,
                std::vector<Subset> subsets);

  TaskRuntime* rt_ = nullptr;
  std::size_t n_features_ = 0;
  bool labeled_ = false;
  std::vector<Subset> subsets_;
};

} // namespace da
