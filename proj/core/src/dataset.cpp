#include "distarray/dataset.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <string>

#include "distarray/dist_array.hpp"
#include "rng.hpp"

namespace da {

namespace {

std::size_t div_up(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

using IndexList = std::vector<std::size_t>;
using IndexListPtr = std::shared_ptr<const IndexList>;

} // namespace

Subset make_subset(TaskRuntime& rt, Block samples) {
  Subset s;
  s.rows = samples.rows();
  s.n_features = samples.cols();
  s.samples = rt.put(block_payload(std::move(samples)));
  return s;
}

Subset make_subset(TaskRuntime& rt, Block samples, Block labels) {
  if (labels.rows() != samples.rows() || labels.cols() != 1) {
    throw std::invalid_argument(
        "make_subset: labels must be a column aligned with the samples");
  }
  Subset s = make_subset(rt, std::move(samples));
  s.labels = rt.put(block_payload(std::move(labels)));
  return s;
}

SubsetDataset::SubsetDataset(TaskRuntime& rt, std::size_t n_features,
                             bool labeled, std::vector<Subset> subsets)
    : rt_(&rt), n_features_(n_features), labeled_(labeled),
      subsets_(std::move(subsets)) {}

std::size_t SubsetDataset::total_rows() const noexcept {
  std::size_t n = 0;
  for (const auto& s : subsets_) {
    n += s.rows;
  }
  return n;
}

const Subset& SubsetDataset::subset(std::size_t i) const {
  if (i >= subsets_.size()) {
    throw std::out_of_range("subset: index out of range");
  }
  return subsets_[i];
}

std::size_t SubsetDataset::subset_size(std::size_t i) const {
  return subset(i).rows;
}

SubsetDataset SubsetDataset::from_dense(TaskRuntime& rt, const Block& samples,
                                        std::size_t subset_rows) {
  if (samples.rows() == 0 || samples.cols() == 0) {
    throw std::invalid_argument("from_dense: samples must not be empty");
  }
  if (subset_rows == 0 || subset_rows > samples.rows()) {
    throw std::invalid_argument("from_dense: bad subset size");
  }
  std::size_t n = div_up(samples.rows(), subset_rows);
  std::vector<Subset> subsets;
  subsets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r0 = i * subset_rows;
    std::size_t r1 = std::min(samples.rows(), r0 + subset_rows);
    Block piece = rows_range(samples, r0, r1);
    Subset s;
    s.rows = r1 - r0;
    s.n_features = samples.cols();
    auto out = rt.submit(
        "dataset_from_dense",
        [](const std::vector<TaskInput>& in) {
          return std::vector<Payload>{in[0].value()};
        },
        {Arg::value(block_payload(std::move(piece)))});
    s.samples = out[0];
    subsets.push_back(std::move(s));
  }
  return SubsetDataset(rt, samples.cols(), false, std::move(subsets));
}

SubsetDataset SubsetDataset::from_dense(TaskRuntime& rt, const Block& samples,
                                        const Block& labels,
                                        std::size_t subset_rows) {
  if (samples.rows() == 0 || samples.cols() == 0) {
    throw std::invalid_argument("from_dense: samples must not be empty");
  }
  if (labels.rows() != samples.rows() || labels.cols() != 1) {
    throw std::invalid_argument(
        "from_dense: labels must be a column aligned with the samples");
  }
  if (subset_rows == 0 || subset_rows > samples.rows()) {
    throw std::invalid_argument("from_dense: bad subset size");
  }
  std::size_t n = div_up(samples.rows(), subset_rows);
  std::vector<Subset> subsets;
  subsets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r0 = i * subset_rows;
    std::size_t r1 = std::min(samples.rows(), r0 + subset_rows);
    Subset s;
    s.rows = r1 - r0;
    s.n_features = samples.cols();
    auto out = rt.submit(
        "dataset_from_dense",
        [](const std::vector<TaskInput>& in) {
          return std::vector<Payload>{in[0].value(), in[1].value()};
        },
        {Arg::value(block_payload(rows_range(samples, r0, r1))),
         Arg::value(block_payload(rows_range(labels, r0, r1)))},
        2);
    s.samples = out[0];
    s.labels = out[1];
    subsets.push_back(std::move(s));
  }
  return SubsetDataset(rt, samples.cols(), true, std::move(subsets));
}

SubsetDataset SubsetDataset::append(const Subset& s) const {
  if (s.n_features != n_features_) {
    throw std::invalid_argument("append: feature count mismatch");
  }
  if (s.labels.has_value() != labeled_) {
    throw std::invalid_argument("append: label presence mismatch");
  }
  if (!s.samples.valid() || (labeled_ && !s.labels->valid())) {
    throw std::invalid_argument("append: invalid subset handles");
  }
  std::vector<Subset> subsets = subsets_;
  subsets.push_back(s);
  return SubsetDataset(*rt_, n_features_, labeled_, std::move(subsets));
}

SubsetDataset SubsetDataset::transpose() const {
  std::size_t n = subsets_.size();
  std::size_t m = n_features_;
  std::size_t group = div_up(m, n);
  std::size_t rows_total = total_rows();

  // split phase: one task per (source subset, feature group)
  std::vector<std::vector<Handle>> parts(n); // parts[group][source]
  for (auto& p : parts) {
    p.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t c0 = std::min(m, j * group);
      std::size_t c1 = std::min(m, c0 + group);
      parts[j][i] = rt_->submit(
          "dataset_transpose",
          [c0, c1](const std::vector<TaskInput>& in) {
            const Block& samples = payload_block(in[0].value());
            return std::vector<Payload>{
                block_payload(transposed(cols_range(samples, c0, c1)))};
          },
          {Arg::handle(subsets_[i].samples)})[0];
    }
  }

  // merge phase: one task per feature group
  std::vector<Subset> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t c0 = std::min(m, j * group);
    std::size_t c1 = std::min(m, c0 + group);
    Subset s;
    s.rows = c1 - c0;
    s.n_features = rows_total;
    s.samples = rt_->submit(
        "dataset_transpose",
        [](const std::vector<TaskInput>& in) {
          std::vector<Block> blocks;
          blocks.reserve(in[0].items().size());
          for (const auto& p : in[0].items()) {
            blocks.push_back(payload_block(p));
          }
          return std::vector<Payload>{block_payload(hconcat(blocks))};
        },
        {Arg::collection(parts[j])})[0];
    out.push_back(std::move(s));
  }
  return SubsetDataset(*rt_, rows_total, false, std::move(out));
}

SubsetDataset SubsetDataset::shuffle(std::uint64_t seed) const {
  std::size_t n = subsets_.size();
  std::vector<std::size_t> sizes(n);
  std::size_t min_size = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < n; ++i) {
    sizes[i] = subsets_[i].rows;
    min_size = std::min(min_size, sizes[i]);
  }
  bool quota_mode = min_size >= n;

  // per source: the destinations it feeds and the local row indices bound
  // for each, derived only from (seed, source index)
  std::vector<std::vector<std::size_t>> dests(n);
  std::vector<std::vector<IndexList>> chunks(n);
  if (quota_mode) {
    auto quota = detail::shuffle_quotas(sizes, seed);
    for (std::size_t i = 0; i < n; ++i) {
      detail::Rng rng(detail::mix_seed(seed, detail::role_shuffle_split, i));
      auto perm = detail::permutation(sizes[i], rng);
      dests[i].resize(n);
      chunks[i].resize(n);
      std::size_t pos = 0;
      for (std::size_t d = 0; d < n; ++d) {
        dests[i][d] = d;
        chunks[i][d].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                            perm.begin() +
                                static_cast<std::ptrdiff_t>(pos + quota[i][d]));
        pos += quota[i][d];
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t fan = std::min(n, sizes[i]);
      detail::Rng dest_rng(
          detail::mix_seed(seed, detail::role_shuffle_dest, i));
      dests[i] = detail::sample_distinct(fan, n, dest_rng);
      detail::Rng rng(detail::mix_seed(seed, detail::role_shuffle_split, i));
      auto perm = detail::permutation(sizes[i], rng);
      chunks[i].resize(fan);
      for (std::size_t r = 0; r < perm.size(); ++r) {
        chunks[i][r % fan].push_back(perm[r]);
      }
    }
  }

  // split phase: one task per (source, destination) pair, empty bundles
  // included so the task shape depends only on the partitioning
  std::vector<std::vector<Handle>> sample_parts(n); // [dest][arrival order]
  std::vector<std::vector<Handle>> label_parts(n);
  std::vector<std::vector<std::size_t>> arrival_rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < dests[i].size(); ++t) {
      std::size_t d = dests[i][t];
      auto rows = std::make_shared<const IndexList>(chunks[i][t]);
      std::vector<Arg> args{Arg::handle(subsets_[i].samples)};
      if (labeled_) {
        args.push_back(Arg::handle(*subsets_[i].labels));
      }
      auto out = rt_->submit(
          "dataset_shuffle",
          [rows](const std::vector<TaskInput>& in) {
            std::vector<Payload> outs;
            for (const auto& input : in) {
              outs.push_back(block_payload(
                  take_rows(payload_block(input.value()), *rows)));
            }
            return outs;
          },
          std::move(args), labeled_ ? 2 : 1);
      sample_parts[d].push_back(out[0]);
      if (labeled_) {
        label_parts[d].push_back(out[1]);
      }
      arrival_rows[d].push_back(chunks[i][t].size());
    }
  }

  // merge phase: one task per destination
  std::vector<Subset> result;
  result.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    std::size_t incoming = 0;
    for (auto r : arrival_rows[d]) {
      incoming += r;
    }
    std::uint64_t merge_seed =
        detail::mix_seed(seed, detail::role_shuffle_merge, d);
    Subset s;
    s.rows = incoming;
    s.n_features = n_features_;
    std::size_t nf = n_features_;
    auto merge_fn = [merge_seed, nf](const std::vector<TaskInput>& in) {
      // a destination no source selected still gets its merge task; it
      // yields an empty subset
      if (in[0].items().empty()) {
        std::vector<Payload> outs;
        outs.push_back(block_payload(Block::dense(0, nf)));
        if (in.size() > 1) {
          outs.push_back(block_payload(Block::dense(0, 1)));
        }
        return outs;
      }
      std::vector<Block> samples;
      samples.reserve(in[0].items().size());
      for (const auto& p : in[0].items()) {
        samples.push_back(payload_block(p));
      }
      Block bundle = vconcat(samples);
      detail::Rng rng(merge_seed);
      auto perm = detail::permutation(bundle.rows(), rng);
      std::vector<Payload> outs;
      outs.push_back(block_payload(take_rows(bundle, perm)));
      if (in.size() > 1) {
        std::vector<Block> labels;
        labels.reserve(in[1].items().size());
        for (const auto& p : in[1].items()) {
          labels.push_back(payload_block(p));
        }
        outs.push_back(block_payload(take_rows(vconcat(labels), perm)));
      }
      return outs;
    };
    std::vector<Arg> args{Arg::collection(sample_parts[d])};
    if (labeled_) {
      args.push_back(Arg::collection(label_parts[d]));
    }
    auto out = rt_->submit("dataset_shuffle", merge_fn, std::move(args),
                           labeled_ ? 2 : 1);
    s.samples = out[0];
    if (labeled_) {
      s.labels = out[1];
    }
    result.push_back(std::move(s));
  }
  return SubsetDataset(*rt_, n_features_, labeled_, std::move(result));
}

std::pair<Block, Block> SubsetDataset::minmax_features() const {
  std::size_t n = subsets_.size();
  std::vector<Handle> mins;
  std::vector<Handle> maxes;
  mins.reserve(n);
  maxes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto out = rt_->submit(
        "dataset_minmax",
        [](const std::vector<TaskInput>& in) {
          const Block& samples = payload_block(in[0].value());
          return std::vector<Payload>{
              block_payload(reduce_block(samples, Axis::rows, ReduceKind::min)),
              block_payload(
                  reduce_block(samples, Axis::rows, ReduceKind::max))};
        },
        {Arg::handle(subsets_[i].samples)}, 2);
    mins.push_back(out[0]);
    maxes.push_back(out[1]);
  }
  auto merged = rt_->submit(
      "dataset_minmax",
      [](const std::vector<TaskInput>& in) {
        auto fold = [](const std::vector<Payload>& parts, ReduceKind kind) {
          Block acc = payload_block(parts[0]);
          for (std::size_t k = 1; k < parts.size(); ++k) {
            acc = combine_partials(acc, payload_block(parts[k]), kind);
          }
          return acc;
        };
        return std::vector<Payload>{
            block_payload(fold(in[0].items(), ReduceKind::min)),
            block_payload(fold(in[1].items(), ReduceKind::max))};
      },
      {Arg::collection(std::move(mins)), Arg::collection(std::move(maxes))},
      2);
  Block lo = payload_block(rt_->fetch(merged[0]));
  Block hi = payload_block(rt_->fetch(merged[1]));
  return {lo, hi};
}

Block SubsetDataset::collect_samples() const {
  std::vector<Block> blocks;
  blocks.reserve(subsets_.size());
  for (const auto& s : subsets_) {
    blocks.push_back(payload_block(rt_->fetch(s.samples)));
  }
  return vconcat(blocks);
}

Block SubsetDataset::collect_labels() const {
  if (!labeled_) {
    throw std::logic_error("collect_labels: dataset has no labels");
  }
  std::vector<Block> blocks;
  blocks.reserve(subsets_.size());
  for (const auto& s : subsets_) {
    blocks.push_back(payload_block(rt_->fetch(*s.labels)));
  }
  return vconcat(blocks);
}

} // namespace da
