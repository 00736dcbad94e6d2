#include <doctest.h>

#include <random>
#include <vector>

#include "distarray/dataset.hpp"
#include "distarray/dist_array.hpp"
#include "reference.hpp"

using namespace da;
using ref::Mat;

namespace {

Mat with_label_column(const Mat& samples, const Mat& labels) {
  Mat out = samples;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].push_back(labels[i][0]);
  }
  return out;
}

} // namespace

TEST_SUITE("baseline") {

TEST_CASE("from_dense cuts row partitions of the requested size") {
  TaskRuntime rt(2);
  std::mt19937_64 g(300);
  Mat m = ref::random_mat(g, 11, 4);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m), 4);
  CHECK(d.subset_count() == 3);
  CHECK(d.n_features() == 4);
  CHECK(d.total_rows() == 11);
  CHECK(!d.has_labels());
  CHECK(d.subset_size(0) == 4);
  CHECK(d.subset_size(1) == 4);
  CHECK(d.subset_size(2) == 3);
  CHECK_THROWS_AS(d.subset_size(3), std::out_of_range);
  CHECK(ref::exact_equal(ref::from_block(d.collect_samples()), m));
  CHECK(rt.stats().submitted_for("dataset_from_dense") == 3);
  CHECK_THROWS_AS(d.collect_labels(), std::logic_error);
}

TEST_CASE("from_dense with labels keeps them aligned") {
  TaskRuntime rt(2);
  std::mt19937_64 g(301);
  Mat m = ref::random_mat(g, 9, 3);
  Mat y = ref::random_mat(g, 9, 1);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m),
                                              Block::from_rows(y), 2);
  CHECK(d.subset_count() == 5);
  CHECK(d.has_labels());
  CHECK(ref::exact_equal(ref::from_block(d.collect_samples()), m));
  CHECK(ref::exact_equal(ref::from_block(d.collect_labels()), y));
}

TEST_CASE("from_dense validates its inputs") {
  TaskRuntime rt(1);
  Block m = Block::dense(4, 2);
  CHECK_THROWS_AS(SubsetDataset::from_dense(rt, m, 0), std::invalid_argument);
  CHECK_THROWS_AS(SubsetDataset::from_dense(rt, m, 5), std::invalid_argument);
  CHECK_THROWS_AS(SubsetDataset::from_dense(rt, Block::dense(0, 0), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(SubsetDataset::from_dense(rt, m, Block::dense(3, 1), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(SubsetDataset::from_dense(rt, m, Block::dense(4, 2), 2),
                  std::invalid_argument);
}

TEST_CASE("append is metadata-only and validates compatibility") {
  TaskRuntime rt(1);
  std::mt19937_64 g(302);
  Mat m = ref::random_mat(g, 6, 3);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m), 3);
  rt.barrier();
  rt.reset_stats();

  Mat extra = ref::random_mat(g, 2, 3);
  SubsetDataset grown = d.append(make_subset(rt, Block::from_rows(extra)));
  CHECK(grown.subset_count() == 3);
  CHECK(grown.total_rows() == 8);
  CHECK(d.subset_count() == 2); // original untouched
  CHECK(rt.stats().total_submitted() == 0);

  Mat want = m;
  want.insert(want.end(), extra.begin(), extra.end());
  CHECK(ref::exact_equal(ref::from_block(grown.collect_samples()), want));

  CHECK_THROWS_AS(d.append(make_subset(rt, Block::dense(2, 4))),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      d.append(make_subset(rt, Block::dense(2, 3), Block::dense(2, 1))),
      std::invalid_argument);
}

TEST_CASE("transpose produces the feature-major matrix in N^2 + N tasks") {
  TaskRuntime rt(3);
  std::mt19937_64 g(303);
  Mat m = ref::random_mat(g, 10, 7);
  Mat y = ref::random_mat(g, 10, 1);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m),
                                              Block::from_rows(y), 3);
  std::size_t n = d.subset_count();
  REQUIRE(n == 4);
  rt.barrier();
  rt.reset_stats();
  SubsetDataset t = d.transpose();
  CHECK(rt.stats().submitted_for("dataset_transpose") == n * n + n);
  CHECK(t.subset_count() == n);
  CHECK(t.n_features() == 10);
  CHECK(t.total_rows() == 7);
  CHECK(!t.has_labels()); // labels do not survive a transpose
  CHECK(ref::exact_equal(ref::from_block(t.collect_samples()),
                         ref::transpose(m)));
  // feature stripes are ceil-divided: 2,2,2,1
  CHECK(t.subset_size(0) == 2);
  CHECK(t.subset_size(3) == 1);
}

TEST_CASE("transpose of a transpose restores the sample matrix") {
  TaskRuntime rt(2);
  std::mt19937_64 g(304);
  Mat m = ref::random_mat(g, 8, 8);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m), 3);
  CHECK(ref::exact_equal(ref::from_block(d.transpose().transpose().collect_samples()),
                         m));
}

TEST_CASE("shuffle with enough rows per subset preserves partition sizes") {
  TaskRuntime rt(3);
  std::mt19937_64 g(305);
  Mat m = ref::random_mat(g, 20, 3);
  Mat y = ref::random_mat(g, 20, 1);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m),
                                              Block::from_rows(y), 5);
  std::size_t n = d.subset_count();
  REQUIRE(n == 4);
  rt.barrier();
  rt.reset_stats();
  SubsetDataset sh = d.shuffle(21);
  // every subset sends one bundle to all four destinations, plus one merge
  // per destination
  CHECK(rt.stats().submitted_for("dataset_shuffle") == n * n + n);
  CHECK(sh.subset_count() == n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(sh.subset_size(i) == d.subset_size(i));
  }
  Mat got = ref::from_block(sh.collect_samples());
  CHECK(!ref::exact_equal(got, m));
  // sample rows and their labels travel together
  Mat got_pairs =
      with_label_column(got, ref::from_block(sh.collect_labels()));
  CHECK(ref::exact_equal(ref::sorted_rows(got_pairs),
                         ref::sorted_rows(with_label_column(m, y))));
}

TEST_CASE("shuffle matches the blocked array row for row") {
  // identical partition sizes and seed must move identical rows to
  // identical slots in both structures
  std::mt19937_64 g(306);
  Mat m = ref::random_mat(g, 20, 3);
  for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
    TaskRuntime rt(2);
    SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m), 5);
    DistArray a = DistArray::from_dense(rt, Block::from_rows(m), {5, 3});
    Mat from_dataset = ref::from_block(d.shuffle(seed).collect_samples());
    Mat from_array = ref::from_block(a.shuffle_rows(seed).collect());
    CHECK(ref::exact_equal(from_dataset, from_array));
  }
}

TEST_CASE("shuffle is reproducible and seed-sensitive") {
  std::mt19937_64 g(307);
  Mat m = ref::random_mat(g, 18, 2);
  Mat first;
  for (unsigned workers : {1u, 4u}) {
    TaskRuntime rt(workers);
    SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m), 6);
    Mat got = ref::from_block(d.shuffle(5).collect_samples());
    if (first.empty()) {
      first = got;
    } else {
      CHECK(ref::exact_equal(first, got));
    }
  }
  TaskRuntime rt(2);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m), 6);
  CHECK(!ref::exact_equal(first,
                          ref::from_block(d.shuffle(6).collect_samples())));
}

TEST_CASE("shuffle with fewer rows than subsets spreads what it has") {
  TaskRuntime rt(2);
  std::mt19937_64 g(308);
  Mat m = ref::random_mat(g, 12, 3); // 6 subsets of 2 rows, 2 < 6
  Mat y = ref::random_mat(g, 12, 1);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m),
                                              Block::from_rows(y), 2);
  std::size_t n = d.subset_count();
  REQUIRE(n == 6);
  rt.barrier();
  rt.reset_stats();
  SubsetDataset sh = d.shuffle(9);
  // each source reaches min(6, 2) = 2 distinct destinations
  CHECK(rt.stats().submitted_for("dataset_shuffle") == n * 2 + n);
  CHECK(sh.subset_count() == n);
  CHECK(sh.total_rows() == 12);
  Mat got_pairs = with_label_column(ref::from_block(sh.collect_samples()),
                                    ref::from_block(sh.collect_labels()));
  CHECK(ref::exact_equal(ref::sorted_rows(got_pairs),
                         ref::sorted_rows(with_label_column(m, y))));
}

TEST_CASE("shuffle survives a destination no source selected") {
  TaskRuntime rt(2);
  std::mt19937_64 g(311);
  Mat m = ref::random_mat(g, 2, 3); // 2 subsets of 1 row; each feeds 1 dest
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m), 1);
  REQUIRE(d.subset_count() == 2);
  // with one destination per source, some seed routes both rows to the
  // same subset and leaves the other empty
  bool starved_seen = false;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    rt.reset_stats();
    SubsetDataset sh = d.shuffle(seed);
    CHECK(rt.stats().submitted_for("dataset_shuffle") == 2 * 1 + 2);
    CHECK(sh.subset_count() == 2);
    CHECK(sh.total_rows() == 2);
    starved_seen = starved_seen ||
                   sh.subset_size(0) == 0 || sh.subset_size(1) == 0;
    CHECK(ref::exact_equal(ref::sorted_rows(ref::from_block(sh.collect_samples())),
                           ref::sorted_rows(m)));
  }
  CHECK(starved_seen);
}

TEST_CASE("feature extremes combine partials from every subset") {
  TaskRuntime rt(2);
  std::mt19937_64 g(309);
  Mat m = ref::random_mat(g, 14, 5, -3.0, 3.0);
  SubsetDataset d = SubsetDataset::from_dense(rt, Block::from_rows(m), 4);
  rt.barrier();
  rt.reset_stats();
  auto [lo, hi] = d.minmax_features();
  CHECK(rt.stats().submitted_for("dataset_minmax") == d.subset_count() + 1);
  CHECK(lo.rows() == 1);
  CHECK(lo.cols() == 5);
  auto want_lo = ref::reduce_rows(m, 'm');
  auto want_hi = ref::reduce_rows(m, 'x');
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(lo.at(0, j) == want_lo[j]);
    CHECK(hi.at(0, j) == want_hi[j]);
  }
}

} // TEST_SUITE
