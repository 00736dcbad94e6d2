#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "distarray/block.hpp"
#include "reference.hpp"

using namespace da;
using ref::Mat;

namespace {

Block dense_from(const Mat& m) { return Block::from_rows(m); }

Block sparse_from(const Mat& m) {
  std::vector<Triplet> ts;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      if (m[i][j] != 0.0) {
        ts.push_back({i, j, m[i][j]});
      }
    }
  }
  return Block::sparse_from_triplets(m.size(), m.empty() ? 0 : m[0].size(),
                                     std::move(ts));
}

} // namespace

TEST_SUITE("block") {

TEST_CASE("dense construction and element access") {
  Block b = Block::dense(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(b.rows() == 2);
  CHECK(b.cols() == 3);
  CHECK(!b.is_sparse());
  CHECK(b.stored() == 6);
  CHECK(b.at(0, 0) == 1);
  CHECK(b.at(1, 2) == 6);
  CHECK_THROWS_AS(b.at(2, 0), std::out_of_range);
  CHECK_THROWS_AS(b.at(0, 3), std::out_of_range);
  CHECK_THROWS_AS(Block::dense(2, 3, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Block::from_rows({{1, 2}, {1}}), std::invalid_argument);

  Block id = Block::identity(3);
  CHECK(id.at(1, 1) == 1.0);
  CHECK(id.at(1, 2) == 0.0);
}

TEST_CASE("sparse construction validates CSR structure") {
  // 2x4 with entries (0,1)=5 (0,3)=2 (1,0)=7
  Block b = Block::sparse(2, 4, {0, 2, 3}, {1, 3, 0}, {5, 2, 7});
  CHECK(b.is_sparse());
  CHECK(b.stored() == 3);
  CHECK(b.at(0, 1) == 5);
  CHECK(b.at(0, 0) == 0);
  CHECK(b.at(1, 0) == 7);

  CHECK_THROWS_AS(Block::sparse(2, 4, {0, 2}, {1, 3}, {5, 2}),
                  std::invalid_argument); // offsets too short
  CHECK_THROWS_AS(Block::sparse(2, 4, {0, 2, 3}, {3, 1, 0}, {5, 2, 7}),
                  std::invalid_argument); // columns not ascending
  CHECK_THROWS_AS(Block::sparse(2, 4, {0, 2, 3}, {1, 4, 0}, {5, 2, 7}),
                  std::invalid_argument); // column out of range
  CHECK_THROWS_AS(Block::sparse(2, 4, {0, 2, 1}, {1, 3, 0}, {5, 2, 7}),
                  std::invalid_argument); // decreasing offsets
}

TEST_CASE("triplet construction keeps the last duplicate") {
  std::vector<Triplet> ts{{0, 1, 1.0}, {1, 0, 2.0}, {0, 1, 9.0}, {1, 2, 3.0}};
  Block b = Block::sparse_from_triplets(2, 3, ts);
  CHECK(b.at(0, 1) == 9.0);
  CHECK(b.at(1, 0) == 2.0);
  CHECK(b.at(1, 2) == 3.0);
  CHECK(b.stored() == 3);
  CHECK_THROWS_AS(Block::sparse_from_triplets(2, 3, {{2, 0, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("storage conversions round-trip") {
  std::mt19937_64 g(7001);
  Mat m = ref::random_sparse_mat(g, 9, 6, 0.4);
  Block d = dense_from(m);
  Block s = d.to_sparse();
  CHECK(s.is_sparse());
  CHECK(ref::exact_equal(ref::from_block(s), m));
  CHECK(ref::exact_equal(ref::from_block(s.to_dense()), m));
  std::size_t nnz = 0;
  for (const auto& row : m) {
    for (double v : row) {
      nnz += v != 0.0;
    }
  }
  CHECK(s.stored() == nnz);
  CHECK(same_values(d, s));
}

TEST_CASE("transpose matches the reference on both storages") {
  std::mt19937_64 g(7002);
  Mat m = ref::random_mat(g, 7, 5);
  CHECK(ref::exact_equal(ref::from_block(transposed(dense_from(m))),
                         ref::transpose(m)));

  Mat sm = ref::random_sparse_mat(g, 8, 11, 0.3);
  Block st = transposed(sparse_from(sm));
  CHECK(st.is_sparse());
  CHECK(ref::exact_equal(ref::from_block(st), ref::transpose(sm)));
}

TEST_CASE("unary maps match the reference") {
  std::mt19937_64 g(7003);
  Mat m = ref::random_mat(g, 4, 6, 0.1, 2.0);
  Block b = dense_from(m);
  CHECK(ref::exact_equal(ref::from_block(apply_unary(b, UnaryKind::scale, -2.5)),
                         ref::map(m, [](double v) { return v * -2.5; })));
  CHECK(ref::exact_equal(
      ref::from_block(apply_unary(b, UnaryKind::add_scalar, 3.0)),
      ref::map(m, [](double v) { return v + 3.0; })));
  CHECK(ref::exact_equal(ref::from_block(apply_unary(b, UnaryKind::power, 2.0)),
                         ref::map(m, [](double v) { return std::pow(v, 2.0); })));
  CHECK(ref::exact_equal(ref::from_block(apply_unary(b, UnaryKind::sqrt, 0.0)),
                         ref::map(m, [](double v) { return std::sqrt(v); })));
}

TEST_CASE("sparse unary maps keep sparsity or refuse to densify") {
  std::mt19937_64 g(7004);
  Mat m = ref::random_sparse_mat(g, 6, 6, 0.3);
  Block s = sparse_from(m);
  Block scaled = apply_unary(s, UnaryKind::scale, 2.0);
  CHECK(scaled.is_sparse());
  CHECK(ref::exact_equal(ref::from_block(scaled),
                         ref::map(m, [](double v) { return v * 2.0; })));
  Block squared = apply_unary(s, UnaryKind::power, 2.0);
  CHECK(squared.is_sparse());
  CHECK(squared.stored() == s.stored());
  CHECK(apply_unary(s, UnaryKind::sqrt, 0.0).is_sparse());
  CHECK(apply_unary(s, UnaryKind::add_scalar, 0.0).is_sparse());

  CHECK_THROWS_AS(apply_unary(s, UnaryKind::power, 0.0), UnsupportedOperation);
  CHECK_THROWS_AS(apply_unary(s, UnaryKind::power, -1.0), UnsupportedOperation);
  CHECK_THROWS_AS(apply_unary(s, UnaryKind::add_scalar, 0.5),
                  UnsupportedOperation);
}

TEST_CASE("binary ops match the reference for every storage pairing") {
  std::mt19937_64 g(7005);
  Mat ma = ref::random_sparse_mat(g, 5, 7, 0.5);
  Mat mb = ref::random_sparse_mat(g, 5, 7, 0.5);
  Block da_ = dense_from(ma), db = dense_from(mb);
  Block sa = sparse_from(ma), sb = sparse_from(mb);

  for (auto [op, c] : {std::pair{BinaryKind::add, '+'},
                       std::pair{BinaryKind::sub, '-'},
                       std::pair{BinaryKind::mul, '*'}}) {
    Mat want = ref::elementwise(ma, mb, c);
    CHECK(ref::exact_equal(ref::from_block(apply_binary(da_, db, op)), want));
    Block ss = apply_binary(sa, sb, op);
    CHECK(ss.is_sparse());
    CHECK(ref::exact_equal(ref::from_block(ss), want));
    Block mixed = apply_binary(sa, db, op);
    CHECK(!mixed.is_sparse());
    CHECK(ref::exact_equal(ref::from_block(mixed), want));
  }
  CHECK(apply_binary(sa, sb, BinaryKind::mul).stored() <= sa.stored());
  CHECK_THROWS_AS(apply_binary(da_, Block::dense(5, 6), BinaryKind::add),
                  std::invalid_argument);
}

TEST_CASE("reductions match the reference, dense") {
  std::mt19937_64 g(7006);
  Mat m = ref::random_mat(g, 6, 4, -1.0, 1.0);
  Block b = dense_from(m);
  for (auto [kind, c] : {std::pair{ReduceKind::sum, 's'},
                         std::pair{ReduceKind::min, 'm'},
                         std::pair{ReduceKind::max, 'x'}}) {
    Block rr = reduce_block(b, Axis::rows, kind);
    CHECK(rr.rows() == 1);
    CHECK(rr.cols() == 4);
    auto want_r = ref::reduce_rows(m, c);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(rr.at(0, j) == doctest::Approx(want_r[j]).epsilon(1e-12));
    }
    Block rc = reduce_block(b, Axis::cols, kind);
    CHECK(rc.rows() == 6);
    CHECK(rc.cols() == 1);
    auto want_c = ref::reduce_cols(m, c);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(rc.at(i, 0) == doctest::Approx(want_c[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sparse reductions account for implicit zeros") {
  // entries: (0,0)=5 (0,2)=-2 (1,1)=3; everything else implicit zero
  Block s = Block::sparse(2, 3, {0, 2, 3}, {0, 2, 1}, {5, -2, 3});
  Block mn = reduce_block(s, Axis::rows, ReduceKind::min);
  CHECK(mn.at(0, 0) == 0.0);
  CHECK(mn.at(0, 1) == 0.0);
  CHECK(mn.at(0, 2) == -2.0);
  Block mx = reduce_block(s, Axis::rows, ReduceKind::max);
  CHECK(mx.at(0, 0) == 5.0);
  CHECK(mx.at(0, 1) == 3.0);
  CHECK(mx.at(0, 2) == 0.0);
  Block sum = reduce_block(s, Axis::rows, ReduceKind::sum);
  CHECK(sum.at(0, 0) == 5.0);
  CHECK(sum.at(0, 1) == 3.0);
  CHECK(sum.at(0, 2) == -2.0);

  Block mc = reduce_block(s, Axis::cols, ReduceKind::min);
  CHECK(mc.at(0, 0) == -2.0);
  CHECK(mc.at(1, 0) == 0.0);

  // a fully stored row has no implicit zero to fold in
  Block full = Block::sparse(1, 2, {0, 2}, {0, 1}, {4, 9});
  CHECK(reduce_block(full, Axis::cols, ReduceKind::min).at(0, 0) == 4.0);
}

TEST_CASE("partial combination folds like the global reduction") {
  std::mt19937_64 g(7007);
  Mat top = ref::random_mat(g, 3, 5, -2.0, 2.0);
  Mat bot = ref::random_mat(g, 4, 5, -2.0, 2.0);
  Mat whole = top;
  whole.insert(whole.end(), bot.begin(), bot.end());
  for (auto [kind, c] : {std::pair{ReduceKind::sum, 's'},
                         std::pair{ReduceKind::min, 'm'},
                         std::pair{ReduceKind::max, 'x'}}) {
    Block combined =
        combine_partials(reduce_block(dense_from(top), Axis::rows, kind),
                         reduce_block(dense_from(bot), Axis::rows, kind), kind);
    auto want = ref::reduce_rows(whole, c);
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(combined.at(0, j) == doctest::Approx(want[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("range and row selection match reference slices") {
  std::mt19937_64 g(7008);
  Mat m = ref::random_sparse_mat(g, 9, 7, 0.5);
  for (Block b : {dense_from(m), sparse_from(m)}) {
    CHECK(ref::exact_equal(ref::from_block(rows_range(b, 2, 6)),
                           ref::slice(m, 2, 6, 0, 7)));
    CHECK(ref::exact_equal(ref::from_block(cols_range(b, 1, 5)),
                           ref::slice(m, 0, 9, 1, 5)));
    CHECK(rows_range(b, 4, 4).rows() == 0);
    CHECK_THROWS_AS(rows_range(b, 3, 10), std::out_of_range);
    CHECK_THROWS_AS(cols_range(b, 5, 2), std::out_of_range);

    std::vector<std::size_t> idx{8, 0, 3, 3, 5};
    CHECK(ref::exact_equal(ref::from_block(take_rows(b, idx)),
                           ref::pick_rows(m, idx)));
    std::vector<std::size_t> bad{9};
    CHECK_THROWS_AS(take_rows(b, bad), std::out_of_range);
  }
}

TEST_CASE("concatenation rebuilds the original matrix") {
  std::mt19937_64 g(7009);
  Mat m = ref::random_sparse_mat(g, 8, 10, 0.4);
  for (Block b : {dense_from(m), sparse_from(m)}) {
    std::vector<Block> rows_parts{rows_range(b, 0, 3), rows_range(b, 3, 3),
                                  rows_range(b, 3, 8)};
    CHECK(ref::exact_equal(ref::from_block(vconcat(rows_parts)), m));
    std::vector<Block> cols_parts{cols_range(b, 0, 4), cols_range(b, 4, 10)};
    CHECK(ref::exact_equal(ref::from_block(hconcat(cols_parts)), m));
  }
  std::vector<Block> mixed{Block::dense(2, 2), Block::identity(2).to_sparse()};
  CHECK_THROWS_AS(vconcat(mixed), std::invalid_argument);
  std::vector<Block> ragged{Block::dense(2, 2), Block::dense(2, 3)};
  CHECK_THROWS_AS(vconcat(ragged), std::invalid_argument);
  CHECK_THROWS_AS(hconcat(std::vector<Block>{}), std::invalid_argument);
}

TEST_CASE("row assembly from several sources") {
  std::mt19937_64 g(7010);
  Mat a = ref::random_sparse_mat(g, 4, 5, 0.6);
  Mat b = ref::random_sparse_mat(g, 3, 5, 0.6);
  std::vector<std::pair<std::size_t, std::size_t>> picks{
      {1, 2}, {0, 0}, {0, 3}, {1, 2}};
  Mat want{b[2], a[0], a[3], b[2]};
  std::vector<Block> dense_src{dense_from(a), dense_from(b)};
  CHECK(ref::exact_equal(ref::from_block(assemble_rows(dense_src, picks)),
                         want));
  std::vector<Block> sparse_src{sparse_from(a), sparse_from(b)};
  Block got = assemble_rows(sparse_src, picks);
  CHECK(got.is_sparse());
  CHECK(ref::exact_equal(ref::from_block(got), want));
  std::vector<std::pair<std::size_t, std::size_t>> bad{{0, 4}};
  CHECK_THROWS_AS(assemble_rows(dense_src, bad), std::out_of_range);
}

TEST_CASE("product accumulation is exact for every storage pairing") {
  std::mt19937_64 g(7011);
  Mat ma = ref::random_sparse_mat(g, 4, 6, 0.6);
  Mat mb = ref::random_sparse_mat(g, 6, 5, 0.6);
  Mat want = ref::matmul(ma, mb);
  for (Block a : {dense_from(ma), sparse_from(ma)}) {
    for (Block b : {dense_from(mb), sparse_from(mb)}) {
      std::vector<double> acc(4 * 5, 0.0);
      add_product(a, b, acc);
      // positive data, so skipping structural zeros cannot change the bits
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
          CHECK(acc[i * 5 + j] == want[i][j]);
        }
      }
    }
  }
  std::vector<double> acc(4 * 5, 0.0);
  CHECK_THROWS_AS(add_product(dense_from(ma), dense_from(ma), acc),
                  std::invalid_argument);
}

} // TEST_SUITE
