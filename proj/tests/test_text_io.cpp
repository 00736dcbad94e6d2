#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "distarray/dist_array.hpp"
#include "distarray/text_io.hpp"
#include "reference.hpp"

using namespace da;

namespace {

// scratch files land in the test working directory and are removed on scope
// exit
struct TempFile {
  std::string path;
  explicit TempFile(std::string name) : path(std::move(name)) {}
  ~TempFile() { std::remove(path.c_str()); }

  void write(const std::string& text) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
  }

  std::string read() const {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
  }
};

} // namespace

TEST_SUITE("io") {

TEST_CASE("save then load reproduces the array bit for bit") {
  TaskRuntime rt(2);
  std::mt19937_64 g(31);
  auto m = ref::random_mat(g, 23, 7, -5.0, 5.0);
  m[0][0] = 0.1;
  m[1][1] = 1.0 / 3.0;
  m[2][2] = 1e-300;
  m[3][3] = -1e300;
  m[4][4] = 0.0;
  auto a = DistArray::from_dense(rt, Block::from_rows(m), {5, 3});

  TempFile f("io_roundtrip.csv");
  save_dense_text(a, f.path);

  rt.reset_stats();
  auto back = load_dense_text(rt, f.path, {5, 3});
  CHECK(back.rows() == 23);
  CHECK(back.cols() == 7);
  CHECK(back.reg_block() == BlockShape{5, 3});
  CHECK_FALSE(back.is_sparse());
  CHECK(rt.stats().submitted_for("load") == back.grid_rows());
  CHECK(rt.stats().total_submitted() == back.grid_rows());
  CHECK(same_values(back.collect(), a.collect()));
}

TEST_CASE("load accepts custom delimiters, spaces, and a header") {
  TaskRuntime rt(1);
  TempFile f("io_header.txt");
  f.write("alpha;beta;gamma\n"
          "1.5 ; 2;3\n"
          "-4;5e-1 ;6\n");

  auto a = load_dense_text(rt, f.path, {2, 2},
                           {.delimiter = ';', .skip_header = true});
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  auto got = ref::from_block(a.collect());
  ref::Mat expect = {{1.5, 2.0, 3.0}, {-4.0, 0.5, 6.0}};
  CHECK(ref::exact_equal(got, expect));

  // without skipping, the header is data and fails its block row's task
  auto bad = load_dense_text(rt, f.path, {2, 2}, {.delimiter = ';'});
  CHECK_THROWS_AS(bad.collect(), TaskError);
}

TEST_CASE("a malformed number names its line in the failure") {
  TaskRuntime rt(2);
  TempFile f("io_badnum.csv");
  f.write("1,2\n3,4\n5,oops\n7,8\n");

  auto a = load_dense_text(rt, f.path, {2, 2});
  CHECK(a.rows() == 4);
  std::string message;
  std::string tag;
  try {
    a.collect();
  } catch (const TaskError& e) {
    message = e.what();
    tag = e.op_tag();
  }
  CHECK(tag == "load");
  CHECK(message.find("line 3") != std::string::npos);
  CHECK(message.find("oops") != std::string::npos);

  // blocks in unaffected block rows still resolve
  CHECK(a.element(0, 1) == 2.0);
}

TEST_CASE("a short line names its line in the failure") {
  TaskRuntime rt(1);
  TempFile f("io_short.csv");
  f.write("1,2,3\n4,5\n6,7,8\n");

  auto a = load_dense_text(rt, f.path, {3, 3});
  std::string message;
  try {
    a.collect();
  } catch (const TaskError& e) {
    message = e.what();
  }
  CHECK(message.find("line 2") != std::string::npos);
  CHECK(message.find("expected 3 fields") != std::string::npos);
}

TEST_CASE("structural problems are reported before any task runs") {
  TaskRuntime rt(1);

  TempFile empty("io_empty.csv");
  empty.write("");
  CHECK_THROWS_AS(load_dense_text(rt, empty.path, {1, 1}), ParseError);

  TempFile only_header("io_onlyheader.csv");
  only_header.write("a,b\n");
  CHECK_THROWS_AS(
      load_dense_text(rt, only_header.path, {1, 1}, {.skip_header = true}),
      ParseError);

  TempFile small("io_small.csv");
  small.write("1,2\n3,4\n");
  CHECK_THROWS_AS(load_dense_text(rt, small.path, {3, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(load_dense_text(rt, small.path, {0, 2}),
                  std::invalid_argument);

  CHECK_THROWS_AS(load_dense_text(rt, "io_does_not_exist.csv", {1, 1}),
                  std::runtime_error);
  CHECK(rt.stats().total_submitted() == 0);
}

TEST_CASE("saving a sparse array writes its dense values") {
  TaskRuntime rt(1);
  std::vector<Triplet> trips = {{0, 1, 2.5}, {2, 0, -1.0}, {3, 3, 7.0}};
  auto a = DistArray::from_dense(
      rt, Block::sparse_from_triplets(4, 4, trips), {2, 2}, true);

  TempFile f("io_sparse.csv");
  save_dense_text(a, f.path);
  auto back = load_dense_text(rt, f.path, {2, 2});
  CHECK_FALSE(back.is_sparse());
  CHECK(same_values(back.collect(), a.collect().to_dense()));
  CHECK(back.element(0, 0) == 0.0);
  CHECK(back.element(0, 1) == 2.5);
}

TEST_CASE("triplet files load as sparse arrays without tasks") {
  TaskRuntime rt(2);
  TempFile f("io_trips.txt");
  f.write("0 0 1.5\n"
          "2 1 -2.25\n"
          "\n"
          "1 3\t4.5\n"
          "0 0 9.0\n"); // repeated coordinate: the last line wins

  rt.reset_stats();
  auto a = load_triplets(rt, f.path, 4, 5, {2, 3});
  CHECK(a.rows() == 4);
  CHECK(a.cols() == 5);
  CHECK(a.is_sparse());
  CHECK(rt.stats().total_submitted() == 0);

  auto got = a.collect();
  CHECK(got.stored() == 3);
  CHECK(got.at(0, 0) == 9.0);
  CHECK(got.at(2, 1) == -2.25);
  CHECK(got.at(1, 3) == 4.5);
  CHECK(got.at(3, 4) == 0.0);
}

TEST_CASE("triplet parsing validates shape and field content") {
  TaskRuntime rt(1);

  TempFile bounds("io_trips_bounds.txt");
  bounds.write("0 0 1.0\n5 0 2.0\n");
  std::size_t line = 0;
  try {
    load_triplets(rt, bounds.path, 4, 4, {2, 2});
  } catch (const ParseError& e) {
    line = e.line();
  }
  CHECK(line == 2);

  TempFile fields("io_trips_fields.txt");
  fields.write("0 0 1.0 extra\n");
  CHECK_THROWS_AS(load_triplets(rt, fields.path, 4, 4, {2, 2}), ParseError);

  TempFile index("io_trips_index.txt");
  index.write("0 x 1.0\n");
  CHECK_THROWS_AS(load_triplets(rt, index.path, 4, 4, {2, 2}), ParseError);

  TempFile value("io_trips_value.txt");
  value.write("0 0 huh\n");
  CHECK_THROWS_AS(load_triplets(rt, value.path, 4, 4, {2, 2}), ParseError);

  CHECK_THROWS_AS(load_triplets(rt, "io_missing.txt", 4, 4, {2, 2}),
                  std::runtime_error);
}

TEST_CASE("written text is one line per row with the chosen delimiter") {
  TaskRuntime rt(1);
  auto a = DistArray::from_dense(
      rt, Block::from_rows({{1.0, 2.5}, {-3.0, 0.125}}), {2, 2});

  TempFile f("io_layout.tsv");
  save_dense_text(a, f.path, '\t');
  CHECK(f.read() == "1\t2.5\n-3\t0.125\n");

  auto back = load_dense_text(rt, f.path, {1, 1}, {.delimiter = '\t'});
  CHECK(same_values(back.collect(), a.collect()));
}

} // TEST_SUITE
