// dsbench: benchmark, data generation, and verification driver for the
// distarray library. Timing is reported but never asserted; the contractual
// outputs are task counts and oracle verdicts.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "distarray/als.hpp"
#include "distarray/dataset.hpp"
#include "distarray/dist_array.hpp"
#include "distarray/kmeans.hpp"
#include "distarray/text_io.hpp"

using json = nlohmann::ordered_json;

namespace {

using Mat = std::vector<std::vector<double>>;

double unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

Mat random_mat(std::mt19937_64& g, std::size_t rows, std::size_t cols) {
  Mat m(rows, std::vector<double>(cols));
  for (auto& row : m) {
    for (auto& v : row) {
      v = unit(g);
    }
  }
  return m;
}

Mat from_block(const da::Block& b) {
  Mat m(b.rows(), std::vector<double>(b.cols()));
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      m[i][j] = b.at(i, j);
    }
  }
  return m;
}

Mat transpose_mat(const Mat& a) {
  std::size_t r = a.size();
  std::size_t c = r == 0 ? 0 : a[0].size();
  Mat t(c, std::vector<double>(r));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      t[j][i] = a[i][j];
    }
  }
  return t;
}

Mat matmul_mat(const Mat& a, const Mat& b) {
  std::size_t n = a.size();
  std::size_t k = b.size();
  std::size_t m = k == 0 ? 0 : b[0].size();
  Mat c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t p = 0; p < k; ++p) {
        c[i][j] += a[i][p] * b[p][j];
      }
    }
  }
  return c;
}

std::vector<double> sum_rows_mat(const Mat& a) {
  std::size_t cols = a.empty() ? 0 : a[0].size();
  std::vector<double> out(cols, 0.0);
  for (const auto& row : a) {
    for (std::size_t j = 0; j < cols; ++j) {
      out[j] += row[j];
    }
  }
  return out;
}

bool exact_eq(const Mat& a, const Mat& b) { return a == b; }

bool approx_eq(const Mat& a, const Mat& b, double tol) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) {
      return false;
    }
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      double scale = std::max({1.0, std::abs(a[i][j]), std::abs(b[i][j])});
      if (std::abs(a[i][j] - b[i][j]) > tol * scale) {
        return false;
      }
    }
  }
  return true;
}

Mat sorted_rows(Mat a) {
  std::sort(a.begin(), a.end());
  return a;
}

// one full-data Lloyd update; ties to the lowest center index
void lloyd_step_mat(const Mat& data, Mat& centers, double& inertia) {
  std::size_t k = centers.size();
  std::size_t d = centers.empty() ? 0 : centers[0].size();
  Mat sums(k, std::vector<double>(d, 0.0));
  std::vector<std::size_t> counts(k, 0);
  inertia = 0.0;
  for (const auto& x : data) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double diff = x[j] - centers[c][j];
        dist += diff * diff;
      }
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    inertia += best_d;
    ++counts[best];
    for (std::size_t j = 0; j < d; ++j) {
      sums[best][j] += x[j];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      for (std::size_t j = 0; j < d; ++j) {
        centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
  }
}

// sparse ratings with the given density; values in [0.5, 1.5)
std::vector<da::Triplet> random_triplets(std::mt19937_64& g, std::size_t rows,
                                         std::size_t cols, double density) {
  std::vector<da::Triplet> trips;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (unit(g) < density) {
        trips.push_back({i, j, 0.5 + unit(g)});
      }
    }
  }
  return trips;
}

unsigned resolve_workers(unsigned flag) {
  if (flag > 0) {
    return flag;
  }
  if (const char* env = std::getenv("DSBENCH_WORKERS")) {
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
    if (ec != std::errc() || *ptr != '\0' || value == 0) {
      throw CLI::ValidationError("DSBENCH_WORKERS",
                                 "must be a positive integer, got '" +
                                     std::string(env) + "'");
    }
    return value;
  }
  return 0; // runtime picks the hardware concurrency
}

// ---------------------------------------------------------------- bench --

struct BenchConfig {
  std::string op;
  std::size_t rows = 64;
  std::size_t cols = 64;
  std::size_t block_rows = 8;
  std::size_t block_cols = 8;
  unsigned workers = 0;
  std::uint64_t seed = 0;
  bool baseline = false;
  std::string json_path;
};

struct BenchReport {
  BenchConfig cfg;
  unsigned workers_used = 0;
  double wall_seconds = 0.0;
  std::string verdict = "skipped";
  da::RuntimeStats stats;
};

json report_json(const BenchReport& r) {
  json tasks = json::object();
  for (const auto& [tag, submitted] : r.stats.submitted) {
    tasks[tag] = {{"submitted", submitted},
                  {"completed", r.stats.completed_for(tag)}};
  }
  return {{"schema_version", 1},
          {"command", "bench"},
          {"operation", r.cfg.op},
          {"rows", r.cfg.rows},
          {"cols", r.cfg.cols},
          {"block_rows", r.cfg.block_rows},
          {"block_cols", r.cfg.block_cols},
          {"workers", r.workers_used},
          {"seed", r.cfg.seed},
          {"baseline", r.cfg.baseline},
          {"wall_seconds", r.wall_seconds},
          {"verdict", r.verdict},
          {"max_graph_width", r.stats.max_graph_width},
          {"tasks", tasks}};
}

void print_report(const BenchReport& r) {
  std::printf("operation:       %s%s\n", r.cfg.op.c_str(),
              r.cfg.baseline ? " (baseline)" : "");
  std::printf("shape:           %zu x %zu\n", r.cfg.rows, r.cfg.cols);
  std::printf("block:           %zu x %zu\n", r.cfg.block_rows,
              r.cfg.block_cols);
  std::printf("workers:         %u\n", r.workers_used);
  std::printf("seed:            %llu\n",
              static_cast<unsigned long long>(r.cfg.seed));
  std::printf("wall time:       %.6f s\n", r.wall_seconds);
  std::printf("max graph width: %llu\n",
              static_cast<unsigned long long>(r.stats.max_graph_width));
  std::printf("tasks:\n");
  for (const auto& [tag, submitted] : r.stats.submitted) {
    std::printf("  %-16s %llu submitted, %llu completed\n", tag.c_str(),
                static_cast<unsigned long long>(submitted),
                static_cast<unsigned long long>(r.stats.completed_for(tag)));
  }
  std::printf("verdict:         %s\n", r.verdict.c_str());
}

int run_bench(const BenchConfig& cfg) {
  da::TaskRuntime rt(resolve_workers(cfg.workers));
  BenchReport report;
  report.cfg = cfg;
  report.workers_used = rt.worker_count();

  using clock = std::chrono::steady_clock;
  bool pass = false;

  if (cfg.op == "transpose" || cfg.op == "shuffle") {
    // baseline mode partitions rows only; clamp the staging block width
    da::BlockShape staging{cfg.block_rows,
                           cfg.baseline ? std::min(cfg.block_cols, cfg.cols)
                                        : cfg.block_cols};
    auto source =
        da::DistArray::random(rt, cfg.rows, cfg.cols, staging, cfg.seed);
    Mat input = from_block(source.collect());
    if (cfg.baseline) {
      auto data = da::SubsetDataset::from_dense(rt, source.collect(),
                                                cfg.block_rows);
      rt.reset_stats();
      auto t0 = clock::now();
      auto out = cfg.op == "transpose" ? data.transpose()
                                       : data.shuffle(cfg.seed + 1);
      rt.barrier();
      report.wall_seconds = std::chrono::duration<double>(clock::now() - t0)
                                .count();
      report.stats = rt.stats();
      Mat got = from_block(out.collect_samples());
      pass = cfg.op == "transpose"
                 ? exact_eq(got, transpose_mat(input))
                 : exact_eq(sorted_rows(got), sorted_rows(input));
    } else {
      rt.reset_stats();
      auto t0 = clock::now();
      auto out = cfg.op == "transpose" ? source.transpose()
                                       : source.shuffle_rows(cfg.seed + 1);
      rt.barrier();
      report.wall_seconds = std::chrono::duration<double>(clock::now() - t0)
                                .count();
      report.stats = rt.stats();
      Mat got = from_block(out.collect());
      pass = cfg.op == "transpose"
                 ? exact_eq(got, transpose_mat(input))
                 : exact_eq(sorted_rows(got), sorted_rows(input));
    }
  } else if (cfg.op == "sum") {
    auto source =
        da::DistArray::random(rt, cfg.rows, cfg.cols,
                              {cfg.block_rows, cfg.block_cols}, cfg.seed);
    Mat input = from_block(source.collect());
    rt.reset_stats();
    auto t0 = clock::now();
    auto out = source.reduce(da::Axis::rows, da::ReduceKind::sum);
    rt.barrier();
    report.wall_seconds =
        std::chrono::duration<double>(clock::now() - t0).count();
    report.stats = rt.stats();
    Mat got = from_block(out.collect());
    pass = approx_eq(got, {sum_rows_mat(input)}, 1e-9);
  } else if (cfg.op == "matmul") {
    auto a = da::DistArray::random(rt, cfg.rows, cfg.cols,
                                   {cfg.block_rows, cfg.block_cols},
                                   cfg.seed);
    auto b = da::DistArray::random(rt, cfg.cols, cfg.rows,
                                   {cfg.block_cols, cfg.block_rows},
                                   cfg.seed + 1);
    Mat ma = from_block(a.collect());
    Mat mb = from_block(b.collect());
    rt.reset_stats();
    auto t0 = clock::now();
    auto out = da::matmul(a, b);
    rt.barrier();
    report.wall_seconds =
        std::chrono::duration<double>(clock::now() - t0).count();
    report.stats = rt.stats();
    pass = approx_eq(from_block(out.collect()), matmul_mat(ma, mb), 1e-9);
  } else if (cfg.op == "kmeans") {
    auto data =
        da::DistArray::random(rt, cfg.rows, cfg.cols,
                              {cfg.block_rows, cfg.block_cols}, cfg.seed);
    rt.barrier();
    rt.reset_stats();
    da::KMeansParams params{.k = std::min<std::size_t>(8, cfg.rows),
                            .max_iter = 5,
                            .tol = 1e-6,
                            .seed = cfg.seed};
    auto t0 = clock::now();
    auto model = da::kmeans_fit(data, params);
    report.wall_seconds =
        std::chrono::duration<double>(clock::now() - t0).count();
    report.stats = rt.stats();
    pass = !model.inertia_history.empty();
    for (std::size_t t = 1; t < model.inertia_history.size(); ++t) {
      pass = pass && model.inertia_history[t] <=
                         model.inertia_history[t - 1] * (1.0 + 1e-12) + 1e-12;
    }
  } else { // als
    std::mt19937_64 g(cfg.seed);
    auto trips = random_triplets(g, cfg.rows, cfg.cols, 0.3);
    auto ratings = da::DistArray::from_dense(
        rt, da::Block::sparse_from_triplets(cfg.rows, cfg.cols, trips),
        {cfg.block_rows, cfg.block_cols}, true);
    rt.reset_stats();
    da::ALSParams params{.rank = 5,
                         .regularization = 1e-2,
                         .max_iter = 3,
                         .tol = 0.0,
                         .seed = cfg.seed};
    auto t0 = clock::now();
    auto model = da::als_fit(ratings, params);
    report.wall_seconds =
        std::chrono::duration<double>(clock::now() - t0).count();
    report.stats = rt.stats();
    pass = report.stats.submitted_for("transpose") == 0 &&
           !model.objective_history.empty();
    for (std::size_t t = 1; t < model.objective_history.size(); ++t) {
      pass = pass &&
             model.objective_history[t] <=
                 model.objective_history[t - 1] * (1.0 + 1e-12) + 1e-12;
    }
  }

  report.verdict = pass ? "pass" : "fail";
  print_report(report);
  if (!cfg.json_path.empty()) {
    std::ofstream out(cfg.json_path, std::ios::trunc);
    if (!out) {
      std::fprintf(stderr, "error: cannot open %s\n", cfg.json_path.c_str());
      return 1;
    }
    out << report_json(report).dump(2) << '\n';
  }
  return pass ? 0 : 1;
}

// ------------------------------------------------------------------ gen --

int run_gen(const std::string& path, std::size_t rows, std::size_t cols,
            std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::fprintf(stderr, "error: cannot open %s\n", path.c_str());
    return 1;
  }
  std::mt19937_64 g(seed);
  char buf[64];
  std::string line;
  for (std::size_t i = 0; i < rows; ++i) {
    line.clear();
    for (std::size_t j = 0; j < cols; ++j) {
      if (j > 0) {
        line.push_back(',');
      }
      auto res = std::to_chars(buf, buf + sizeof buf, unit(g));
      line.append(buf, res.ptr);
    }
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  if (!out) {
    std::fprintf(stderr, "error: failed writing %s\n", path.c_str());
    return 1;
  }
  std::printf("wrote %zu x %zu values to %s\n", rows, cols, path.c_str());
  return 0;
}

// --------------------------------------------------------------- verify --

struct Verifier {
  bool probe = false; // corrupt the first oracle to prove failures surface
  int checks = 0;
  int failures = 0;

  // consumes the probe: returns a poison value added to one oracle entry
  double poison() {
    double p = probe ? 1.0 : 0.0;
    probe = false;
    return p;
  }

  void record(const char* name, bool ok) {
    ++checks;
    if (!ok) {
      ++failures;
    }
    std::printf("  [%s] %s\n", ok ? "pass" : "FAIL", name);
  }
};

void verify_ops(Verifier& v, unsigned workers) {
  std::printf("suite: ops\n");
  da::TaskRuntime rt(workers);
  std::mt19937_64 g(1234);

  auto rand_dims = [&g](std::size_t cap) {
    std::size_t n = 1 + g() % cap;
    std::size_t b = 1 + g() % n;
    return std::pair{n, b};
  };

  {
    bool ok = true;
    for (int c = 0; c < 12 && ok; ++c) {
      auto [n, p] = rand_dims(24);
      auto [m, q] = rand_dims(24);
      Mat in = random_mat(g, n, m);
      auto a = da::DistArray::from_dense(rt, da::Block::from_rows(in), {p, q});
      Mat expect = transpose_mat(in);
      if (c == 0) {
        expect[0][0] += v.poison();
      }
      ok = exact_eq(from_block(a.transpose().collect()), expect);
    }
    v.record("transpose matches the plain-loop result", ok);
  }
  {
    bool ok = true;
    for (int c = 0; c < 10 && ok; ++c) {
      auto [n, p] = rand_dims(20);
      auto [m, q] = rand_dims(20);
      Mat in = random_mat(g, n, m);
      auto a = da::DistArray::from_dense(rt, da::Block::from_rows(in), {p, q});
      std::size_t r0 = g() % n;
      std::size_t r1 = r0 + 1 + g() % (n - r0);
      Mat expect(in.begin() + static_cast<std::ptrdiff_t>(r0),
                 in.begin() + static_cast<std::ptrdiff_t>(r1));
      ok = exact_eq(from_block(a.slice_rows(r0, r1).collect()), expect);
    }
    v.record("row slices match the source rows", ok);
  }
  {
    bool ok = true;
    for (int c = 0; c < 10 && ok; ++c) {
      auto [n, p] = rand_dims(20);
      auto [m, q] = rand_dims(20);
      Mat in = random_mat(g, n, m);
      auto a = da::DistArray::from_dense(rt, da::Block::from_rows(in), {p, q});
      ok = approx_eq(from_block(
                         a.reduce(da::Axis::rows, da::ReduceKind::sum)
                             .collect()),
                     {sum_rows_mat(in)}, 1e-9);
      Mat mins(1, std::vector<double>(m));
      Mat maxs(1, std::vector<double>(m));
      for (std::size_t j = 0; j < m; ++j) {
        double lo = in[0][j];
        double hi = in[0][j];
        for (std::size_t i = 1; i < n; ++i) {
          lo = std::min(lo, in[i][j]);
          hi = std::max(hi, in[i][j]);
        }
        mins[0][j] = lo;
        maxs[0][j] = hi;
      }
      ok = ok &&
           exact_eq(from_block(a.reduce(da::Axis::rows, da::ReduceKind::min)
                                   .collect()),
                    mins) &&
           exact_eq(from_block(a.reduce(da::Axis::rows, da::ReduceKind::max)
                                   .collect()),
                    maxs);
    }
    v.record("axis reductions match", ok);
  }
  {
    bool ok = true;
    for (int c = 0; c < 10 && ok; ++c) {
      auto [n, p] = rand_dims(20);
      auto [m, q] = rand_dims(20);
      Mat ma = random_mat(g, n, m);
      Mat mb = random_mat(g, n, m);
      auto a = da::DistArray::from_dense(rt, da::Block::from_rows(ma), {p, q});
      auto b = da::DistArray::from_dense(rt, da::Block::from_rows(mb), {p, q});
      Mat sum(n, std::vector<double>(m));
      Mat prod(n, std::vector<double>(m));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          sum[i][j] = ma[i][j] + mb[i][j];
          prod[i][j] = ma[i][j] * mb[i][j];
        }
      }
      ok = exact_eq(from_block((a + b).collect()), sum) &&
           exact_eq(from_block((a * b).collect()), prod);
    }
    v.record("elementwise operators match", ok);
  }
  {
    bool ok = true;
    for (int c = 0; c < 8 && ok; ++c) {
      auto [n, p] = rand_dims(16);
      auto [m, q] = rand_dims(16);
      auto [l, s] = rand_dims(16);
      Mat ma = random_mat(g, n, m);
      Mat mb = random_mat(g, m, l);
      auto a = da::DistArray::from_dense(rt, da::Block::from_rows(ma), {p, q});
      auto b = da::DistArray::from_dense(rt, da::Block::from_rows(mb), {q, s});
      ok = approx_eq(from_block(da::matmul(a, b).collect()),
                     matmul_mat(ma, mb), 1e-9);
    }
    v.record("matrix product matches", ok);
  }
  {
    bool ok = true;
    for (int c = 0; c < 8 && ok; ++c) {
      auto [n, p] = rand_dims(20);
      auto [m, q] = rand_dims(20);
      Mat in = random_mat(g, n, m);
      auto a = da::DistArray::from_dense(rt, da::Block::from_rows(in), {p, q});
      auto out = a.shuffle_rows(g());
      ok = exact_eq(sorted_rows(from_block(out.collect())), sorted_rows(in));
    }
    v.record("shuffle preserves the row multiset", ok);
  }
  {
    Mat in = random_mat(g, 19, 7);
    auto a = da::DistArray::from_dense(rt, da::Block::from_rows(in), {4, 3});
    const char* path = "dsbench_verify_roundtrip.csv";
    da::save_dense_text(a, path);
    auto back = da::load_dense_text(rt, path, {5, 2});
    bool ok = exact_eq(from_block(back.collect()), in);
    std::remove(path);
    v.record("save/load round trip is exact", ok);
  }
  {
    bool ok = true;
    for (int c = 0; c < 6 && ok; ++c) {
      auto [n, p] = rand_dims(16);
      std::size_t m = 1 + g() % 16;
      Mat in = random_mat(g, n, m);
      auto data = da::SubsetDataset::from_dense(rt, da::Block::from_rows(in),
                                                p);
      ok = exact_eq(from_block(data.transpose().collect_samples()),
                    transpose_mat(in)) &&
           exact_eq(sorted_rows(from_block(
                        data.shuffle(g()).collect_samples())),
                    sorted_rows(in));
    }
    v.record("dataset transpose and shuffle match", ok);
  }
}

void verify_ml(Verifier& v, unsigned workers) {
  std::printf("suite: ml\n");
  std::mt19937_64 g(4321);

  {
    da::TaskRuntime rt(workers);
    Mat in = random_mat(g, 50, 6);
    auto data =
        da::DistArray::from_dense(rt, da::Block::from_rows(in), {11, 4});
    auto init = da::kmeans_fit(data, {.k = 4, .max_iter = 0, .seed = 9});
    auto one = da::kmeans_fit(data, {.k = 4, .max_iter = 1, .tol = 0.0,
                                     .seed = 9});
    Mat expect = from_block(init.centers);
    double inertia = 0.0;
    lloyd_step_mat(in, expect, inertia);
    expect[0][0] += v.poison();
    bool ok = approx_eq(from_block(one.centers), expect, 1e-9) &&
              one.inertia_history.size() == 1 &&
              std::abs(one.inertia_history[0] - inertia) <=
                  1e-9 * std::max(1.0, inertia);
    v.record("k-means single pass matches the plain-loop update", ok);
  }
  {
    Mat in = random_mat(g, 80, 8);
    da::KMeansModel base;
    bool ok = true;
    bool first = true;
    for (da::BlockShape shape : {da::BlockShape{80, 8}, da::BlockShape{20, 8},
                                 da::BlockShape{20, 4}}) {
      for (unsigned w : {1u, workers == 0 ? 4u : workers}) {
        da::TaskRuntime rt(w);
        auto data =
            da::DistArray::from_dense(rt, da::Block::from_rows(in), shape);
        auto model = da::kmeans_fit(data, {.k = 5, .max_iter = 10,
                                           .tol = 1e-9, .seed = 3});
        for (std::size_t t = 1; t < model.inertia_history.size(); ++t) {
          ok = ok && model.inertia_history[t] <=
                         model.inertia_history[t - 1] * (1.0 + 1e-12) + 1e-12;
        }
        if (first) {
          base = model;
          first = false;
        } else {
          ok = ok && model.iterations == base.iterations &&
               approx_eq(from_block(model.centers), from_block(base.centers),
                         1e-9);
        }
      }
    }
    v.record("k-means ignores blocking and worker count", ok);
  }
  {
    da::TaskRuntime rt(workers);
    auto trips = random_triplets(g, 60, 40, 0.35);
    auto ratings = da::DistArray::from_dense(
        rt, da::Block::sparse_from_triplets(60, 40, trips), {16, 12}, true);
    rt.reset_stats();
    auto model = da::als_fit(ratings, {.rank = 4, .regularization = 1e-2,
                                       .max_iter = 6, .tol = 0.0, .seed = 5});
    bool ok = rt.stats().submitted_for("transpose") == 0 &&
              model.objective_history.size() == 6;
    for (std::size_t t = 1; t < model.objective_history.size(); ++t) {
      ok = ok && model.objective_history[t] <=
                     model.objective_history[t - 1] * (1.0 + 1e-12) + 1e-12;
    }
    ok = ok && model.rmse_history.back() < model.rmse_history.front();
    v.record("als objective never increases, no transposed ratings", ok);
  }
  {
    auto trips = random_triplets(g, 40, 30, 0.3);
    da::Block rblock = da::Block::sparse_from_triplets(40, 30, trips);
    da::ALSModel base;
    bool ok = true;
    bool first = true;
    for (da::BlockShape shape : {da::BlockShape{40, 30}, da::BlockShape{9, 7}}) {
      da::TaskRuntime rt(workers);
      auto ratings = da::DistArray::from_dense(rt, rblock, shape, true);
      auto model = da::als_fit(ratings, {.rank = 3, .regularization = 0.05,
                                         .max_iter = 3, .tol = 0.0,
                                         .seed = 6});
      if (first) {
        base = model;
        first = false;
      } else {
        ok = da::same_values(model.user_factors, base.user_factors) &&
             da::same_values(model.item_factors, base.item_factors);
      }
    }
    v.record("als factors ignore blocking", ok);
  }
}

int run_verify(const std::string& suite, bool probe, unsigned workers) {
  Verifier v;
  v.probe = probe;
  unsigned resolved = resolve_workers(workers);
  if (suite == "all" || suite == "ops") {
    verify_ops(v, resolved);
  }
  if (suite == "all" || suite == "ml") {
    verify_ml(v, resolved);
  }
  std::printf("%d checks, %d failures\n", v.checks, v.failures);
  return v.failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchmark and verification driver for the distarray library"};
  app.require_subcommand(1);

  BenchConfig cfg;
  auto* bench = app.add_subcommand(
      "bench", "run one operation, report task counts and a verdict");
  bench
      ->add_option("op", cfg.op,
                   "operation: transpose, shuffle, sum, matmul, kmeans, als")
      ->required()
      ->check(CLI::IsMember(
          {"transpose", "shuffle", "sum", "matmul", "kmeans", "als"}));
  bench->add_option("--rows", cfg.rows, "total rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--cols", cfg.cols, "total columns")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--block-rows", cfg.block_rows, "regular block rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--block-cols", cfg.block_cols, "regular block columns")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--workers", cfg.workers,
                    "worker threads (default: DSBENCH_WORKERS env var, then "
                    "the hardware concurrency)");
  bench->add_option("--seed", cfg.seed, "seed for inputs and shuffles")
      ->capture_default_str();
  bench->add_flag("--baseline", cfg.baseline,
                  "run on the row-partitioned dataset instead of the blocked "
                  "array (transpose and shuffle only; rows split into "
                  "subsets of --block-rows)");
  bench->add_option("--json", cfg.json_path, "also write the report as JSON");

  std::string gen_path;
  std::size_t gen_rows = 64;
  std::size_t gen_cols = 8;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "write a random dense text matrix");
  gen->add_option("path", gen_path, "output file")->required();
  gen->add_option("--rows", gen_rows, "rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--cols", gen_cols, "columns")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "seed")->capture_default_str();

  std::string suite = "all";
  bool probe = false;
  unsigned verify_workers = 0;
  auto* verify = app.add_subcommand(
      "verify", "run oracle-equivalence checks; nonzero exit on failure");
  verify->add_option("--suite", suite, "all, ops, or ml")
      ->check(CLI::IsMember({"all", "ops", "ml"}))
      ->capture_default_str();
  verify->add_flag("--probe-failure", probe,
                   "corrupt the first oracle on purpose to demonstrate that "
                   "failures are detected");
  verify->add_option("--workers", verify_workers,
                     "worker threads (default: DSBENCH_WORKERS env var, then "
                     "the hardware concurrency)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) {
      if (cfg.baseline && cfg.op != "transpose" && cfg.op != "shuffle") {
        std::fprintf(stderr,
                     "error: --baseline supports only transpose and shuffle\n");
        return 2;
      }
      if (cfg.block_rows > cfg.rows ||
          (!cfg.baseline && cfg.block_cols > cfg.cols)) {
        std::fprintf(stderr, "error: block shape exceeds the array shape\n");
        return 2;
      }
      return run_bench(cfg);
    }
    if (gen->parsed()) {
      return run_gen(gen_path, gen_rows, gen_cols, gen_seed);
    }
    return run_verify(suite, probe, verify_workers);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
