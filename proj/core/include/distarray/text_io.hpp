#pragma once

#include <cstddef>
#include <string>

#include "distarray/dist_array.hpp"

namespace da {

struct TextFormat {
  char delimiter = ',';
  bool skip_header = false;
};

/// Loads a delimited text matrix into a blocked dense array. The driver
/// scans the file once for line boundaries and the column count; each row
/// of blocks is then parsed by one "load" task that produces all of its
/// column tiles. Structural problems found up front throw ParseError on
/// the calling thread; malformed content inside a tile fails the owning
/// task, so collect() or barrier() raise TaskError whose message carries
/// the 1-based line number.
DistArray load_dense_text(TaskRuntime& rt, const std::string& path,
                          BlockShape block, TextFormat fmt = {});

/// Writes every element as delimited text, one matrix row per line. Values
/// use the shortest form that parses back to the identical double, so a
/// save/load round trip reproduces the array bit for bit.
void save_dense_text(const DistArray& a, const std::string& path,
                     char delimiter = ',');

/// Loads a whitespace-separated "row column value" file into a sparse
/// blocked array of the given total shape. Blank lines are skipped,
/// indices are bounds-checked, and a repeated coordinate keeps the last
/// line. Parsing happens on the calling thread; no tasks are spawned.
DistArray load_triplets(TaskRuntime& rt, const std::string& path,
                        std::size_t rows, std::size_t cols, BlockShape block);

} // namespace da
