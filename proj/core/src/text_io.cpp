#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distarray/text_io.hpp"

namespace da {

namespace {

// the message must carry the line number itself: when a ParseError fails a
// task, only the text travels to the TaskError seen by the driver
ParseError parse_error(std::size_t line, const std::string& message) {
  return {line, "line " + std::to_string(line) + ": " + message};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Line {
  std::size_t begin = 0;
  std::size_t length = 0;  // excludes the newline and a trailing '\r'
  std::size_t number = 0;  // 1-based position in the file
};

std::vector<Line> scan_lines(const std::string& text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  std::size_t number = 1;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::size_t end = nl == std::string::npos ? text.size() : nl;
    std::size_t len = end - pos;
    if (len > 0 && text[pos + len - 1] == '\r') {
      --len;
    }
    lines.push_back({pos, len, number});
    if (nl == std::string::npos) {
      break;
    }
    pos = nl + 1;
    ++number;
  }
  return lines;
}

std::string_view line_text(const std::string& content, const Line& ln) {
  return {content.data() + ln.begin, ln.length};
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
      ++i;
    }
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') {
      ++i;
    }
    if (i > start) {
      out.push_back(line.substr(start, i - start));
    }
  }
  return out;
}

std::string_view trimmed(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
    field.remove_prefix(1);
  }
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
    field.remove_suffix(1);
  }
  return field;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trimmed(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(),
                                   value);
  if (field.empty() || ec != std::errc() ||
      ptr != field.data() + field.size()) {
    throw parse_error(line, "not a number: '" + std::string(field) + "'");
  }
  return value;
}

std::size_t parse_index(std::string_view field, std::size_t line) {
  field = trimmed(field);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(),
                                   value);
  if (field.empty() || ec != std::errc() ||
      ptr != field.data() + field.size()) {
    throw parse_error(line, "not an index: '" + std::string(field) + "'");
  }
  return value;
}

} // namespace

DistArray load_dense_text(TaskRuntime& rt, const std::string& path,
                          BlockShape block, TextFormat fmt) {
  auto content = std::make_shared<const std::string>(read_file(path));
  auto all = scan_lines(*content);
  std::size_t first = fmt.skip_header ? 1 : 0;
  if (all.size() <= first) {
    throw ParseError(0, path + ": no data rows");
  }
  auto lines = std::make_shared<const std::vector<Line>>(all.begin() + first,
                                                         all.end());
  std::size_t rows = lines->size();
  std::size_t cols =
      split(line_text(*content, lines->front()), fmt.delimiter).size();
  if (block.rows == 0 || block.cols == 0 || block.rows > rows ||
      block.cols > cols) {
    throw std::invalid_argument("load_dense_text: invalid block shape for " +
                                std::to_string(rows) + " x " +
                                std::to_string(cols) + " data");
  }

  std::size_t gr = (rows + block.rows - 1) / block.rows;
  std::size_t gc = (cols + block.cols - 1) / block.cols;
  std::vector<std::size_t> widths(gc);
  for (std::size_t j = 0; j < gc; ++j) {
    widths[j] = std::min(cols, (j + 1) * block.cols) - j * block.cols;
  }
  auto cuts = std::make_shared<const std::vector<std::size_t>>(widths);

  std::vector<std::vector<Handle>> grid(gr);
  for (std::size_t bi = 0; bi < gr; ++bi) {
    std::size_t r0 = bi * block.rows;
    std::size_t r1 = std::min(rows, r0 + block.rows);
    grid[bi] = rt.submit(
        "load",
        [content, lines, cuts, r0, r1, cols,
         delim = fmt.delimiter](const std::vector<TaskInput>&) {
          std::size_t height = r1 - r0;
          std::vector<std::vector<double>> data(cuts->size());
          for (std::size_t j = 0; j < cuts->size(); ++j) {
            data[j].reserve(height * (*cuts)[j]);
          }
          std::vector<double> row(cols);
          for (std::size_t r = r0; r < r1; ++r) {
            const Line& ln = (*lines)[r];
            auto fields = split(line_text(*content, ln), delim);
            if (fields.size() != cols) {
              throw parse_error(ln.number,
                                "expected " + std::to_string(cols) +
                                    " fields, found " +
                                    std::to_string(fields.size()));
            }
            for (std::size_t c = 0; c < cols; ++c) {
              row[c] = parse_double(fields[c], ln.number);
            }
            std::size_t c0 = 0;
            for (std::size_t j = 0; j < cuts->size(); ++j) {
              for (std::size_t c = c0; c < c0 + (*cuts)[j]; ++c) {
                data[j].push_back(row[c]);
              }
              c0 += (*cuts)[j];
            }
          }
          std::vector<Payload> outs;
          outs.reserve(cuts->size());
          for (std::size_t j = 0; j < cuts->size(); ++j) {
            outs.push_back(block_payload(
                Block::dense(height, (*cuts)[j], std::move(data[j]))));
          }
          return outs;
        },
        {}, gc);
  }
  return DistArray::from_grid(rt, rows, cols, block, std::move(grid), false);
}

void save_dense_text(const DistArray& a, const std::string& path,
                     char delimiter) {
  Block all = a.collect();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path);
  }
  char buf[64];
  std::string line;
  for (std::size_t i = 0; i < all.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < all.cols(); ++j) {
      if (j > 0) {
        line.push_back(delimiter);
      }
      auto res = std::to_chars(buf, buf + sizeof buf, all.at(i, j));
      line.append(buf, res.ptr);
    }
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  if (!out) {
    throw std::runtime_error("failed writing " + path);
  }
}

DistArray load_triplets(TaskRuntime& rt, const std::string& path,
                        std::size_t rows, std::size_t cols, BlockShape block) {
  std::string content = read_file(path);
  std::vector<Triplet> trips;
  for (const Line& ln : scan_lines(content)) {
    auto fields = split_spaces(line_text(content, ln));
    if (fields.empty()) {
      continue;
    }
    if (fields.size() != 3) {
      throw parse_error(ln.number, "expected 'row column value', found " +
                                       std::to_string(fields.size()) +
                                       " fields");
    }
    std::size_t r = parse_index(fields[0], ln.number);
    std::size_t c = parse_index(fields[1], ln.number);
    if (r >= rows || c >= cols) {
      throw parse_error(ln.number, "coordinate (" + std::to_string(r) + ", " +
                                       std::to_string(c) +
                                       ") outside the declared shape");
    }
    trips.push_back({r, c, parse_double(fields[2], ln.number)});
  }
  return DistArray::from_dense(
      rt, Block::sparse_from_triplets(rows, cols, std::move(trips)), block,
      true);
}

} // namespace da
