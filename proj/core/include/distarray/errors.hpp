#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace da {

/// Reading a handle whose producing task threw surfaces the failure as a
/// TaskError carrying the op_tag of the task where the error originated,
/// even when the failure reached the handle through a chain of dependents.
class TaskError : public std::runtime_error {
public:
  TaskError(std::string op_tag, const std::string& message)
      : std::runtime_error(message), op_tag_(std::move(op_tag)) {}

  const std::string& op_tag() const noexcept { return op_tag_; }

private:
  std::string op_tag_;
};

/// Requested operation is not defined for the operand's storage format
/// (typically: it would silently densify a sparse array).
class UnsupportedOperation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. line() is the 1-based line number in the file;
/// 0 when the problem is not tied to a specific line.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error(message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace da
