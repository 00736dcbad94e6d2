#pragma once

#include <any>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "distarray/errors.hpp"

namespace da {

class TaskRuntime;

namespace detail {
struct HandleState;
struct RuntimeImpl;
} // namespace detail

/// Opaque value flowing between tasks. Wrap large data in a shared_ptr so
/// copies stay cheap; the runtime never inspects the contents.
using Payload = std::any;

/// Single-assignment future naming one task output (or a value registered
/// with TaskRuntime::put). Handles are write-once: the payload becomes
/// observable when the producing task finishes and never changes after.
class Handle {
public:
  Handle() = default;

  bool valid() const noexcept { return state_ != nullptr; }

  /// Unique per runtime, assigned at creation.
  std::uint64_t id() const;

  /// Id of the producing task; 0 for handles created by put().
  std::uint64_t producer_task() const;

private:
  friend class TaskRuntime;
  friend struct detail::RuntimeImpl;
  explicit Handle(std::shared_ptr<detail::HandleState> state)
      : state_(std::move(state)) {}

  std::shared_ptr<detail::HandleState> state_;
};

/// Resolved argument as seen by a running task: either a single payload or
/// the payloads of a collection argument in their declared order.
class TaskInput {
public:
  bool is_collection() const noexcept { return collection_; }

  const Payload& value() const;
  const std::vector<Payload>& items() const;

private:
  friend struct detail::RuntimeImpl;
  bool collection_ = false;
  std::vector<Payload> payloads_;
};

using TaskFn = std::function<std::vector<Payload>(const std::vector<TaskInput>&)>;

/// Unresolved task argument. Collections are ordered lists of handles where
/// every element is tracked as its own dependency: the task becomes runnable
/// when each element is individually ready, and elements produced by
/// different tasks never serialize against each other.
class Arg {
public:
  static Arg value(Payload v);
  static Arg handle(Handle h);
  static Arg collection(std::vector<Handle> elements);

private:
  friend struct detail::RuntimeImpl;
  enum class Kind { value, single, collection };
  Kind kind_ = Kind::value;
  Payload value_;
  std::vector<Handle> handles_;
};

/// Counters since construction or the last reset_stats(). Tasks that were
/// in flight across a reset are not counted into the new window.
struct RuntimeStats {
  std::map<std::string, std::uint64_t> submitted;
  std::map<std::string, std::uint64_t> completed;

  /// Largest number of simultaneously runnable-or-running tasks observed.
  std::uint64_t max_graph_width = 0;

  std::uint64_t submitted_for(const std::string& op_tag) const;
  std::uint64_t completed_for(const std::string& op_tag) const;
  std::uint64_t total_submitted() const;
  std::uint64_t total_completed() const;
};

/// Shared-memory task runtime with dataflow dependencies.
///
/// submit() inserts a task into the dependency graph and returns its output
/// handles without waiting for execution (or even for the inputs to exist).
/// Dependencies are inferred from the handle arguments; a task starts once
/// all of them are ready, and ready tasks are dispatched to the worker pool
/// in submission order (FIFO). There is no task priority and no in-place
/// mutation of inputs: a task reads payloads and produces fresh outputs, so
/// two tasks reading the same handle can run concurrently in either order
/// without affecting results.
///
/// A task that throws marks its outputs failed; tasks depending on them are
/// skipped and propagate the originating op_tag. fetch() on a failed handle
/// and barrier() after any failure throw TaskError. Failures are sticky for
/// the lifetime of the runtime.
///
/// The driver thread submits and fetches; task functions must not call
/// fetch(), submit(), or barrier() themselves.
class TaskRuntime {
public:
  /// workers == 0 selects std::thread::hardware_concurrency().
  explicit TaskRuntime(unsigned workers = 0);

  /// Drains all submitted work, then stops the pool.
  ~TaskRuntime();

  TaskRuntime(const TaskRuntime&) = delete;
  TaskRuntime& operator=(const TaskRuntime&) = delete;

  unsigned worker_count() const noexcept;

  /// Registers already-materialized data as a ready handle.
  Handle put(Payload value);

  /// Enqueues a task producing output_arity handles. Never blocks.
  /// Throws std::invalid_argument for output_arity == 0 or for input
  /// handles that are default-constructed or owned by another runtime.
  std::vector<Handle> submit(std::string op_tag, TaskFn fn,
                             std::vector<Arg> inputs,
                             std::size_t output_arity = 1);

  /// Blocks until the handle resolves; returns its payload or throws
  /// TaskError if the producing task (transitively) failed.
  Payload fetch(const Handle& h) const;

  /// Blocks until every submitted task has finished. Throws TaskError
  /// listing the originating op_tags if any task has ever failed.
  void barrier() const;

  RuntimeStats stats() const;
  void reset_stats();

private:
  std::unique_ptr<detail::RuntimeImpl> impl_;
};

} // namespace da
