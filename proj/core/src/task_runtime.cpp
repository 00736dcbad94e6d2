#include "distarray/task_runtime.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

namespace da {

namespace detail {

struct TaskNode;

enum class HandleStatus { pending, ready, failed };

struct HandleState {
  RuntimeImpl* owner = nullptr;
  std::uint64_t id = 0;
  std::uint64_t producer = 0;
  HandleStatus status = HandleStatus::pending;
  Payload value;
  std::string fail_tag;
  std::string fail_msg;
  // Tasks blocked on this handle; cleared once it settles. One entry per
  // pending occurrence, so a task listing the same handle twice appears
  // twice.
  std::vector<std::shared_ptr<TaskNode>> waiters;
};

struct TaskNode {
  std::uint64_t id = 0;
  std::string tag;
  TaskFn fn;
  std::uint64_t epoch = 0;
  std::size_t blockers = 0;
  // Mirrors the submit() Args with handles resolved lazily at run time.
  struct Input {
    bool collection = false;
    bool immediate = false;
    Payload value;
    std::vector<std::shared_ptr<HandleState>> handles;
  };
  std::vector<Input> inputs;
  std::vector<std::shared_ptr<HandleState>> outputs;
};

struct RuntimeImpl {
  explicit RuntimeImpl(unsigned workers);
  ~RuntimeImpl();

  Handle put(Payload value);
  std::vector<Handle> submit(std::string tag, TaskFn fn,
                             std::vector<Arg> inputs, std::size_t arity);
  Payload fetch(const Handle& h);
  void barrier();
  RuntimeStats stats();
  void reset_stats();

  void worker_loop();
  void run_task(const std::shared_ptr<TaskNode>& node);
  void enqueue_locked(std::shared_ptr<TaskNode> node);

  mutable std::mutex m;
  std::condition_variable cv_work;
  std::condition_variable cv_done;
  std::deque<std::shared_ptr<TaskNode>> ready;
  std::vector<std::thread> pool;
  bool stopping = false;

  std::uint64_t next_handle_id = 1;
  std::uint64_t next_task_id = 1;
  std::uint64_t epoch = 0;
  std::uint64_t in_flight = 0;    // submitted, not yet finished
  std::uint64_t width = 0;        // runnable or running right now
  std::map<std::string, std::uint64_t> submitted;
  std::map<std::string, std::uint64_t> completed;
  std::uint64_t max_width = 0;
  std::set<std::string> failed_tags;
};

RuntimeImpl::RuntimeImpl(unsigned workers) {
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  pool.reserve(workers);
  for (unsigned i = 0; i < workers; ++i) {
    pool.emplace_back([this] { worker_loop(); });
  }
}

RuntimeImpl::~RuntimeImpl() {
  {
    std::unique_lock lk(m);
    cv_done.wait(lk, [this] { return in_flight == 0; });
    stopping = true;
  }
  cv_work.notify_all();
  for (auto& t : pool) {
    t.join();
  }
}

Handle RuntimeImpl::put(Payload value) {
  auto st = std::make_shared<HandleState>();
  st->owner = this;
  st->status = HandleStatus::ready;
  st->value = std::move(value);
  {
    std::lock_guard lk(m);
    st->id = next_handle_id++;
  }
  return Handle(std::move(st));
}

std::vector<Handle> RuntimeImpl::submit(std::string tag, TaskFn fn,
                                        std::vector<Arg> inputs,
                                        std::size_t arity) {
  if (arity == 0) {
    throw std::invalid_argument("submit: output_arity must be at least 1");
  }
  auto check = [this](const Handle& h) {
    if (!h.state_) {
      throw std::invalid_argument("submit: default-constructed handle");
    }
    if (h.state_->owner != this) {
      throw std::invalid_argument("submit: handle belongs to another runtime");
    }
  };
  for (const auto& a : inputs) {
    if (a.kind_ == Arg::Kind::single) {
      check(a.handles_.front());
    } else if (a.kind_ == Arg::Kind::collection) {
      for (const auto& h : a.handles_) {
        check(h);
      }
    }
  }

  auto node = std::make_shared<TaskNode>();
  node->fn = std::move(fn);
  node->inputs.reserve(inputs.size());
  for (auto& a : inputs) {
    TaskNode::Input in;
    in.collection = (a.kind_ == Arg::Kind::collection);
    in.immediate = (a.kind_ == Arg::Kind::value);
    if (in.immediate) {
      in.value = std::move(a.value_);
    } else {
      in.handles.reserve(a.handles_.size());
      for (auto& h : a.handles_) {
        in.handles.push_back(h.state_);
      }
    }
    node->inputs.push_back(std::move(in));
  }

  std::vector<Handle> out;
  out.reserve(arity);
  {
    std::lock_guard lk(m);
    node->id = next_task_id++;
    node->tag = std::move(tag);
    node->epoch = epoch;
    node->outputs.reserve(arity);
    for (std::size_t i = 0; i < arity; ++i) {
      auto st = std::make_shared<HandleState>();
      st->owner = this;
      st->id = next_handle_id++;
      st->producer = node->id;
      node->outputs.push_back(st);
      out.push_back(Handle(st));
    }
    submitted[node->tag] += 1;
    ++in_flight;
    for (auto& in : node->inputs) {
      for (auto& hs : in.handles) {
        if (hs->status == HandleStatus::pending) {
          hs->waiters.push_back(node);
          ++node->blockers;
        }
      }
    }
    if (node->blockers == 0) {
      enqueue_locked(node);
      cv_work.notify_one();
    }
  }
  return out;
}

void RuntimeImpl::enqueue_locked(std::shared_ptr<TaskNode> node) {
  ready.push_back(std::move(node));
  ++width;
  max_width = std::max(max_width, width);
}

void RuntimeImpl::worker_loop() {
  std::unique_lock lk(m);
  for (;;) {
    cv_work.wait(lk, [this] { return stopping || !ready.empty(); });
    if (ready.empty()) {
      if (stopping) {
        return;
      }
      continue;
    }
    auto node = ready.front();
    ready.pop_front();
    lk.unlock();
    run_task(node);
    lk.lock();
  }
}

void RuntimeImpl::run_task(const std::shared_ptr<TaskNode>& node) {
  // Every input handle has settled by now and settled state is immutable,
  // so inputs can be read without the lock.
  const HandleState* failed_in = nullptr;
  for (const auto& in : node->inputs) {
    for (const auto& hs : in.handles) {
      if (hs->status == HandleStatus::failed) {
        failed_in = hs.get();
        break;
      }
    }
    if (failed_in) {
      break;
    }
  }

  bool ok = false;
  std::string fail_tag;
  std::string fail_msg;
  std::vector<Payload> results;
  if (failed_in) {
    fail_tag = failed_in->fail_tag;
    fail_msg = failed_in->fail_msg;
  } else {
    std::vector<TaskInput> args;
    args.reserve(node->inputs.size());
    for (const auto& in : node->inputs) {
      TaskInput ti;
      ti.collection_ = in.collection;
      if (in.immediate) {
        ti.payloads_.push_back(in.value);
      } else {
        ti.payloads_.reserve(in.handles.size());
        for (const auto& hs : in.handles) {
          ti.payloads_.push_back(hs->value);
        }
      }
      args.push_back(std::move(ti));
    }
    try {
      results = node->fn(args);
      if (results.size() != node->outputs.size()) {
        throw std::logic_error("task produced " +
                               std::to_string(results.size()) +
                               " outputs, expected " +
                               std::to_string(node->outputs.size()));
      }
      ok = true;
    } catch (const std::exception& e) {
      fail_tag = node->tag;
      fail_msg = e.what();
    } catch (...) {
      fail_tag = node->tag;
      fail_msg = "unknown error";
    }
  }

  std::vector<std::shared_ptr<TaskNode>> unblocked;
  {
    std::lock_guard lk(m);
    --width; // this task no longer occupies a slot; do this before waking waiters
    for (std::size_t i = 0; i < node->outputs.size(); ++i) {
      auto& st = *node->outputs[i];
      if (ok) {
        st.status = HandleStatus::ready;
        st.value = std::move(results[i]);
      } else {
        st.status = HandleStatus::failed;
        st.fail_tag = fail_tag;
        st.fail_msg = fail_msg;
      }
      for (auto& w : st.waiters) {
        if (--w->blockers == 0) {
          enqueue_locked(w);
          unblocked.push_back(w);
        }
      }
      st.waiters.clear();
    }
    if (!ok) {
      failed_tags.insert(fail_tag);
    }
    if (node->epoch == epoch) {
      completed[node->tag] += 1;
    }
    --in_flight;
  }
  for (std::size_t i = 0; i < unblocked.size(); ++i) {
    cv_work.notify_one();
  }
  cv_done.notify_all();
}

Payload RuntimeImpl::fetch(const Handle& h) {
  if (!h.state_) {
    throw std::invalid_argument("fetch: default-constructed handle");
  }
  if (h.state_->owner != this) {
    throw std::invalid_argument("fetch: handle belongs to another runtime");
  }
  std::unique_lock lk(m);
  auto& st = *h.state_;
  cv_done.wait(lk, [&st] { return st.status != HandleStatus::pending; });
  if (st.status == HandleStatus::failed) {
    throw TaskError(st.fail_tag, "task '" + st.fail_tag + "' failed: " + st.fail_msg);
  }
  return st.value;
}

void RuntimeImpl::barrier() {
  std::unique_lock lk(m);
  cv_done.wait(lk, [this] { return in_flight == 0; });
  if (!failed_tags.empty()) {
    std::string tags;
    for (const auto& t : failed_tags) {
      if (!tags.empty()) {
        tags += ", ";
      }
      tags += t;
    }
    throw TaskError(tags, "barrier: failed tasks: " + tags);
  }
}

RuntimeStats RuntimeImpl::stats() {
  std::lock_guard lk(m);
  RuntimeStats s;
  s.submitted = submitted;
  s.completed = completed;
  s.max_graph_width = max_width;
  return s;
}

void RuntimeImpl::reset_stats() {
  std::lock_guard lk(m);
  ++epoch;
  submitted.clear();
  completed.clear();
  max_width = width;
}

} // namespace detail

std::uint64_t Handle::id() const {
  if (!state_) {
    throw std::logic_error("id: default-constructed handle");
  }
  return state_->id;
}

std::uint64_t Handle::producer_task() const {
  if (!state_) {
    throw std::logic_error("producer_task: default-constructed handle");
  }
  return state_->producer;
}

const Payload& TaskInput::value() const {
  if (collection_ || payloads_.size() != 1) {
    throw std::logic_error("value: argument is a collection");
  }
  return payloads_.front();
}

const std::vector<Payload>& TaskInput::items() const {
  if (!collection_) {
    throw std::logic_error("items: argument is not a collection");
  }
  return payloads_;
}

Arg Arg::value(Payload v) {
  Arg a;
  a.kind_ = Kind::value;
  a.value_ = std::move(v);
  return a;
}

Arg Arg::handle(Handle h) {
  Arg a;
  a.kind_ = Kind::single;
  a.handles_.push_back(std::move(h));
  return a;
}

Arg Arg::collection(std::vector<Handle> elements) {
  Arg a;
  a.kind_ = Kind::collection;
  a.handles_ = std::move(elements);
  return a;
}

std::uint64_t RuntimeStats::submitted_for(const std::string& op_tag) const {
  auto it = submitted.find(op_tag);
  return it == submitted.end() ? 0 : it->second;
}

std::uint64_t RuntimeStats::completed_for(const std::string& op_tag) const {
  auto it = completed.find(op_tag);
  return it == completed.end() ? 0 : it->second;
}

std::uint64_t RuntimeStats::total_submitted() const {
  std::uint64_t n = 0;
  for (const auto& [tag, count] : submitted) {
    n += count;
  }
  return n;
}

std::uint64_t RuntimeStats::total_completed() const {
  std::uint64_t n = 0;
  for (const auto& [tag, count] : completed) {
    n += count;
  }
  return n;
}

TaskRuntime::TaskRuntime(unsigned workers)
    : impl_(std::make_unique<detail::RuntimeImpl>(workers)) {}

TaskRuntime::~TaskRuntime() = default;

unsigned TaskRuntime::worker_count() const noexcept {
  return static_cast<unsigned>(impl_->pool.size());
}

Handle TaskRuntime::put(Payload value) { return impl_->put(std::move(value)); }

std::vector<Handle> TaskRuntime::submit(std::string op_tag, TaskFn fn,
                                        std::vector<Arg> inputs,
                                        std::size_t output_arity) {
  return impl_->submit(std::move(op_tag), std::move(fn), std::move(inputs),
                       output_arity);
}

Payload TaskRuntime::fetch(const Handle& h) const { return impl_->fetch(h); }

void TaskRuntime::barrier() const { impl_->barrier(); }

RuntimeStats TaskRuntime::stats() const { return impl_->stats(); }

void TaskRuntime::reset_stats() { impl_->reset_stats(); }

} // namespace da
