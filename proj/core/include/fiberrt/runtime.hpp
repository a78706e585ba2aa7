#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fiberrt/context.hpp"
#include "fiberrt/error.hpp"
#include "fiberrt/stack.hpp"
#include "fiberrt/trace.hpp"

namespace fiberrt {

class Runtime;

/// Fixed-width argument/payload word used throughout the runtime.
using Word = std::uint64_t;

enum class ProcState : std::uint8_t { Ready, Running, Blocked, Ended };

using ProcessEntry = void (*)(Runtime&, Word);

/// Scheduler-visible green process. Internal to the runtime and the sync
/// primitives; user code holds pids only.
struct ProcessDescriptor {
  std::uint64_t pid = 0;
  ProcState state = ProcState::Ready;
  std::uint32_t resource_id = 0;
  Runtime* owner = nullptr;

  StackRegion stack;
  ExecutionContext ctx;

  // Entry, either a plain routine + word or a closure.
  ProcessEntry entry_fn = nullptr;
  Word entry_arg = 0;
  std::function<void(Runtime&)> entry_closure;

  // Intrusive link: a process sits in exactly one queue while Ready/Blocked.
  ProcessDescriptor* queue_link = nullptr;

  // Filled by a sender when a blocked receiver is handed an invocation.
  void* pending_recv = nullptr;
};

/// Intrusive FIFO of process descriptors (the ready queue and every sync
/// object's wait queue).
class WaitQueue {
 public:
  bool empty() const noexcept { return head_ == nullptr; }

  void push(ProcessDescriptor* pd) noexcept {
    pd->queue_link = nullptr;
    if (tail_ == nullptr) {
      head_ = tail_ = pd;
    } else {
      tail_->queue_link = pd;
      tail_ = pd;
    }
  }

  void push_front(ProcessDescriptor* pd) noexcept {
    pd->queue_link = head_;
    head_ = pd;
    if (tail_ == nullptr) tail_ = pd;
  }

  ProcessDescriptor* front() const noexcept { return head_; }

  ProcessDescriptor* pop() noexcept {
    ProcessDescriptor* pd = head_;
    if (pd != nullptr) {
      head_ = pd->queue_link;
      if (head_ == nullptr) tail_ = nullptr;
      pd->queue_link = nullptr;
    }
    return pd;
  }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (ProcessDescriptor* p = head_; p != nullptr; p = p->queue_link) ++n;
    return n;
  }

 private:
  ProcessDescriptor* head_ = nullptr;
  ProcessDescriptor* tail_ = nullptr;
};

struct RunSummary {
  std::uint64_t spawned = 0;
  std::uint64_t ended = 0;
  std::uint64_t switches = 0;
};

struct RuntimeConfig {
  std::string backend = "portable";
  std::size_t default_stack_bytes = 64 * 1024;
  std::size_t stack_pool_cap = 64;
  bool stack_pool_enabled = true;
  bool tracing = false;
  // Test knob: wake to the ready-queue head instead of the tail, breaking
  // FIFO fairness on purpose so oracle sensitivity can be exercised.
  bool lifo_unblock = false;
};

/// Cooperative FIFO scheduler for one execution lane. Exactly one green
/// process runs at a time; suspension hands control directly to the next
/// ready process and falls back to the lane owner's context only when the
/// ready queue is empty.
class Runtime {
 public:
  explicit Runtime(RuntimeConfig cfg = {});
  Runtime(std::string_view backend_name, std::size_t default_stack_bytes);
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  std::uint64_t spawn(ProcessEntry entry, Word arg, std::uint32_t resource_id = 0);
  std::uint64_t spawn(std::function<void(Runtime&)> body, std::uint32_t resource_id = 0);
  /// Spawn with a per-process stack size override.
  std::uint64_t spawn_with_stack(std::function<void(Runtime&)> body, std::size_t stack_bytes,
                                 std::uint32_t resource_id = 0);

  /// Moves the caller to the ready tail and resumes the head. No-op when the
  /// ready queue is empty.
  void yield();

  /// Parks the running process Blocked on the given queue.
  void block_current(WaitQueue& wait_queue);

  /// Moves the oldest waiter to the ready tail; returns its pid.
  std::optional<std::uint64_t> unblock_first(WaitQueue& wait_queue);

  [[noreturn]] void exit_current();

  /// Drains the ready queue. Throws DeadlockDetected when live processes
  /// remain but none is runnable.
  RunSummary run_until_idle();

  std::uint64_t spawned_total() const noexcept { return spawned_; }
  std::uint64_t ended_total() const noexcept { return ended_; }
  std::uint64_t switch_count() const noexcept { return switches_; }
  std::uint64_t live_count() const noexcept { return spawned_ - ended_; }

  /// Running process, or nullptr from the lane owner.
  ProcessDescriptor* current() noexcept { return current_; }
  std::uint64_t current_pid() const noexcept { return current_ ? current_->pid : 0; }
  std::uint32_t current_resource() const noexcept { return current_ ? current_->resource_id : 0; }

  const Backend& backend() const noexcept { return *backend_; }
  const RuntimeConfig& config() const noexcept { return cfg_; }
  TraceLog& trace() noexcept { return trace_; }

  std::size_t stack_pool_size() const noexcept { return pool_.size(); }
  bool pool_guards_intact() const noexcept;

 private:
  friend void detail_process_trampoline(void* raw);

  std::uint64_t spawn_descriptor(std::unique_ptr<ProcessDescriptor> pd);
  StackRegion obtain_stack(std::size_t bytes);
  void switch_from(ProcessDescriptor* cur);
  void collect_retired();
  void check_guards(ProcessDescriptor* cur);

  RuntimeConfig cfg_;
  const Backend* backend_ = nullptr;
  ExecutionContext idle_ctx_;
  WaitQueue ready_;
  ProcessDescriptor* current_ = nullptr;
  std::unordered_map<std::uint64_t, std::unique_ptr<ProcessDescriptor>> procs_;
  std::unique_ptr<ProcessDescriptor> retired_;
  std::vector<StackRegion> pool_;
  TraceLog trace_;

  std::uint64_t next_pid_ = 1;
  std::uint64_t spawned_ = 0;
  std::uint64_t ended_ = 0;
  std::uint64_t switches_ = 0;
  bool in_run_ = false;
  std::exception_ptr pending_exception_;
};

}  // namespace fiberrt
