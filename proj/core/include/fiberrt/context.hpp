#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fiberrt/stack.hpp"

namespace fiberrt {

enum class BackendKind : std::uint8_t { fast, portable, threadpark };

struct BackendInfo {
  BackendKind kind;
  std::string_view name;
  bool enters_kernel_per_switch;
  bool preserves_signal_mask;
};

enum class ContextState : std::uint8_t { Fresh, Suspended, Running, Dead };

/// Entry routine for a context: one word of argument, must never return
/// (leave via context_swap/context_set; the scheduler's trampoline ends in
/// process exit).
using ContextEntry = void (*)(void*);

class ExecutionContext;

/// One context-switch implementation. Obtained through backend_select();
/// contexts are bound to the backend that created them.
class Backend {
 public:
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  const BackendInfo& info() const noexcept { return info_; }

 protected:
  explicit Backend(BackendInfo info) : info_(info) {}

 private:
  friend ExecutionContext context_root();
  friend ExecutionContext context_init(StackRegion& stack, ContextEntry entry, void* arg);
  friend void context_swap(ExecutionContext& save_into, ExecutionContext& resume);
  [[noreturn]] friend void context_set(ExecutionContext& resume);
  friend class ExecutionContext;

  virtual void* make(StackRegion& stack, ContextEntry entry, void* arg) = 0;
  virtual void* make_root() = 0;
  virtual void swap_impl(void* from, void* to) = 0;
  [[noreturn]] virtual void set_impl(void* to) = 0;
  virtual void destroy_impl(void* impl, ContextState state) noexcept = 0;

  BackendInfo info_;
};

/// Saved machine state of one green process. Opaque: only the backend that
/// produced it interprets the state blob.
class ExecutionContext {
 public:
  ExecutionContext() = default;
  ~ExecutionContext();
  ExecutionContext(ExecutionContext&& other) noexcept;
  ExecutionContext& operator=(ExecutionContext&& other) noexcept;
  ExecutionContext(const ExecutionContext&) = delete;
  ExecutionContext& operator=(const ExecutionContext&) = delete;

  bool valid() const noexcept { return impl_ != nullptr; }
  ContextState state() const noexcept { return state_; }
  BackendKind backend() const noexcept { return kind_; }

 private:
  friend ExecutionContext context_root();
  friend ExecutionContext context_init(StackRegion& stack, ContextEntry entry, void* arg);
  friend void context_swap(ExecutionContext& save_into, ExecutionContext& resume);
  [[noreturn]] friend void context_set(ExecutionContext& resume);
  friend void detail_force_backend_tag(ExecutionContext&, BackendKind) noexcept;

  ExecutionContext(Backend* owner, BackendKind kind, ContextState state, void* impl)
      : owner_(owner), kind_(kind), state_(state), impl_(impl) {}

  void release() noexcept;

  Backend* owner_ = nullptr;
  BackendKind kind_ = BackendKind::portable;
  ContextState state_ = ContextState::Dead;
  void* impl_ = nullptr;
};

/// Backends compiled into this build, in selection-preference order.
/// Always contains at least the portable backend.
std::vector<BackendInfo> backend_list();

bool backend_available(std::string_view name) noexcept;

/// Selects the process-global backend. Must happen while no context exists;
/// once every context has been destroyed the selection may be changed.
const Backend& backend_select(std::string_view name);

/// Currently selected backend, or nullptr before the first selection.
const Backend* backend_selected() noexcept;

/// Number of live ExecutionContext objects (selection is locked while > 0).
std::size_t context_live_count() noexcept;

/// Captures the calling OS thread as a Running root context.
ExecutionContext context_root();

/// Builds a fresh context that will run entry(arg) on the given stack when
/// first resumed. The region must check Intact.
ExecutionContext context_init(StackRegion& stack, ContextEntry entry, void* arg);

/// Saves the caller into save_into and resumes the target. Returns when a
/// later switch resumes save_into.
void context_swap(ExecutionContext& save_into, ExecutionContext& resume);

/// One-way transfer: the caller's context is abandoned and becomes dead.
[[noreturn]] void context_set(ExecutionContext& resume);

/// Test hook: forges the backend tag of a context so the mismatch guard can
/// be exercised. Never used outside tests.
void detail_force_backend_tag(ExecutionContext& ctx, BackendKind kind) noexcept;

}  // namespace fiberrt
