#include "fiberrt/runtime.hpp"

#include <cstdio>
#include <cstdlib>
#include <utility>

#include "backends.hpp"

namespace fiberrt {

void detail_process_trampoline(void* raw) {
  auto* pd = static_cast<ProcessDescriptor*>(raw);
  Runtime& rt = *pd->owner;
  rt.collect_retired();  // first activation may follow an exit handoff
  try {
    if (pd->entry_fn != nullptr) {
      pd->entry_fn(rt, pd->entry_arg);
    } else {
      pd->entry_closure(rt);
    }
  } catch (const detail::ContextUnwindSignal&) {
    throw;  // backend thread unwinding, not a user error
  } catch (...) {
    // Delivered to the lane owner when run_until_idle returns.
    rt.pending_exception_ = std::current_exception();
  }
  rt.exit_current();
}

Runtime::Runtime(RuntimeConfig cfg) : cfg_(std::move(cfg)) {
  backend_ = &backend_select(cfg_.backend);
  idle_ctx_ = context_root();
  trace_.enable(cfg_.tracing);
}

Runtime::Runtime(std::string_view backend_name, std::size_t default_stack_bytes)
    : Runtime(RuntimeConfig{.backend = std::string(backend_name),
                            .default_stack_bytes = default_stack_bytes}) {}

Runtime::~Runtime() = default;

StackRegion Runtime::obtain_stack(std::size_t bytes) {
  if (bytes == cfg_.default_stack_bytes && !pool_.empty()) {
    StackRegion region = std::move(pool_.back());
    pool_.pop_back();
    return region;
  }
  return stack_new(bytes);
}

std::uint64_t Runtime::spawn_descriptor(std::unique_ptr<ProcessDescriptor> pd) {
  pd->pid = next_pid_++;
  pd->state = ProcState::Ready;
  pd->owner = this;
  pd->ctx = context_init(pd->stack, detail_process_trampoline, pd.get());
  std::uint64_t pid = pd->pid;
  ready_.push(pd.get());
  procs_.emplace(pid, std::move(pd));
  ++spawned_;
  if (trace_.enabled()) trace_.emit(TraceEvent::Spawn, pid);
  return pid;
}

std::uint64_t Runtime::spawn(ProcessEntry entry, Word arg, std::uint32_t resource_id) {
  if (entry == nullptr) throw Error(Errc::InvalidArgument, "null process entry");
  auto pd = std::make_unique<ProcessDescriptor>();
  pd->resource_id = resource_id;
  pd->entry_fn = entry;
  pd->entry_arg = arg;
  pd->stack = obtain_stack(cfg_.default_stack_bytes);
  return spawn_descriptor(std::move(pd));
}

std::uint64_t Runtime::spawn(std::function<void(Runtime&)> body, std::uint32_t resource_id) {
  return spawn_with_stack(std::move(body), cfg_.default_stack_bytes, resource_id);
}

std::uint64_t Runtime::spawn_with_stack(std::function<void(Runtime&)> body, std::size_t stack_bytes,
                                        std::uint32_t resource_id) {
  if (!body) throw Error(Errc::InvalidArgument, "empty process body");
  auto pd = std::make_unique<ProcessDescriptor>();
  pd->resource_id = resource_id;
  pd->entry_closure = std::move(body);
  pd->stack = obtain_stack(stack_bytes);
  return spawn_descriptor(std::move(pd));
}

void Runtime::check_guards(ProcessDescriptor* cur) {
  if (stack_check(cur->stack) != StackCheck::Intact) {
    std::fprintf(stderr, "fiberrt: stack fault on pid %llu: %s\n",
                 static_cast<unsigned long long>(cur->pid), stack_check_name(stack_check(cur->stack)));
    std::abort();
  }
}

void Runtime::collect_retired() {
  if (retired_ == nullptr) return;
  std::unique_ptr<ProcessDescriptor> pd = std::move(retired_);
  if (cfg_.stack_pool_enabled && pd->stack.size() == cfg_.default_stack_bytes &&
      pool_.size() < cfg_.stack_pool_cap) {
    pool_.push_back(std::move(pd->stack));
  }
}

// Hands control to the head of the ready queue, or back to the lane owner
// when nothing is runnable. The caller must already be queued (Ready),
// parked (Blocked), or retired (Ended).
void Runtime::switch_from(ProcessDescriptor* cur) {
  check_guards(cur);
  ++switches_;
  ProcessDescriptor* next = ready_.pop();
  if (next != nullptr) {
    next->state = ProcState::Running;
    current_ = next;
    if (trace_.enabled()) trace_.emit(TraceEvent::Run, next->pid);
    context_swap(cur->ctx, next->ctx);
  } else {
    current_ = nullptr;
    context_swap(cur->ctx, idle_ctx_);
  }
  collect_retired();
}

void Runtime::yield() {
  ProcessDescriptor* cur = current_;
  if (cur == nullptr) throw Error(Errc::InvalidArgument, "yield outside a green process");
  if (ready_.empty()) return;
  cur->state = ProcState::Ready;
  ready_.push(cur);
  if (trace_.enabled()) trace_.emit(TraceEvent::Yield, cur->pid);
  switch_from(cur);
}

void Runtime::block_current(WaitQueue& wait_queue) {
  ProcessDescriptor* cur = current_;
  if (cur == nullptr) throw Error(Errc::InvalidArgument, "block outside a green process");
  cur->state = ProcState::Blocked;
  wait_queue.push(cur);
  if (trace_.enabled()) trace_.emit(TraceEvent::Block, cur->pid);
  switch_from(cur);
}

std::optional<std::uint64_t> Runtime::unblock_first(WaitQueue& wait_queue) {
  ProcessDescriptor* pd = wait_queue.pop();
  if (pd == nullptr) return std::nullopt;
  pd->state = ProcState::Ready;
  if (cfg_.lifo_unblock) {
    ready_.push_front(pd);
  } else {
    ready_.push(pd);
  }
  if (trace_.enabled()) trace_.emit(TraceEvent::Unblock, pd->pid);
  return pd->pid;
}

void Runtime::exit_current() {
  ProcessDescriptor* cur = current_;
  if (cur == nullptr) throw Error(Errc::InvalidArgument, "exit outside a green process");
  check_guards(cur);
  cur->state = ProcState::Ended;
  ++ended_;
  if (trace_.enabled()) trace_.emit(TraceEvent::Exit, cur->pid);

  auto it = procs_.find(cur->pid);
  retired_ = std::move(it->second);
  procs_.erase(it);

  ++switches_;
  ProcessDescriptor* next = ready_.pop();
  if (next != nullptr) {
    next->state = ProcState::Running;
    current_ = next;
    if (trace_.enabled()) trace_.emit(TraceEvent::Run, next->pid);
    context_set(next->ctx);
  }
  current_ = nullptr;
  context_set(idle_ctx_);
}

RunSummary Runtime::run_until_idle() {
  if (in_run_ || current_ != nullptr) {
    throw Error(Errc::InvalidArgument, "run_until_idle is lane-owner only");
  }
  in_run_ = true;
  while (!ready_.empty()) {
    ProcessDescriptor* next = ready_.pop();
    next->state = ProcState::Running;
    current_ = next;
    ++switches_;
    if (trace_.enabled()) trace_.emit(TraceEvent::Run, next->pid);
    context_swap(idle_ctx_, next->ctx);
    collect_retired();
  }
  in_run_ = false;
  if (pending_exception_ != nullptr) {
    std::exception_ptr e = std::exchange(pending_exception_, nullptr);
    std::rethrow_exception(e);
  }
  if (live_count() > 0) {
    throw Error(Errc::DeadlockDetected,
                std::to_string(live_count()) + " live process(es) blocked with an empty ready queue");
  }
  return {spawned_, ended_, switches_};
}

bool Runtime::pool_guards_intact() const noexcept {
#ifdef FIBERRT_NO_STACK_GUARDS
  return true;
#else
  for (const auto& region : pool_) {
    if (stack_check(region) != StackCheck::Intact) return false;
  }
  return true;
#endif
}

}  // namespace fiberrt
