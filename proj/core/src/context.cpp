#include "fiberrt/context.hpp"

#include <cassert>
#include <cstdio>
#include <cstdlib>

#include "backends.hpp"
#include "fiberrt/error.hpp"

namespace fiberrt {

namespace {

Backend* g_selected = nullptr;
std::size_t g_live_contexts = 0;
ExecutionContext* g_current = nullptr;

struct Candidate {
  std::string_view name;
  Backend* (*factory)();
};

// Selection-preference order; the portable backend is the always-available
// floor.
constexpr std::string_view kKnownNames[] = {"fast", "portable", "threadpark"};

Backend* factory_for(std::string_view name) {
#if defined(FIBERRT_HAVE_FAST_BACKEND)
  if (name == "fast") return detail::fast_backend();
#endif
  if (name == "portable") return detail::portable_backend();
  if (name == "threadpark") return detail::threadpark_backend();
  return nullptr;
}

bool known_name(std::string_view name) {
  for (auto n : kKnownNames)
    if (n == name) return true;
  return false;
}

}  // namespace

namespace detail {

[[noreturn]] void context_entry_returned() {
  std::fputs("fiberrt: context entry routine returned without switching away\n", stderr);
  std::abort();
}

}  // namespace detail

std::vector<BackendInfo> backend_list() {
  std::vector<BackendInfo> out;
  for (auto name : kKnownNames) {
    if (Backend* b = factory_for(name)) out.push_back(b->info());
  }
  return out;
}

bool backend_available(std::string_view name) noexcept {
  return factory_for(name) != nullptr;
}

const Backend& backend_select(std::string_view name) {
  if (!known_name(name)) {
    throw Error(Errc::UnknownBackend, "no backend named '" + std::string(name) + "'");
  }
  Backend* b = factory_for(name);
  if (b == nullptr) {
    throw Error(Errc::BackendUnavailable, "backend '" + std::string(name) + "' is not compiled into this build");
  }
  if (g_selected != b && g_live_contexts > 0) {
    throw Error(Errc::SelectionAfterInit, "cannot change backend while contexts exist");
  }
  g_selected = b;
  return *b;
}

const Backend* backend_selected() noexcept { return g_selected; }

std::size_t context_live_count() noexcept { return g_live_contexts; }

ExecutionContext::~ExecutionContext() { release(); }

void ExecutionContext::release() noexcept {
  if (impl_ == nullptr) return;
  if (g_current == this) g_current = nullptr;
  owner_->destroy_impl(impl_, state_);
  impl_ = nullptr;
  --g_live_contexts;
}

ExecutionContext::ExecutionContext(ExecutionContext&& other) noexcept
    : owner_(other.owner_), kind_(other.kind_), state_(other.state_), impl_(other.impl_) {
  if (g_current == &other) g_current = this;
  other.impl_ = nullptr;
}

ExecutionContext& ExecutionContext::operator=(ExecutionContext&& other) noexcept {
  if (this != &other) {
    release();
    owner_ = other.owner_;
    kind_ = other.kind_;
    state_ = other.state_;
    impl_ = other.impl_;
    if (g_current == &other) g_current = this;
    other.impl_ = nullptr;
  }
  return *this;
}

ExecutionContext context_root() {
  if (g_selected == nullptr) throw Error(Errc::InvalidArgument, "no backend selected");
  void* impl = g_selected->make_root();
  ++g_live_contexts;
  ExecutionContext ctx(g_selected, g_selected->info().kind, ContextState::Running, impl);
  g_current = &ctx;  // fixed up by the move into the caller's slot
  return ctx;
}

ExecutionContext context_init(StackRegion& stack, ContextEntry entry, void* arg) {
  if (g_selected == nullptr) throw Error(Errc::InvalidArgument, "no backend selected");
  if (entry == nullptr) throw Error(Errc::InvalidArgument, "null entry routine");
  if (!stack.valid() || stack_check(stack) != StackCheck::Intact) {
    throw Error(Errc::StackNotIntact, "refusing to build a context on a damaged stack");
  }
  void* impl = g_selected->make(stack, entry, arg);
  ++g_live_contexts;
  return ExecutionContext(g_selected, g_selected->info().kind, ContextState::Fresh, impl);
}

namespace {

Backend* check_transfer(const ExecutionContext& resume) {
  if (!resume.valid()) throw Error(Errc::InvalidArgument, "resume target is not a live context");
  if (g_selected == nullptr || resume.backend() != g_selected->info().kind) {
    throw Error(Errc::BackendMismatch, "context belongs to a different backend");
  }
  if (resume.state() == ContextState::Dead) throw Error(Errc::DeadContext, "cannot resume a dead context");
  if (resume.state() == ContextState::Running) {
    throw Error(Errc::InvalidArgument, "cannot resume the running context");
  }
  return g_selected;
}

}  // namespace

void context_swap(ExecutionContext& save_into, ExecutionContext& resume) {
  Backend* b = check_transfer(resume);
  if (!save_into.valid()) throw Error(Errc::InvalidArgument, "save slot is not a live context");
  if (save_into.backend() != resume.backend()) {
    throw Error(Errc::BackendMismatch, "contexts belong to different backends");
  }
  assert(g_current == nullptr || g_current == &save_into);
  save_into.state_ = ContextState::Suspended;
  resume.state_ = ContextState::Running;
  g_current = &resume;
  b->swap_impl(save_into.impl_, resume.impl_);
  // Back here only when some later transfer resumed save_into; its state and
  // g_current were updated by that resumer.
}

void context_set(ExecutionContext& resume) {
  Backend* b = check_transfer(resume);
  if (g_current != nullptr) g_current->state_ = ContextState::Dead;
  resume.state_ = ContextState::Running;
  g_current = &resume;
  b->set_impl(resume.impl_);
  std::abort();  // set_impl never returns
}

void detail_force_backend_tag(ExecutionContext& ctx, BackendKind kind) noexcept { ctx.kind_ = kind; }

}  // namespace fiberrt
