// SVR4-style backend on ucontext. swapcontext saves and restores the signal
// mask through the OS, so every switch enters the kernel.

#include <ucontext.h>

#include <cerrno>
#include <cstdint>
#include <cstring>

#include "backends.hpp"
#include "fiberrt/error.hpp"

namespace fiberrt::detail {

namespace {

struct UcState {
  ucontext_t uc;
  ContextEntry entry = nullptr;
  void* arg = nullptr;
};

// makecontext only passes ints; the pointer travels as two halves.
void portable_trampoline(unsigned hi, unsigned lo) {
  auto bits = (std::uintptr_t(hi) << 32) | std::uintptr_t(lo);
  auto* st = reinterpret_cast<UcState*>(bits);
  st->entry(st->arg);
  context_entry_returned();
}

class PortableBackend final : public Backend {
 public:
  PortableBackend()
      : Backend({BackendKind::portable, "portable",
                 /*enters_kernel_per_switch=*/true,
                 /*preserves_signal_mask=*/true}) {}

 private:
  void* make(StackRegion& stack, ContextEntry entry, void* arg) override {
    auto* st = new UcState;
    st->entry = entry;
    st->arg = arg;
    if (getcontext(&st->uc) != 0) {
      delete st;
      throw Error(Errc::AllocationFailure, std::string("getcontext: ") + std::strerror(errno));
    }
    st->uc.uc_stack.ss_sp = stack.usable_base();
    st->uc.uc_stack.ss_size = stack.usable_size();
    st->uc.uc_link = nullptr;
    auto bits = reinterpret_cast<std::uintptr_t>(st);
    makecontext(&st->uc, reinterpret_cast<void (*)()>(portable_trampoline), 2,
                unsigned(bits >> 32), unsigned(bits & 0xFFFF'FFFFu));
    return st;
  }

  void* make_root() override { return new UcState; }

  void swap_impl(void* from, void* to) override {
    swapcontext(&static_cast<UcState*>(from)->uc, &static_cast<UcState*>(to)->uc);
  }

  [[noreturn]] void set_impl(void* to) override {
    setcontext(&static_cast<UcState*>(to)->uc);
    context_entry_returned();  // setcontext only returns on failure
  }

  void destroy_impl(void* impl, ContextState) noexcept override { delete static_cast<UcState*>(impl); }
};

}  // namespace

Backend* portable_backend() {
  static PortableBackend instance;
  return &instance;
}

}  // namespace fiberrt::detail
