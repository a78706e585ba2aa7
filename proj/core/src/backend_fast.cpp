// Hand-written register switch, the analog of a libpthread-internal
// _swapcontext_u: saves callee-saved state only and never enters the kernel.

#include <cstdint>

#include "backends.hpp"
#include "fiberrt/error.hpp"

extern "C" {
void fiberrt_fast_swap(void** save_sp, void* resume_sp);
[[noreturn]] void fiberrt_fast_set(void* resume_sp);
void fiberrt_fast_trampoline();
[[noreturn]] void fiberrt_fast_entry_returned() { fiberrt::detail::context_entry_returned(); }
}

namespace fiberrt::detail {

namespace {

struct FastState {
  void* sp = nullptr;
};

#if defined(__x86_64__)

// Mirrors the frame laid out by fast_switch_x86_64.S.
constexpr std::size_t kFrameWords = 9;

void* build_initial_frame(std::byte* usable_base, std::size_t usable_size, ContextEntry entry, void* arg) {
  auto top = reinterpret_cast<std::uintptr_t>(usable_base + usable_size) & ~std::uintptr_t(15);
  auto* frame = reinterpret_cast<std::uint64_t*>(top) - kFrameWords;
  frame[8] = 0;                                                    // backtrace stopper
  frame[7] = reinterpret_cast<std::uint64_t>(&fiberrt_fast_trampoline);  // ret target
  frame[6] = 0;                                                    // rbp
  frame[5] = 0;                                                    // rbx
  frame[4] = reinterpret_cast<std::uint64_t>(entry);               // r12
  frame[3] = reinterpret_cast<std::uint64_t>(arg);                 // r13
  frame[2] = 0;                                                    // r14
  frame[1] = 0;                                                    // r15
  frame[0] = 0x037F | (std::uint64_t(0x1F80) << 32);               // fcw, mxcsr defaults
  return frame;
}

#elif defined(__aarch64__)

constexpr std::size_t kFrameWords = 20;

void* build_initial_frame(std::byte* usable_base, std::size_t usable_size, ContextEntry entry, void* arg) {
  auto top = reinterpret_cast<std::uintptr_t>(usable_base + usable_size) & ~std::uintptr_t(15);
  auto* frame = reinterpret_cast<std::uint64_t*>(top) - kFrameWords;
  for (std::size_t i = 0; i < kFrameWords; ++i) frame[i] = 0;
  frame[0] = reinterpret_cast<std::uint64_t>(entry);  // x19
  frame[1] = reinterpret_cast<std::uint64_t>(arg);    // x20
  frame[11] = reinterpret_cast<std::uint64_t>(&fiberrt_fast_trampoline);  // x30
  return frame;
}

#else
#error "fast backend not implemented for this architecture"
#endif

class FastBackend final : public Backend {
 public:
  FastBackend()
      : Backend({BackendKind::fast, "fast",
                 /*enters_kernel_per_switch=*/false,
                 /*preserves_signal_mask=*/false}) {}

 private:
  void* make(StackRegion& stack, ContextEntry entry, void* arg) override {
    auto* st = new FastState;
    st->sp = build_initial_frame(stack.usable_base(), stack.usable_size(), entry, arg);
    return st;
  }

  void* make_root() override { return new FastState; }

  void swap_impl(void* from, void* to) override {
    fiberrt_fast_swap(&static_cast<FastState*>(from)->sp, static_cast<FastState*>(to)->sp);
  }

  [[noreturn]] void set_impl(void* to) override { fiberrt_fast_set(static_cast<FastState*>(to)->sp); }

  void destroy_impl(void* impl, ContextState) noexcept override { delete static_cast<FastState*>(impl); }
};

}  // namespace

Backend* fast_backend() {
  static FastBackend instance;
  return &instance;
}

}  // namespace fiberrt::detail
