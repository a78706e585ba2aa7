// Portability-floor backend: every context is an OS thread parked on a
// semaphore, and a switch is wake-target-then-park-self. Exactly one thread
// is awake at a time, so the single-lane contract holds externally.

#include <semaphore.h>

#include <atomic>
#include <thread>

#include "backends.hpp"
#include "fiberrt/error.hpp"

namespace fiberrt::detail {

namespace {

struct ContextExitSignal : ContextUnwindSignal {};
struct ContextCancelSignal : ContextUnwindSignal {};

struct ParkState {
  sem_t wakeup;
  std::thread thr;
  ContextEntry entry = nullptr;
  void* arg = nullptr;
  std::atomic<bool> cancel{false};
  bool root = false;
};

thread_local ParkState* t_self = nullptr;

void park(ParkState* st) {
  while (sem_wait(&st->wakeup) != 0) {
  }
  if (st->cancel.load(std::memory_order_relaxed)) throw ContextCancelSignal{};
}

void thread_main(ParkState* st) {
  t_self = st;
  try {
    park(st);  // first activation
    st->entry(st->arg);
    context_entry_returned();
  } catch (const ContextExitSignal&) {
  } catch (const ContextCancelSignal&) {
  }
}

class ThreadparkBackend final : public Backend {
 public:
  ThreadparkBackend()
      : Backend({BackendKind::threadpark, "threadpark",
                 /*enters_kernel_per_switch=*/true,
                 /*preserves_signal_mask=*/false}) {}

 private:
  void* make(StackRegion&, ContextEntry entry, void* arg) override {
    auto* st = new ParkState;
    sem_init(&st->wakeup, 0, 0);
    st->entry = entry;
    st->arg = arg;
    st->thr = std::thread(thread_main, st);
    return st;
  }

  void* make_root() override {
    auto* st = new ParkState;
    sem_init(&st->wakeup, 0, 0);
    st->root = true;
    return st;
  }

  void swap_impl(void* from, void* to) override {
    sem_post(&static_cast<ParkState*>(to)->wakeup);
    park(static_cast<ParkState*>(from));
  }

  [[noreturn]] void set_impl(void* to) override {
    sem_post(&static_cast<ParkState*>(to)->wakeup);
    if (t_self != nullptr && !t_self->root) throw ContextExitSignal{};
    // Abandoning the root OS thread: nothing can ever resume it.
    sem_t grave;
    sem_init(&grave, 0, 0);
    for (;;) sem_wait(&grave);
  }

  void destroy_impl(void* impl, ContextState state) noexcept override {
    auto* st = static_cast<ParkState*>(impl);
    if (st->thr.joinable()) {
      if (state == ContextState::Fresh || state == ContextState::Suspended) {
        st->cancel.store(true, std::memory_order_relaxed);
        sem_post(&st->wakeup);
      }
      st->thr.join();
    }
    sem_destroy(&st->wakeup);
    delete st;
  }
};

}  // namespace

Backend* threadpark_backend() {
  static ThreadparkBackend instance;
  return &instance;
}

}  // namespace fiberrt::detail
