#include "fiberrt/bench.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstdio>

#include "fiberrt/context.hpp"
#include "fiberrt/error.hpp"
#include "fiberrt/runtime.hpp"
#include "fiberrt/sync.hpp"

namespace fiberrt::bench {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point t0, Clock::time_point t1) {
  return std::uint64_t(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
}

// The empty benchmark loop: the barrier keeps the loop alive without adding
// memory traffic.
inline void empty_loop(std::uint64_t iters) {
  for (std::uint64_t i = 0; i < iters; ++i) {
    asm volatile("");
  }
}

inline void consume(Word w) { asm volatile("" : : "r"(w)); }

// ---- kernel bodies ---------------------------------------------------------
// Each runs on a fresh Runtime: spawns its processes and drives them to idle.
// Spawn order is part of the kernel definition; the switch counts derived in
// the tests depend on it.

void k_loop_overhead(Runtime& rt, std::uint64_t iters) {
  rt.spawn([iters](Runtime&) { empty_loop(iters); });
  rt.run_until_idle();
}

void k_local_call(Runtime& rt, std::uint64_t iters) {
  Operation op(OpMode::Direct, 1, [](Runtime&, std::span<const Word> a) { return a[0] + 1; });
  rt.spawn(
      [iters, &op](Runtime& inner) {
        for (std::uint64_t i = 0; i < iters; ++i) consume(op_call(inner, op, {i}));
      },
      /*resource_id=*/1);
  rt.run_until_idle();
}

void k_inter_call(Runtime& rt, std::uint64_t iters) {
  Operation op(OpMode::Direct, 2, [](Runtime&, std::span<const Word> a) { return a[0] + 1; });
  rt.spawn(
      [iters, &op](Runtime& inner) {
        for (std::uint64_t i = 0; i < iters; ++i) consume(op_call(inner, op, {i}));
      },
      /*resource_id=*/1);
  rt.run_until_idle();
}

void k_inter_call_new_process(Runtime& rt, std::uint64_t iters) {
  Operation op(OpMode::Proc, 2, [](Runtime&, std::span<const Word> a) { return a[0] + 1; });
  rt.spawn(
      [iters, &op](Runtime& inner) {
        for (std::uint64_t i = 0; i < iters; ++i) consume(op_call(inner, op, {i}));
      },
      /*resource_id=*/1);
  rt.run_until_idle();
}

void trivial_process(Runtime&, Word) {}

void k_process_create_destroy(Runtime& rt, std::uint64_t iters) {
  rt.spawn([iters](Runtime& inner) {
    for (std::uint64_t i = 0; i < iters; ++i) {
      inner.spawn(trivial_process, 0);
      inner.yield();
    }
  });
  rt.run_until_idle();
}

void k_sem_p_only(Runtime& rt, std::uint64_t iters) {
  Semaphore s{std::int64_t(iters)};
  rt.spawn([iters, &s](Runtime& inner) {
    for (std::uint64_t i = 0; i < iters; ++i) sem_p(inner, s);
  });
  rt.run_until_idle();
}

void k_sem_v_only(Runtime& rt, std::uint64_t iters) {
  Semaphore s(0);
  rt.spawn([iters, &s](Runtime& inner) {
    for (std::uint64_t i = 0; i < iters; ++i) sem_v(inner, s);
  });
  rt.run_until_idle();
}

void k_sem_pair(Runtime& rt, std::uint64_t iters) {
  Semaphore s(1);
  rt.spawn([iters, &s](Runtime& inner) {
    for (std::uint64_t i = 0; i < iters; ++i) {
      sem_p(inner, s);
      sem_v(inner, s);
    }
  });
  rt.run_until_idle();
}

// Canonical two-process ping-pong; every P blocks in steady state. One op is
// one V/P pair by one process, so this kernel performs 2*iters ops.
void k_sem_ctxsw(Runtime& rt, std::uint64_t iters) {
  Semaphore sa(0), sb(0);
  rt.spawn([iters, &sa, &sb](Runtime& inner) {
    for (std::uint64_t i = 0; i < iters; ++i) {
      sem_v(inner, sb);
      sem_p(inner, sa);
    }
  });
  rt.spawn([iters, &sa, &sb](Runtime& inner) {
    for (std::uint64_t i = 0; i < iters; ++i) {
      sem_p(inner, sb);
      sem_v(inner, sa);
    }
  });
  rt.run_until_idle();
}

void k_async_send_receive(Runtime& rt, std::uint64_t iters) {
  Operation op(OpMode::Input, 1);
  rt.spawn(
      [iters, &op](Runtime& inner) {
        for (std::uint64_t i = 0; i < iters; ++i) {
          op_send(inner, op, {i});
          consume(op_receive(inner, op).args[0]);
        }
      },
      /*resource_id=*/1);
  rt.run_until_idle();
}

// One producer paced by yield against one consumer whose inbox is always
// empty, so every receive blocks.
void k_msg_ctxsw(Runtime& rt, std::uint64_t iters) {
  Operation op(OpMode::Input, 1);
  rt.spawn([iters, &op](Runtime& inner) {
    for (std::uint64_t i = 0; i < iters; ++i) {
      op_send(inner, op, {i});
      inner.yield();
    }
  });
  rt.spawn([iters, &op](Runtime& inner) {
    for (std::uint64_t i = 0; i < iters; ++i) consume(op_receive(inner, op).args[0]);
  });
  rt.run_until_idle();
}

void k_rendezvous(Runtime& rt, std::uint64_t iters) {
  Operation op(OpMode::Input, 2);
  rt.spawn(
      [iters, &op](Runtime& inner) {
        for (std::uint64_t i = 0; i < iters; ++i) consume(op_call(inner, op, {i}));
      },
      /*resource_id=*/1);
  rt.spawn(
      [iters, &op](Runtime& inner) {
        for (std::uint64_t i = 0; i < iters; ++i) {
          Received r = op_receive(inner, op);
          op_reply(inner, r, r.args[0] + 1);
        }
      },
      /*resource_id=*/2);
  rt.run_until_idle();
}

std::uint64_t ops_identity(std::uint64_t iters) { return iters; }
std::uint64_t ops_doubled(std::uint64_t iters) { return 2 * iters; }

struct KernelDef {
  const char* name;
  KernelClass cls;
  std::uint64_t (*ops_of)(std::uint64_t iters);
  void (*run)(Runtime& rt, std::uint64_t iters);
};

// Canonical report order.
constexpr KernelDef kKernels[] = {
    {"loop control overhead", KernelClass::NonSwitching, ops_identity, k_loop_overhead},
    {"local call, optimised", KernelClass::NonSwitching, ops_identity, k_local_call},
    {"interresource call, no new process", KernelClass::NonSwitching, ops_identity, k_inter_call},
    {"interresource call, new process", KernelClass::ProcessCreating, ops_identity, k_inter_call_new_process},
    {"process create/destroy", KernelClass::ProcessCreating, ops_identity, k_process_create_destroy},
    {"semaphore P only", KernelClass::NonSwitching, ops_identity, k_sem_p_only},
    {"semaphore V only", KernelClass::NonSwitching, ops_identity, k_sem_v_only},
    {"semaphore pair", KernelClass::NonSwitching, ops_identity, k_sem_pair},
    {"semaphore requiring context switch", KernelClass::Switching, ops_doubled, k_sem_ctxsw},
    {"asynchronous send/receive", KernelClass::NonSwitching, ops_identity, k_async_send_receive},
    {"message passing requiring context switch", KernelClass::Switching, ops_identity, k_msg_ctxsw},
    {"rendezvous", KernelClass::Switching, ops_identity, k_rendezvous},
};

const KernelDef& kernel_def(std::string_view name) {
  for (const auto& k : kKernels) {
    if (name == k.name) return k;
  }
  throw Error(Errc::UnknownKernel, "no kernel named '" + std::string(name) + "'");
}

RuntimeConfig bench_runtime_config(const std::string& backend_name, std::size_t stack_bytes) {
  RuntimeConfig cfg;
  cfg.backend = backend_name;
  cfg.default_stack_bytes = stack_bytes;
  cfg.tracing = false;
  return cfg;
}

std::uint64_t run_counting(const KernelDef& def, const std::string& backend_name, std::uint64_t iters) {
  Runtime rt(bench_runtime_config(backend_name, 64 * 1024));
  def.run(rt, iters);
  return rt.switch_count();
}

std::uint64_t time_once(const KernelDef& def, const std::string& backend_name, std::uint64_t iters,
                        std::size_t stack_bytes) {
  Runtime rt(bench_runtime_config(backend_name, stack_bytes));
  auto t0 = Clock::now();
  def.run(rt, iters);
  auto t1 = Clock::now();
  return elapsed_ns(t0, t1);
}

std::uint64_t scale_iterations(const KernelDef& def, const std::string& backend_name, const BenchConfig& cfg) {
  std::uint64_t iters = 64;
  for (;;) {
    std::uint64_t ns = time_once(def, backend_name, iters, cfg.stack_bytes);
    if (ns >= cfg.min_sample_ns) return iters;
    std::uint64_t factor = ns == 0 ? 64 : (cfg.min_sample_ns * 5 / 4) / ns + 1;
    iters *= std::clamp<std::uint64_t>(factor, 2, 64);
  }
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

const std::vector<std::string>& kernel_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : kKernels) v.emplace_back(k.name);
    return v;
  }();
  return names;
}

KernelClass kernel_class(std::string_view name) { return kernel_def(name).cls; }

std::uint64_t switches_per_op(const std::string& backend_name, std::string_view kernel_name) {
  const KernelDef& def = kernel_def(kernel_name);
  constexpr std::uint64_t base = 64;
  std::uint64_t s1 = run_counting(def, backend_name, base);
  std::uint64_t s2 = run_counting(def, backend_name, 2 * base);
  std::uint64_t dops = def.ops_of(2 * base) - def.ops_of(base);
  std::uint64_t dswitch = s2 - s1;
  assert(dswitch % dops == 0);
  return dswitch / dops;
}

double calibrate_loop_overhead(const std::string& backend_name) {
  const KernelDef& def = kKernels[0];
  BenchConfig cfg;
  cfg.min_sample_ns = 20'000'000;
  std::uint64_t iters = scale_iterations(def, backend_name, cfg);
  std::vector<double> per_op;
  for (int r = 0; r < 5; ++r) {
    std::uint64_t ns = time_once(def, backend_name, iters, cfg.stack_bytes);
    per_op.push_back(double(ns) / double(iters));
  }
  return median_of(std::move(per_op));
}

BenchmarkRecord run_kernel(const std::string& backend_name, std::string_view kernel_name,
                           const BenchConfig& cfg) {
  const KernelDef& def = kernel_def(kernel_name);

  BenchmarkRecord record;
  record.backend = backend_name;
  record.spec.name = def.name;
  record.spec.cls = def.cls;
  record.spec.repetitions = cfg.repetitions;
  record.switches_per_op = switches_per_op(backend_name, kernel_name);

  std::uint64_t iters = scale_iterations(def, backend_name, cfg);
  record.spec.inner_iterations = iters;
  time_once(def, backend_name, iters, cfg.stack_bytes);  // warm-up, discarded

  std::vector<double> per_op;
  for (int r = 0; r < cfg.repetitions; ++r) {
    std::uint64_t ns = time_once(def, backend_name, iters, cfg.stack_bytes);
    record.samples.push_back({ns, def.ops_of(iters)});
    per_op.push_back(double(ns) / double(def.ops_of(iters)));
  }
  record.median_per_op_ns = median_of(std::move(per_op));
  return record;
}

std::vector<BenchmarkRecord> run_suite(const std::string& backend_name, int repetitions,
                                       const BenchConfig& cfg_in) {
  BenchConfig cfg = cfg_in;
  cfg.repetitions = repetitions;

  double cal_a = calibrate_loop_overhead(backend_name);
  double cal_b = calibrate_loop_overhead(backend_name);
  if (cal_b > 1e-9 && (cal_a / cal_b > 1.5 || cal_b / cal_a > 1.5)) {
    std::fprintf(stderr, "fiberrt: loop overhead calibrations disagree: %.3f vs %.3f ns\n", cal_a, cal_b);
  }
  double cal = std::min(cal_a, cal_b);

  std::vector<BenchmarkRecord> records;
  for (const auto& k : kKernels) {
    BenchmarkRecord record = run_kernel(backend_name, k.name, cfg);
    double net = record.median_per_op_ns - cal;
    if (net < 0) {
      net = 0;
      record.clamped = true;
    }
    record.median_per_op_ns = net;
    records.push_back(std::move(record));
  }
  return records;
}

CsloopResult csloop(const std::string& backend_name, int seconds) {
  if (seconds < 1) throw Error(Errc::InvalidArgument, "csloop needs at least one second");
  backend_select(backend_name);

  struct PingPong {
    ExecutionContext root;
    ExecutionContext green;
  };
  PingPong pp;
  pp.root = context_root();
  StackRegion stack = stack_new(64 * 1024);
  pp.green = context_init(
      stack,
      [](void* raw) {
        auto* p = static_cast<PingPong*>(raw);
        for (;;) context_swap(p->green, p->root);
      },
      &pp);

  CsloopResult result;
  auto t0 = Clock::now();
  auto deadline = t0 + std::chrono::seconds(seconds);
  Clock::time_point t1;
  for (;;) {
    for (int i = 0; i < 512; ++i) context_swap(pp.root, pp.green);
    result.switches_total += 1024;
    t1 = Clock::now();
    if (t1 >= deadline) break;
  }
  result.ns_per_switch = double(elapsed_ns(t0, t1)) / double(result.switches_total);
  return result;
}

double timer_resolution_ns() {
  std::uint64_t best = UINT64_MAX;
  for (int i = 0; i < 512; ++i) {
    auto a = Clock::now();
    auto b = Clock::now();
    while (b == a) b = Clock::now();
    best = std::min(best, elapsed_ns(a, b));
  }
  return double(best);
}

}  // namespace fiberrt::bench
