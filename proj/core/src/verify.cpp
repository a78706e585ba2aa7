#include "fiberrt/verify.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fiberrt/bench.hpp"
#include "fiberrt/refsim.hpp"
#include "fiberrt/sync.hpp"

namespace fiberrt::verify {

const char* check_status_name(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skip: return "skip";
  }
  return "?";
}

void VerifyReport::finish() {
  overall = true;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Fail) overall = false;
  }
}

namespace {

// Kills the process if a check hangs; runs on its own OS thread, the one
// concession to a second lane.
class Watchdog {
 public:
  explicit Watchdog(std::chrono::seconds timeout) : timeout_(timeout) {
    thr_ = std::thread([this] {
      std::unique_lock lk(m_);
      if (!cv_.wait_for(lk, timeout_, [this] { return done_; })) {
        std::fprintf(stderr, "fiberrt verify: watchdog expired during '%s'\n", current_.load());
        std::_Exit(1);
      }
    });
  }

  ~Watchdog() {
    {
      std::lock_guard lk(m_);
      done_ = true;
    }
    cv_.notify_all();
    thr_.join();
  }

  void begin(const char* name) { current_.store(name); }

 private:
  std::chrono::seconds timeout_;
  std::atomic<const char*> current_{""};
  std::mutex m_;
  std::condition_variable cv_;
  bool done_ = false;
  std::thread thr_;
};

void expect(CheckResult& r, bool cond, const std::string& msg) {
  if (!cond && r.status == CheckStatus::Pass) {
    r.status = CheckStatus::Fail;
    r.detail = msg;
  }
}

template <typename Fn>
void run_check(VerifyReport& rep, Watchdog& dog, const char* name, Fn&& fn) {
  dog.begin(name);
  CheckResult r{name, CheckStatus::Pass, ""};
  try {
    fn(r);
  } catch (const std::exception& e) {
    r.status = CheckStatus::Fail;
    r.detail = e.what();
  }
  rep.checks.push_back(std::move(r));
}

std::vector<std::string> join_expected(std::initializer_list<const char*> lines) {
  std::vector<std::string> out;
  for (const char* l : lines) out.emplace_back(l);
  return out;
}

std::string first_difference(const std::vector<std::string>& got, const std::vector<std::string>& want) {
  for (std::size_t i = 0; i < std::max(got.size(), want.size()); ++i) {
    std::string g = i < got.size() ? got[i] : "<missing>";
    std::string w = i < want.size() ? want[i] : "<missing>";
    if (g != w) return "line " + std::to_string(i + 1) + ": got '" + g + "', want '" + w + "'";
  }
  return "";
}

// ---- cstest checks ---------------------------------------------------------

void check_pingpong(CheckResult& r, const std::string& backend, std::size_t stack_bytes) {
  RuntimeConfig cfg;
  cfg.backend = backend;
  cfg.default_stack_bytes = stack_bytes;
  cfg.tracing = true;
  Runtime rt(cfg);
  for (int p = 0; p < 2; ++p) {
    rt.spawn([](Runtime& inner) {
      for (int i = 0; i < 3; ++i) inner.yield();
    });
  }
  rt.run_until_idle();

  auto expected = join_expected({
      "1 SPAWN 1", "2 SPAWN 2", "3 RUN 1", "4 YIELD 1", "5 RUN 2", "6 YIELD 2",
      "7 RUN 1", "8 YIELD 1", "9 RUN 2", "10 YIELD 2", "11 RUN 1", "12 YIELD 1",
      "13 RUN 2", "14 YIELD 2", "15 RUN 1", "16 EXIT 1", "17 RUN 2", "18 EXIT 2",
  });
  expect(r, rt.trace().lines() == expected, first_difference(rt.trace().lines(), expected));
}

// Checksummed frames swapped back and forth at the raw context level.
struct RoundTripShared {
  ExecutionContext root;
  ExecutionContext a;
  ExecutionContext b;
  int rounds = 50;
  bool a_ok = false;
  bool b_ok = true;
};

std::uint64_t lcg_fill(std::uint64_t seed, std::uint64_t* buf, std::size_t n) {
  std::uint64_t x = seed, sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    x = x * 6364136223846793005ull + 1442695040888963407ull;
    buf[i] = x;
    sum += x;
  }
  return sum;
}

void roundtrip_a(void* raw) {
  auto* s = static_cast<RoundTripShared*>(raw);
  std::uint64_t buf[64];
  std::uint64_t sum0 = lcg_fill(0x1234, buf, 64);
  double acc = 1.0;
  bool ok = true;
  for (int i = 0; i < s->rounds; ++i) {
    acc *= 1.0000001;
    context_swap(s->a, s->b);
    std::uint64_t sum = 0;
    for (auto w : buf) sum += w;
    ok = ok && sum == sum0;
  }
  ok = ok && acc > 1.0 && acc < 1.001;
  s->a_ok = ok;
  context_swap(s->a, s->root);
  for (;;) context_swap(s->a, s->root);  // never reached in the harness
}

void roundtrip_b(void* raw) {
  auto* s = static_cast<RoundTripShared*>(raw);
  std::uint64_t buf[64];
  std::uint64_t sum0 = lcg_fill(0x9876, buf, 64);
  for (;;) {
    std::uint64_t sum = 0;
    for (auto w : buf) sum += w;
    s->b_ok = s->b_ok && sum == sum0;
    context_swap(s->b, s->a);
  }
}

void check_roundtrip(CheckResult& r, const std::string& backend, std::size_t stack_bytes) {
  backend_select(backend);
  RoundTripShared s;
  s.root = context_root();
  StackRegion stack_a = stack_new(stack_bytes);
  StackRegion stack_b = stack_new(stack_bytes);
  s.a = context_init(stack_a, roundtrip_a, &s);
  s.b = context_init(stack_b, roundtrip_b, &s);
  context_swap(s.root, s.a);
  expect(r, s.a_ok, "context A lost local state across switches");
  expect(r, s.b_ok, "context B lost local state across switches");
  expect(r, stack_check(stack_a) == StackCheck::Intact, "stack A guards damaged");
  expect(r, stack_check(stack_b) == StackCheck::Intact, "stack B guards damaged");
}

void check_overflow(CheckResult& r) {
  StackRegion victim = stack_new(kMinStackBytes);
  victim.guard_low()[3] = 0;  // controlled write, never a real overrun
  expect(r, stack_check(victim) == StackCheck::Overflow,
         std::string("expected Overflow, got ") + stack_check_name(stack_check(victim)));
}

void check_underflow(CheckResult& r) {
  StackRegion victim = stack_new(kMinStackBytes);
  victim.guard_high()[5] = 0;
  expect(r, stack_check(victim) == StackCheck::Underflow,
         std::string("expected Underflow, got ") + stack_check_name(stack_check(victim)));
}

void check_fairness(CheckResult& r, const std::string& backend, std::size_t stack_bytes) {
  constexpr int kProcs = 4;
  constexpr int kYields = 25;
  RuntimeConfig cfg;
  cfg.backend = backend;
  cfg.default_stack_bytes = stack_bytes;
  cfg.tracing = true;
  Runtime rt(cfg);
  for (int p = 0; p < kProcs; ++p) {
    rt.spawn([](Runtime& inner) {
      for (int i = 0; i < kYields; ++i) inner.yield();
    });
  }
  rt.run_until_idle();

  // Strict round robin: RUN events cycle 1..kProcs while all stay ready.
  std::vector<std::uint64_t> runs;
  for (const auto& rec : rt.trace().records()) {
    if (rec.event == TraceEvent::Run) runs.push_back(rec.pid);
  }
  expect(r, runs.size() == std::size_t(kProcs) * (kYields + 1),
         "activation count " + std::to_string(runs.size()));
  std::map<std::uint64_t, int> per_pid;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    expect(r, runs[i] == (i % kProcs) + 1,
           "activation " + std::to_string(i) + " went to pid " + std::to_string(runs[i]));
    per_pid[runs[i]]++;
  }
  for (const auto& [pid, count] : per_pid) {
    expect(r, count == kYields + 1, "pid " + std::to_string(pid) + " ran " + std::to_string(count) + " times");
  }
}

void check_conservation(CheckResult& r, const std::string& backend, std::size_t stack_bytes) {
  RuntimeConfig cfg;
  cfg.backend = backend;
  cfg.default_stack_bytes = stack_bytes;
  Runtime rt(cfg);
  constexpr int kProcs = 5;
  for (int i = 0; i < kProcs; ++i) {
    rt.spawn([](Runtime&) {});
  }
  RunSummary summary = rt.run_until_idle();
  expect(r, summary.spawned == kProcs, "spawned " + std::to_string(summary.spawned));
  expect(r, summary.ended == kProcs, "ended " + std::to_string(summary.ended));
  expect(r, summary.switches == kProcs + 1, "switches " + std::to_string(summary.switches));
  expect(r, rt.live_count() == 0, "live processes remain");
  expect(r, rt.stack_pool_size() <= rt.config().stack_pool_cap, "stack pool exceeded its cap");
  expect(r, rt.pool_guards_intact(), "recycled stack guards damaged");
}

// ---- vsuite checks ---------------------------------------------------------

struct ParsedEvent {
  std::uint64_t seq;
  std::string event;
  std::uint64_t pid;
};

std::vector<ParsedEvent> parse_trace(const std::vector<std::string>& lines) {
  std::vector<ParsedEvent> out;
  for (const auto& line : lines) {
    std::istringstream is(line);
    ParsedEvent e;
    is >> e.seq >> e.event >> e.pid;
    out.push_back(std::move(e));
  }
  return out;
}

enum class ScanState { Unseen, Ready, Running, Blocked, Ended };

// Checks trace legality: the scheduler state machine, single-runner
// exclusivity, and exactly-one-wakeup pairing.
std::string scan_trace(const std::vector<std::string>& lines, bool deadlocked) {
  std::map<std::uint64_t, ScanState> state;
  std::uint64_t running = 0;

  auto fail = [](const ParsedEvent& e, const std::string& why) {
    return "event " + std::to_string(e.seq) + " (" + e.event + " " + std::to_string(e.pid) + "): " + why;
  };

  for (const auto& e : parse_trace(lines)) {
    ScanState s = state.count(e.pid) ? state[e.pid] : ScanState::Unseen;
    if (e.event == "SPAWN") {
      if (s != ScanState::Unseen) return fail(e, "pid reused");
      state[e.pid] = ScanState::Ready;
    } else if (e.event == "RUN") {
      if (s != ScanState::Ready) return fail(e, "run of a non-ready process");
      if (running != 0) return fail(e, "two processes running");
      state[e.pid] = ScanState::Running;
      running = e.pid;
    } else if (e.event == "YIELD") {
      if (s != ScanState::Running) return fail(e, "yield by a non-running process");
      state[e.pid] = ScanState::Ready;
      running = 0;
    } else if (e.event == "BLOCK") {
      if (s != ScanState::Running) return fail(e, "block by a non-running process");
      state[e.pid] = ScanState::Blocked;
      running = 0;
    } else if (e.event == "UNBLOCK") {
      if (s != ScanState::Blocked) return fail(e, "wakeup of a non-blocked process");
      state[e.pid] = ScanState::Ready;
    } else if (e.event == "EXIT") {
      if (s != ScanState::Running) return fail(e, "exit by a non-running process");
      state[e.pid] = ScanState::Ended;
      running = 0;
    } else {
      // SEND/RECV/CALLSTART/REPLY; pid 0 is the lane owner.
      if (e.pid != 0 && s != ScanState::Running) return fail(e, "sync op by a non-running process");
    }
  }
  if (!deadlocked) {
    for (const auto& [pid, s] : state) {
      if (s != ScanState::Ended) return "pid " + std::to_string(pid) + " never ended in a terminating trace";
    }
  }
  return "";
}

void check_sem_conservation(CheckResult& r, const std::string& backend) {
  RuntimeConfig cfg;
  cfg.backend = backend;
  Runtime rt(cfg);
  Semaphore s0(1), s1(0);
  // p1 blocks on s1 twice; p2 feeds it and consumes s0. Terminates.
  rt.spawn([&](Runtime& inner) {
    sem_p(inner, s1);
    sem_p(inner, s1);
    sem_v(inner, s0);
  });
  rt.spawn([&](Runtime& inner) {
    sem_p(inner, s0);
    sem_v(inner, s1);
    sem_v(inner, s1);
  });
  rt.run_until_idle();
  // #P and #V per semaphore, from the program text.
  expect(r, s0.count() == 1 - 1 + 1, "s0 count " + std::to_string(s0.count()));
  expect(r, s1.count() == 0 + 2 - 2, "s1 count " + std::to_string(s1.count()));
  expect(r, s0.waiting() == 0 && s1.waiting() == 0, "waiters remain at quiescence");
}

void check_msg_conservation(CheckResult& r, const std::string& backend) {
  RuntimeConfig cfg;
  cfg.backend = backend;
  Runtime rt(cfg);
  Operation op(OpMode::Input, 0);
  rt.spawn([&](Runtime& inner) {
    for (Word i = 0; i < 5; ++i) op_send(inner, op, {i});
  });
  rt.spawn([&](Runtime& inner) {
    for (int i = 0; i < 3; ++i) op_receive(inner, op);
  });
  rt.run_until_idle();
  expect(r, op.sent_total() == 5, "sent " + std::to_string(op.sent_total()));
  expect(r, op.received_total() == 3, "received " + std::to_string(op.received_total()));
  expect(r, op.sent_total() == op.received_total() + op.inbox_size(),
         "conservation broken: inbox residue " + std::to_string(op.inbox_size()));
}

void check_trace_invariants(CheckResult& r, const std::string& backend, std::uint64_t seed_base, int programs,
                            bool wakeups_only) {
  for (int i = 0; i < programs; ++i) {
    sim::Program prog = sim::random_program(seed_base + std::uint64_t(i));
    sim::TraceResult real = sim::run_on_runtime(prog, backend);
    std::string problem = scan_trace(real.trace, real.deadlocked);
    (void)wakeups_only;
    if (!problem.empty()) {
      expect(r, false, "seed " + std::to_string(seed_base + std::uint64_t(i)) + ": " + problem);
      return;
    }
  }
}

void check_oracle_equivalence(CheckResult& r, const std::string& backend, std::uint64_t seed_base,
                              int programs) {
  for (int i = 0; i < programs; ++i) {
    std::uint64_t seed = seed_base + std::uint64_t(i);
    sim::Program prog = sim::random_program(seed);
    sim::TraceResult want = sim::simulate(prog);
    sim::TraceResult got = sim::run_on_runtime(prog, backend);
    expect(r, got.deadlocked == want.deadlocked,
           "seed " + std::to_string(seed) + ": deadlock flag mismatch");
    expect(r, got.trace == want.trace,
           "seed " + std::to_string(seed) + ": " + first_difference(got.trace, want.trace));
    if (r.status != CheckStatus::Pass) return;
  }
}

void check_deadlock(CheckResult& r, const std::string& backend) {
  RuntimeConfig cfg;
  cfg.backend = backend;
  Runtime rt(cfg);
  Semaphore s(0);
  rt.spawn([&s](Runtime& inner) { sem_p(inner, s); });
  bool detected = false;
  try {
    rt.run_until_idle();
  } catch (const Error& e) {
    detected = e.code() == Errc::DeadlockDetected;
  }
  expect(r, detected, "blocked program finished without DeadlockDetected");
}

void check_switch_arithmetic(CheckResult& r, const std::string& backend) {
  std::uint64_t pair = bench::switches_per_op(backend, "semaphore pair");
  std::uint64_t semsw = bench::switches_per_op(backend, "semaphore requiring context switch");
  std::uint64_t local = bench::switches_per_op(backend, "local call, optimised");
  std::uint64_t rdv = bench::switches_per_op(backend, "rendezvous");
  expect(r, pair == 0, "semaphore pair switches/op = " + std::to_string(pair));
  expect(r, semsw == pair + 1, "semaphore-with-switch switches/op = " + std::to_string(semsw));
  expect(r, rdv == 2, "rendezvous switches/op = " + std::to_string(rdv));
  expect(r, rdv == local + 2, "rendezvous is not local call + 2");
}

void check_oracle_sensitivity(CheckResult& r, const std::string& backend) {
  // Two waiters woken by two Vs: FIFO and LIFO wakeup orders diverge, and
  // the oracle comparison must notice.
  sim::Program prog;
  prog.sem_initial = {0};
  prog.channels = 0;
  prog.procs.resize(3);
  prog.procs[0].code = {{sim::Op::SemP, 0, 0}};
  prog.procs[1].code = {{sim::Op::SemP, 0, 0}};
  prog.procs[2].code = {{sim::Op::SemV, 0, 0}, {sim::Op::SemV, 0, 0}};

  sim::TraceResult want = sim::simulate(prog);
  sim::TraceResult perturbed = sim::run_on_runtime(prog, backend, /*lifo_unblock=*/true);
  expect(r, perturbed.trace != want.trace,
         "perturbed ready-queue order went unnoticed by the oracle comparison");
}

}  // namespace

VerifyReport run_cstest(const std::string& backend_name, const VerifyConfig& cfg) {
  VerifyReport rep;
  rep.suite = "cstest";
  rep.backend = backend_name;
  Watchdog dog(cfg.watchdog_timeout);

  run_check(rep, dog, "ping-pong interleaving",
            [&](CheckResult& r) { check_pingpong(r, backend_name, cfg.stack_bytes); });
  run_check(rep, dog, "local state round trip",
            [&](CheckResult& r) { check_roundtrip(r, backend_name, cfg.stack_bytes); });
  run_check(rep, dog, "stack overflow detection", [&](CheckResult& r) { check_overflow(r); });
  run_check(rep, dog, "stack underflow detection", [&](CheckResult& r) { check_underflow(r); });
  run_check(rep, dog, "cycle fairness",
            [&](CheckResult& r) { check_fairness(r, backend_name, cfg.stack_bytes); });
  run_check(rep, dog, "spawn exit conservation",
            [&](CheckResult& r) { check_conservation(r, backend_name, cfg.stack_bytes); });

  rep.finish();
  return rep;
}

VerifyReport run_vsuite(const std::string& backend_name, const VerifyConfig& cfg) {
  VerifyReport rep;
  rep.suite = "vsuite";
  rep.backend = backend_name;
  Watchdog dog(cfg.watchdog_timeout);

  auto skip_without_trace = [&](const char* name, auto&& fn) {
    if (!cfg.tracing) {
      rep.checks.push_back({name, CheckStatus::Skip, "tracing disabled"});
      return;
    }
    run_check(rep, dog, name, fn);
  };

  run_check(rep, dog, "semaphore conservation",
            [&](CheckResult& r) { check_sem_conservation(r, backend_name); });
  run_check(rep, dog, "message conservation",
            [&](CheckResult& r) { check_msg_conservation(r, backend_name); });
  skip_without_trace("no lost wakeups", [&](CheckResult& r) {
    check_trace_invariants(r, backend_name, cfg.oracle_seed + 100, 5, true);
  });
  skip_without_trace("state machine transitions", [&](CheckResult& r) {
    check_trace_invariants(r, backend_name, cfg.oracle_seed + 200, 5, false);
  });
  skip_without_trace("oracle equivalence", [&](CheckResult& r) {
    check_oracle_equivalence(r, backend_name, cfg.oracle_seed, cfg.oracle_programs);
  });
  run_check(rep, dog, "deadlock detection", [&](CheckResult& r) { check_deadlock(r, backend_name); });
  run_check(rep, dog, "switch count arithmetic",
            [&](CheckResult& r) { check_switch_arithmetic(r, backend_name); });
  skip_without_trace("oracle sensitivity",
                     [&](CheckResult& r) { check_oracle_sensitivity(r, backend_name); });

  rep.finish();
  return rep;
}

std::string render_text(const VerifyReport& report) {
  std::string out = report.suite + " [" + report.backend + "]\n";
  for (const auto& c : report.checks) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-36s %s%s%s\n", c.name.c_str(), check_status_name(c.status),
                  c.detail.empty() ? "" : "  ", c.detail.c_str());
    out += line;
  }
  out += std::string("overall: ") + (report.overall ? "PASS" : "FAIL") + "\n";
  return out;
}

std::string render_json(const VerifyReport& report) {
  nlohmann::json doc;
  doc["suite"] = report.suite;
  doc["backend"] = report.backend;
  doc["overall"] = report.overall;
  doc["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    doc["checks"].push_back({{"name", c.name}, {"status", check_status_name(c.status)}, {"detail", c.detail}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace fiberrt::verify
