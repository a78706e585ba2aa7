#include "fiberrt/refsim.hpp"

#include <array>
#include <deque>
#include <random>

#include "fiberrt/sync.hpp"

namespace fiberrt::sim {

namespace {

struct SimInvocation {
  Word value = 0;
  bool is_call = false;
  int caller = -1;  // proc index, calls only
};

struct SimChannel {
  std::deque<int> inbox;         // invocation ids
  std::deque<int> recv_waiters;  // proc indices
};

struct SimSemaphore {
  std::int64_t count = 0;
  std::deque<int> waiters;
};

struct SimProc {
  const std::vector<Instr>* code = nullptr;
  std::size_t ip = 0;
  ProcState state = ProcState::Ready;
  std::deque<int> held_calls;  // received, unreplied call invocation ids
  int delivered = -1;          // invocation handed to a blocked receive
  bool emit_recv_on_resume = false;
};

class Simulator {
 public:
  explicit Simulator(const Program& program) : program_(program) {
    sems_.resize(program.sem_initial.size());
    for (std::size_t i = 0; i < sems_.size(); ++i) sems_[i].count = program.sem_initial[i];
    chans_.resize(program.channels);
    procs_.resize(program.procs.size());
    for (std::size_t i = 0; i < procs_.size(); ++i) {
      procs_[i].code = &program.procs[i].code;
      emit("SPAWN", pid(i));
      ready_.push_back(static_cast<int>(i));
    }
  }

  TraceResult run() {
    while (!ready_.empty()) {
      int p = ready_.front();
      ready_.pop_front();
      procs_[p].state = ProcState::Running;
      emit("RUN", pid(p));
      execute(p);
    }
    bool deadlocked = false;
    for (const auto& pr : procs_) {
      if (pr.state != ProcState::Ended) deadlocked = true;
    }
    return {std::move(trace_), deadlocked};
  }

 private:
  static std::uint64_t pid(int proc_index) { return std::uint64_t(proc_index) + 1; }

  void emit(const char* event, std::uint64_t p) {
    trace_.push_back(std::to_string(++seq_) + " " + event + " " + std::to_string(p));
  }

  void make_ready(int p) {
    procs_[p].state = ProcState::Ready;
    emit("UNBLOCK", pid(p));
    ready_.push_back(p);
  }

  // Runs proc p until it blocks, yields, or ends.
  void execute(int p) {
    SimProc& pr = procs_[p];
    if (pr.emit_recv_on_resume) {
      pr.emit_recv_on_resume = false;
      take_delivered(p);
      emit("RECV", pid(p));
    }
    while (pr.ip < pr.code->size()) {
      const Instr& in = (*pr.code)[pr.ip++];
      switch (in.op) {
        case Op::Yield: {
          if (ready_.empty()) break;  // no-op, nothing to hand to
          pr.state = ProcState::Ready;
          ready_.push_back(p);
          emit("YIELD", pid(p));
          return;
        }
        case Op::SemP: {
          SimSemaphore& s = sems_[in.index];
          if (--s.count < 0) {
            pr.state = ProcState::Blocked;
            s.waiters.push_back(p);
            emit("BLOCK", pid(p));
            return;
          }
          break;
        }
        case Op::SemV: {
          SimSemaphore& s = sems_[in.index];
          if (++s.count <= 0) {
            int w = s.waiters.front();
            s.waiters.pop_front();
            make_ready(w);
          }
          break;
        }
        case Op::Send: {
          emit("SEND", pid(p));
          int id = new_invocation({in.value, false, -1});
          deliver_or_queue(in.index, id);
          break;
        }
        case Op::Recv: {
          SimChannel& ch = chans_[in.index];
          if (!ch.inbox.empty()) {
            int id = ch.inbox.front();
            ch.inbox.pop_front();
            if (invs_[id].is_call) pr.held_calls.push_back(id);
            emit("RECV", pid(p));
            break;
          }
          pr.state = ProcState::Blocked;
          ch.recv_waiters.push_back(p);
          emit("BLOCK", pid(p));
          pr.emit_recv_on_resume = true;
          return;
        }
        case Op::Call: {
          emit("CALLSTART", pid(p));
          int id = new_invocation({in.value, true, p});
          deliver_or_queue(in.index, id);
          pr.state = ProcState::Blocked;
          emit("BLOCK", pid(p));
          return;  // resumed by a reply; nothing emitted on resume
        }
        case Op::Reply: {
          int id = pr.held_calls.front();
          pr.held_calls.pop_front();
          emit("REPLY", pid(p));
          make_ready(invs_[id].caller);
          break;
        }
      }
    }
    pr.state = ProcState::Ended;
    emit("EXIT", pid(p));
  }

  int new_invocation(SimInvocation inv) {
    invs_.push_back(inv);
    return static_cast<int>(invs_.size()) - 1;
  }

  void deliver_or_queue(std::uint8_t chan, int id) {
    SimChannel& ch = chans_[chan];
    if (!ch.recv_waiters.empty()) {
      int w = ch.recv_waiters.front();
      ch.recv_waiters.pop_front();
      procs_[w].delivered = id;
      make_ready(w);
    } else {
      ch.inbox.push_back(id);
    }
  }

  void take_delivered(int p) {
    SimProc& pr = procs_[p];
    int id = pr.delivered;
    pr.delivered = -1;
    if (invs_[id].is_call) pr.held_calls.push_back(id);
  }

  const Program& program_;
  std::vector<SimSemaphore> sems_;
  std::vector<SimChannel> chans_;
  std::vector<SimProc> procs_;
  std::vector<SimInvocation> invs_;
  std::deque<int> ready_;
  std::vector<std::string> trace_;
  std::uint64_t seq_ = 0;
};

}  // namespace

TraceResult simulate(const Program& program) { return Simulator(program).run(); }

TraceResult run_on_runtime(const Program& program, const std::string& backend_name, bool lifo_unblock) {
  RuntimeConfig cfg;
  cfg.backend = backend_name;
  cfg.tracing = true;
  cfg.lifo_unblock = lifo_unblock;
  Runtime rt(cfg);

  std::vector<Semaphore> sems;
  sems.reserve(program.sem_initial.size());
  for (auto initial : program.sem_initial) sems.emplace_back(initial);
  std::deque<Operation> chans;
  for (std::size_t i = 0; i < program.channels; ++i) chans.emplace_back(OpMode::Input, 0);

  for (const auto& proc : program.procs) {
    const std::vector<Instr>* code = &proc.code;
    auto* sem_ptr = sems.data();
    auto* chan_ptr = &chans;
    rt.spawn([code, sem_ptr, chan_ptr](Runtime& inner) {
      // Held call tokens; fixed storage so a teardown of a blocked process
      // abandons no heap.
      std::array<Received, 32> held{};
      std::size_t held_begin = 0, held_end = 0;
      for (const Instr& in : *code) {
        switch (in.op) {
          case Op::Yield: inner.yield(); break;
          case Op::SemP: sem_p(inner, sem_ptr[in.index]); break;
          case Op::SemV: sem_v(inner, sem_ptr[in.index]); break;
          case Op::Send: op_send(inner, (*chan_ptr)[in.index], {in.value}); break;
          case Op::Recv: {
            Received r = op_receive(inner, (*chan_ptr)[in.index]);
            if (r.kind == InvocationKind::Call) held[held_end++ % held.size()] = r;
            break;
          }
          case Op::Call: op_call(inner, (*chan_ptr)[in.index], {in.value}); break;
          case Op::Reply: {
            Received r = held[held_begin++ % held.size()];
            op_reply(inner, r, in.value);
            break;
          }
        }
      }
    });
  }

  TraceResult out;
  try {
    rt.run_until_idle();
  } catch (const Error& e) {
    if (e.code() != Errc::DeadlockDetected) throw;
    out.deadlocked = true;
  }
  out.trace = rt.trace().lines();
  return out;
}

Program random_program(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return int(lo + rng() % std::uint64_t(hi - lo + 1)); };

  Program prog;
  int sems = pick(1, 2);
  for (int i = 0; i < sems; ++i) prog.sem_initial.push_back(pick(0, 2));
  int chans = pick(1, 2);
  prog.channels = std::size_t(chans);

  int procs = pick(2, 4);
  bool rendezvous = procs >= 3 && pick(0, 99) < 40;
  int first_random = 0;

  if (rendezvous) {
    // Channel 0 carries calls only: one servicer, one caller, matched counts.
    int calls = pick(1, 3);
    ProcProgram servicer, caller;
    for (int i = 0; i < calls; ++i) {
      servicer.code.push_back({Op::Recv, 0, 0});
      servicer.code.push_back({Op::Reply, 0, Word(pick(0, 99))});
      caller.code.push_back({Op::Call, 0, Word(pick(0, 99))});
    }
    prog.procs.push_back(std::move(servicer));
    prog.procs.push_back(std::move(caller));
    first_random = 2;
  }

  for (int p = first_random; p < procs; ++p) {
    ProcProgram pp;
    int len = pick(2, 7);
    for (int i = 0; i < len; ++i) {
      switch (pick(0, 4)) {
        case 0: pp.code.push_back({Op::Yield, 0, 0}); break;
        case 1: pp.code.push_back({Op::SemP, std::uint8_t(pick(0, sems - 1)), 0}); break;
        case 2: pp.code.push_back({Op::SemV, std::uint8_t(pick(0, sems - 1)), 0}); break;
        case 3: {
          // Channel 0 is reserved for the rendezvous pair when present.
          int lo = rendezvous ? 1 : 0;
          if (lo > chans - 1) {
            pp.code.push_back({Op::Yield, 0, 0});
          } else {
            pp.code.push_back({Op::Send, std::uint8_t(pick(lo, chans - 1)), Word(pick(0, 99))});
          }
          break;
        }
        case 4: {
          int lo = rendezvous ? 1 : 0;
          if (lo > chans - 1) {
            pp.code.push_back({Op::Yield, 0, 0});
          } else {
            pp.code.push_back({Op::Recv, std::uint8_t(pick(lo, chans - 1)), 0});
          }
          break;
        }
      }
    }
    prog.procs.push_back(std::move(pp));
  }
  return prog;
}

}  // namespace fiberrt::sim
