#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fiberrt/runtime.hpp"

namespace fiberrt::sim {

/// Instruction set of the small synchronization programs used for oracle
/// checks: plain rescheduling, semaphore ops, and channel (input-operation)
/// traffic including rendezvous.
enum class Op : std::uint8_t { Yield, SemP, SemV, Send, Recv, Call, Reply };

struct Instr {
  Op op;
  std::uint8_t index = 0;  // semaphore or channel
  Word value = 0;
};

struct ProcProgram {
  std::vector<Instr> code;
};

struct Program {
  std::vector<std::int64_t> sem_initial;
  std::size_t channels = 0;
  std::vector<ProcProgram> procs;
};

struct TraceResult {
  std::vector<std::string> trace;
  bool deadlocked = false;
};

/// Naive sequential reference simulator: interprets the program with explicit
/// queues and counters, no contexts, emitting the same trace line format as
/// the runtime. This is the independent oracle the runtime is checked against.
TraceResult simulate(const Program& program);

/// Executes the same program on a real Runtime with tracing enabled.
TraceResult run_on_runtime(const Program& program, const std::string& backend_name,
                           bool lifo_unblock = false);

/// Seeded generator of small random programs (at most 4 processes, a few
/// dozen events). Deadlocking programs are valid output.
Program random_program(std::uint64_t seed);

}  // namespace fiberrt::sim
