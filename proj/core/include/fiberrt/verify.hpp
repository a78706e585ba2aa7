#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace fiberrt::verify {

enum class CheckStatus : std::uint8_t { Pass, Fail, Skip };

const char* check_status_name(CheckStatus s) noexcept;

struct CheckResult {
  std::string name;
  CheckStatus status;
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::string backend;
  std::vector<CheckResult> checks;
  bool overall = false;  // conjunction: no failed check

  void finish();
};

struct VerifyConfig {
  std::chrono::seconds watchdog_timeout{30};
  bool tracing = true;
  std::size_t stack_bytes = 64 * 1024;
  std::uint64_t oracle_seed = 1;
  int oracle_programs = 10;
};

/// The standalone switching-correctness check: ping-pong interleaving, local
/// state round trip, deliberate stack overflow/underflow detection on victim
/// stacks, cycle fairness, and spawn/exit conservation. Six checks, in that
/// order.
VerifyReport run_cstest(const std::string& backend_name, const VerifyConfig& cfg = {});

/// Integrated semantics suite: conservation and wakeup properties, trace
/// state-machine legality, oracle equivalence against the reference
/// simulator, deadlock detection, switch-count arithmetic, and a negative
/// control on oracle sensitivity. Trace-dependent checks report Skip when
/// tracing is disabled.
VerifyReport run_vsuite(const std::string& backend_name, const VerifyConfig& cfg = {});

std::string render_text(const VerifyReport& report);
std::string render_json(const VerifyReport& report);

}  // namespace fiberrt::verify
