#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fiberrt::bench {

/// The three-way cost taxonomy: non-switching, process-creating, and
/// switching-without-creation kernels.
enum class KernelClass : int { NonSwitching = 1, ProcessCreating = 2, Switching = 3 };

struct BenchmarkSpec {
  std::string name;
  KernelClass cls;
  std::uint64_t inner_iterations = 0;
  int repetitions = 0;
};

struct TimingSample {
  std::uint64_t elapsed_ns = 0;
  std::uint64_t iterations = 0;  // operations measured in this sample
};

struct BenchmarkRecord {
  BenchmarkSpec spec;
  std::vector<TimingSample> samples;
  double median_per_op_ns = 0.0;  // net of loop overhead, clamped at zero
  std::string backend;
  std::uint64_t switches_per_op = 0;  // counted, not timed
  bool clamped = false;
};

struct CsloopResult {
  std::uint64_t switches_total = 0;
  double ns_per_switch = 0.0;
};

struct BenchConfig {
  int repetitions = 10;
  std::uint64_t min_sample_ns = 50'000'000;
  std::size_t stack_bytes = 64 * 1024;
};

/// The twelve kernel names, in canonical report order.
const std::vector<std::string>& kernel_names();

/// Class of a kernel; throws UnknownKernel.
KernelClass kernel_class(std::string_view name);

/// Raw switch throughput: two bare contexts ping-pong for approximately the
/// given number of seconds. Each ping-pong iteration is two switches.
CsloopResult csloop(const std::string& backend_name, int seconds);

/// Measures the empty benchmark loop; the result is subtracted from every
/// per-op median.
double calibrate_loop_overhead(const std::string& backend_name);

/// Exact scheduler-transfer count per operation for one kernel, taken from
/// counters at two iteration scales so constant start/stop costs cancel.
std::uint64_t switches_per_op(const std::string& backend_name, std::string_view kernel_name);

BenchmarkRecord run_kernel(const std::string& backend_name, std::string_view kernel_name,
                           const BenchConfig& cfg = {});

/// All twelve kernels in canonical order.
std::vector<BenchmarkRecord> run_suite(const std::string& backend_name, int repetitions = 10,
                                       const BenchConfig& cfg = {});

/// Smallest positive distance observed between consecutive clock readings.
double timer_resolution_ns();

}  // namespace fiberrt::bench
