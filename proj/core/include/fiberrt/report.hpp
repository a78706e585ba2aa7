#pragma once

#include <span>
#include <string>
#include <vector>

#include "fiberrt/bench.hpp"

namespace fiberrt::bench {

struct ReportMeta {
  double timer_resolution_ns = 0.0;
  // Measured empty-loop cost per backend, ns per iteration.
  std::vector<std::pair<std::string, double>> loop_overhead_ns;
  std::vector<std::string> notes;
};

/// Text table: one row per kernel in canonical order, one median column per
/// requested backend (µs, 3 decimals), "n/a" where a backend has no record.
std::string render_table(std::span<const BenchmarkRecord> records,
                         std::span<const std::string> backend_columns, const ReportMeta& meta);

/// CSV: kernel,class,backend,reps,inner_iterations,median_ns,switches_per_op.
/// Meta travels as `# key=value` comment lines.
std::string render_csv(std::span<const BenchmarkRecord> records, const ReportMeta& meta);

/// JSON document with meta, summary fields, and raw samples.
std::string render_json(std::span<const BenchmarkRecord> records, const ReportMeta& meta);

/// Parses render_csv output back into summary records (samples not carried).
std::vector<BenchmarkRecord> parse_csv(std::string_view text);

}  // namespace fiberrt::bench
