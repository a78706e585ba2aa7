// Command-line front door: cstest, vsuite, csloop, bench, and report
// subcommands over one binary.
//
// Exit status: 0 success, 1 verify failure, 2 usage error, 3 backend
// unavailable.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fiberrt/bench.hpp"
#include "fiberrt/context.hpp"
#include "fiberrt/error.hpp"
#include "fiberrt/report.hpp"
#include "fiberrt/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBackendUnavailable = 3;

// Every backend name this build knows about, available or not; report
// columns use this set so missing backends render as n/a.
const std::vector<std::string> kAllBackendNames = {"fast", "portable", "threadpark"};

struct Options {
  std::string backend = "portable";
  int seconds = 2;
  int reps = 10;
  std::string format = "table";
  std::string out;
  std::size_t stack_bytes = 64 * 1024;
  bool trace = true;
  std::string input;  // report subcommand
};

std::vector<std::string> expand_backends(const std::string& name) {
  if (name != "all") {
    if (std::find(kAllBackendNames.begin(), kAllBackendNames.end(), name) == kAllBackendNames.end()) {
      throw fiberrt::Error(fiberrt::Errc::UnknownBackend, "no backend named '" + name + "'");
    }
    if (!fiberrt::backend_available(name)) {
      throw fiberrt::Error(fiberrt::Errc::BackendUnavailable,
                           "backend '" + name + "' is not compiled into this build");
    }
    return {name};
  }
  std::vector<std::string> out;
  for (const auto& info : fiberrt::backend_list()) out.emplace_back(info.name);
  return out;
}

void write_output(const Options& opt, const std::string& text) {
  if (opt.out.empty() || opt.out == "-") {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream f(opt.out, std::ios::binary);
  if (!f) throw fiberrt::Error(fiberrt::Errc::InvalidArgument, "cannot open " + opt.out);
  f << text;
}

int map_error(const fiberrt::Error& e) {
  std::fprintf(stderr, "fiberrt: %s\n", e.what());
  switch (e.code()) {
    case fiberrt::Errc::BackendUnavailable: return kExitBackendUnavailable;
    case fiberrt::Errc::UnknownBackend:
    case fiberrt::Errc::InvalidArgument:
    case fiberrt::Errc::SizeTooSmall:
    case fiberrt::Errc::EmptyInput:
    case fiberrt::Errc::UnknownKernel: return kExitUsage;
    default: return kExitUsage;
  }
}

fiberrt::verify::VerifyConfig verify_config(const Options& opt) {
  fiberrt::verify::VerifyConfig cfg;
  cfg.stack_bytes = opt.stack_bytes;
  cfg.tracing = opt.trace;
  return cfg;
}

int emit_verify_reports(const Options& opt, const std::vector<fiberrt::verify::VerifyReport>& reports) {
  std::string text;
  if (opt.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rep : reports) arr.push_back(nlohmann::json::parse(fiberrt::verify::render_json(rep)));
    text = arr.dump(2) + "\n";
  } else {
    for (const auto& rep : reports) text += fiberrt::verify::render_text(rep);
  }
  write_output(opt, text);
  for (const auto& rep : reports) {
    if (!rep.overall) return kExitVerifyFailed;
  }
  return kExitOk;
}

int cmd_cstest(const Options& opt) {
  std::vector<fiberrt::verify::VerifyReport> reports;
  for (const auto& backend : expand_backends(opt.backend)) {
    reports.push_back(fiberrt::verify::run_cstest(backend, verify_config(opt)));
  }
  return emit_verify_reports(opt, reports);
}

int cmd_vsuite(const Options& opt) {
  std::vector<fiberrt::verify::VerifyReport> reports;
  for (const auto& backend : expand_backends(opt.backend)) {
    reports.push_back(fiberrt::verify::run_vsuite(backend, verify_config(opt)));
  }
  return emit_verify_reports(opt, reports);
}

// bench and csloop refuse to run unless cstest passes in the same invocation.
bool gate_passes(const std::string& backend, const Options& opt) {
  auto rep = fiberrt::verify::run_cstest(backend, verify_config(opt));
  std::fputs(fiberrt::verify::render_text(rep).c_str(), stderr);
  return rep.overall;
}

int cmd_csloop(const Options& opt) {
  std::string text;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& backend : expand_backends(opt.backend)) {
    if (!gate_passes(backend, opt)) return kExitVerifyFailed;
    auto result = fiberrt::bench::csloop(backend, opt.seconds);
    if (opt.format == "json") {
      arr.push_back({{"backend", backend},
                     {"seconds", opt.seconds},
                     {"switches_total", result.switches_total},
                     {"ns_per_switch", result.ns_per_switch}});
    } else if (opt.format == "csv") {
      if (text.empty()) text = "backend,seconds,switches_total,ns_per_switch\n";
      char line[160];
      std::snprintf(line, sizeof line, "%s,%d,%llu,%.2f\n", backend.c_str(), opt.seconds,
                    static_cast<unsigned long long>(result.switches_total), result.ns_per_switch);
      text += line;
    } else {
      char line[160];
      std::snprintf(line, sizeof line, "%-12s %llu switches in ~%d s, %.2f ns/switch (%.3f us)\n",
                    backend.c_str(), static_cast<unsigned long long>(result.switches_total), opt.seconds,
                    result.ns_per_switch, result.ns_per_switch / 1000.0);
      text += line;
    }
  }
  if (opt.format == "json") text = arr.dump(2) + "\n";
  write_output(opt, text);
  return kExitOk;
}

int cmd_bench(const Options& opt) {
  std::vector<fiberrt::bench::BenchmarkRecord> records;
  fiberrt::bench::ReportMeta meta;
  meta.timer_resolution_ns = fiberrt::bench::timer_resolution_ns();
  meta.notes.push_back("reps=" + std::to_string(opt.reps));

  for (const auto& backend : expand_backends(opt.backend)) {
    if (!gate_passes(backend, opt)) return kExitVerifyFailed;
    meta.loop_overhead_ns.emplace_back(backend, fiberrt::bench::calibrate_loop_overhead(backend));
    fiberrt::bench::BenchConfig cfg;
    cfg.stack_bytes = opt.stack_bytes;
    auto suite = fiberrt::bench::run_suite(backend, opt.reps, cfg);
    records.insert(records.end(), std::make_move_iterator(suite.begin()),
                   std::make_move_iterator(suite.end()));
  }

  std::vector<std::string> columns =
      opt.backend == "all" ? kAllBackendNames : std::vector<std::string>{opt.backend};
  std::string text;
  if (opt.format == "csv") {
    text = fiberrt::bench::render_csv(records, meta);
  } else if (opt.format == "json") {
    text = fiberrt::bench::render_json(records, meta);
  } else {
    text = fiberrt::bench::render_table(records, columns, meta);
  }
  write_output(opt, text);
  return kExitOk;
}

int cmd_report(const Options& opt) {
  std::string content;
  if (opt.input.empty() || opt.input == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    content = ss.str();
  } else {
    std::ifstream f(opt.input, std::ios::binary);
    if (!f) throw fiberrt::Error(fiberrt::Errc::InvalidArgument, "cannot open " + opt.input);
    std::stringstream ss;
    ss << f.rdbuf();
    content = ss.str();
  }

  auto records = fiberrt::bench::parse_csv(content);
  fiberrt::bench::ReportMeta meta;
  meta.timer_resolution_ns = fiberrt::bench::timer_resolution_ns();

  std::vector<std::string> columns;
  for (const auto& r : records) {
    if (std::find(columns.begin(), columns.end(), r.backend) == columns.end()) columns.push_back(r.backend);
  }
  std::string text;
  if (opt.format == "csv") {
    text = fiberrt::bench::render_csv(records, meta);
  } else if (opt.format == "json") {
    text = fiberrt::bench::render_json(records, meta);
  } else {
    text = fiberrt::bench::render_table(records, columns, meta);
  }
  write_output(opt, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative fiber runtime: verification and benchmarks"};
  app.require_subcommand(1);

  Options opt;
  if (const char* env = std::getenv("FIBER_RT_BACKEND")) opt.backend = env;

  auto add_common = [&](CLI::App* sub, bool with_reps, bool with_seconds) {
    sub->add_option("--backend", opt.backend, "backend name or 'all'")->capture_default_str();
    sub->add_option("--format", opt.format, "table, csv, or json")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    sub->add_option("--out", opt.out, "output path (default: stdout)");
    sub->add_option("--stack-bytes", opt.stack_bytes, "green process stack size")->capture_default_str();
    sub->add_flag("--trace,!--no-trace", opt.trace, "enable trace-dependent checks")->capture_default_str();
    if (with_reps) sub->add_option("--reps", opt.reps, "samples per kernel")->capture_default_str();
    if (with_seconds) {
      sub->add_option("--seconds", opt.seconds, "approximate run time")->capture_default_str();
    }
  };

  CLI::App* cstest = app.add_subcommand("cstest", "switching correctness and stack-fault detection");
  add_common(cstest, false, false);
  CLI::App* vsuite = app.add_subcommand("vsuite", "integrated runtime semantics suite");
  add_common(vsuite, false, false);
  CLI::App* csloop = app.add_subcommand("csloop", "raw context switch throughput");
  add_common(csloop, false, true);
  CLI::App* bench = app.add_subcommand("bench", "the twelve-kernel timing suite");
  add_common(bench, true, false);
  CLI::App* report = app.add_subcommand("report", "re-render a benchmark CSV");
  add_common(report, false, false);
  report->add_option("input", opt.input, "CSV file produced by bench (default: stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (csloop->parsed() && opt.seconds < 1) {
      std::fprintf(stderr, "fiberrt: --seconds must be at least 1\n");
      return kExitUsage;
    }
    if (cstest->parsed()) return cmd_cstest(opt);
    if (vsuite->parsed()) return cmd_vsuite(opt);
    if (csloop->parsed()) return cmd_csloop(opt);
    if (bench->parsed()) return cmd_bench(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const fiberrt::Error& e) {
    return map_error(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fiberrt: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
