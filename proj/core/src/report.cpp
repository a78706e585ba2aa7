#include "fiberrt/report.hpp"

#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "fiberrt/error.hpp"

namespace fiberrt::bench {

namespace {

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string csv_quote(const std::string& field) { return "\"" + field + "\""; }

}  // namespace

std::string render_table(std::span<const BenchmarkRecord> records,
                         std::span<const std::string> backend_columns, const ReportMeta& meta) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no benchmark records to render");

  // (kernel, backend) -> median µs
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& r : records) cell[{r.spec.name, r.backend}] = r.median_per_op_ns / 1000.0;

  std::string out;
  out += "# runtime benchmark report\n";
  out += "# medians in microseconds per operation, net of measured loop overhead\n";
  out += "# timer resolution <= " + format_double(meta.timer_resolution_ns, 0) + " ns\n";
  for (const auto& [backend, overhead] : meta.loop_overhead_ns) {
    out += "# loop overhead [" + backend + "]: " + format_double(overhead, 3) + " ns/iteration\n";
  }
  for (const auto& note : meta.notes) out += "# " + note + "\n";

  constexpr int kNameWidth = 42;
  constexpr int kColWidth = 12;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %5s", kNameWidth, "kernel", "class");
  out += line;
  for (const auto& b : backend_columns) {
    std::snprintf(line, sizeof line, " %*s", kColWidth, b.c_str());
    out += line;
  }
  out += '\n';

  for (const auto& name : kernel_names()) {
    std::snprintf(line, sizeof line, "%-*s %5d", kNameWidth, name.c_str(), int(kernel_class(name)));
    out += line;
    for (const auto& b : backend_columns) {
      auto it = cell.find({name, b});
      std::string value = it == cell.end() ? "n/a" : format_double(it->second, 3);
      std::snprintf(line, sizeof line, " %*s", kColWidth, value.c_str());
      out += line;
    }
    out += '\n';
  }
  return out;
}

std::string render_csv(std::span<const BenchmarkRecord> records, const ReportMeta& meta) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no benchmark records to render");

  std::string out;
  out += "# timer_resolution_ns=" + format_double(meta.timer_resolution_ns, 0) + "\n";
  for (const auto& [backend, overhead] : meta.loop_overhead_ns) {
    out += "# loop_overhead_ns[" + backend + "]=" + format_double(overhead, 3) + "\n";
  }
  out += "kernel,class,backend,reps,inner_iterations,median_ns,switches_per_op\n";
  for (const auto& r : records) {
    out += csv_quote(r.spec.name);
    out += "," + std::to_string(int(r.spec.cls));
    out += "," + r.backend;
    out += "," + std::to_string(r.spec.repetitions);
    out += "," + std::to_string(r.spec.inner_iterations);
    out += "," + format_double(r.median_per_op_ns, 3);
    out += "," + std::to_string(r.switches_per_op);
    out += "\n";
  }
  return out;
}

std::string render_json(std::span<const BenchmarkRecord> records, const ReportMeta& meta) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no benchmark records to render");

  nlohmann::json doc;
  doc["meta"]["timer_resolution_ns"] = meta.timer_resolution_ns;
  for (const auto& [backend, overhead] : meta.loop_overhead_ns) {
    doc["meta"]["loop_overhead_ns"][backend] = overhead;
  }
  doc["meta"]["notes"] = meta.notes;
  doc["records"] = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json jr;
    jr["kernel"] = r.spec.name;
    jr["class"] = int(r.spec.cls);
    jr["backend"] = r.backend;
    jr["reps"] = r.spec.repetitions;
    jr["inner_iterations"] = r.spec.inner_iterations;
    jr["median_ns"] = r.median_per_op_ns;
    jr["switches_per_op"] = r.switches_per_op;
    jr["clamped"] = r.clamped;
    jr["samples"] = nlohmann::json::array();
    for (const auto& s : r.samples) {
      jr["samples"].push_back({{"elapsed_ns", s.elapsed_ns}, {"iterations", s.iterations}});
    }
    doc["records"].push_back(std::move(jr));
  }
  return doc.dump(2) + "\n";
}

std::vector<BenchmarkRecord> parse_csv(std::string_view text) {
  std::vector<BenchmarkRecord> records;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }

    BenchmarkRecord r;
    std::string_view rest = line;
    if (rest.size() >= 1 && rest[0] == '"') {
      std::size_t close = rest.find('"', 1);
      if (close == std::string_view::npos) throw Error(Errc::InvalidArgument, "unterminated quote in CSV");
      r.spec.name = std::string(rest.substr(1, close - 1));
      rest = rest.substr(close + 2);  // skip quote and comma
    } else {
      std::size_t comma = rest.find(',');
      r.spec.name = std::string(rest.substr(0, comma));
      rest = rest.substr(comma + 1);
    }

    std::vector<std::string> fields;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      fields.emplace_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (fields.size() != 6) throw Error(Errc::InvalidArgument, "malformed CSV row");
    r.spec.cls = KernelClass(std::stoi(fields[0]));
    r.backend = fields[1];
    r.spec.repetitions = std::stoi(fields[2]);
    r.spec.inner_iterations = std::stoull(fields[3]);
    r.median_per_op_ns = std::stod(fields[4]);
    r.switches_per_op = std::stoull(fields[5]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace fiberrt::bench
