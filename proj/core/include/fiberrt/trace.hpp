#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fiberrt {

enum class TraceEvent : std::uint8_t {
  Spawn,
  Run,
  Yield,
  Block,
  Unblock,
  Exit,
  Send,
  Recv,
  CallStart,
  Reply,
};

const char* trace_event_name(TraceEvent e) noexcept;

struct TraceRecord {
  std::uint64_t seq;
  TraceEvent event;
  std::uint64_t pid;
};

/// Append-only activation log. One line per event: `<seq> <EVENT> <pid>`.
class TraceLog {
 public:
  bool enabled() const noexcept { return enabled_; }
  void enable(bool on) noexcept { enabled_ = on; }

  void emit(TraceEvent event, std::uint64_t pid) {
    records_.push_back({++seq_, event, pid});
  }

  const std::vector<TraceRecord>& records() const noexcept { return records_; }
  void clear() noexcept {
    records_.clear();
    seq_ = 0;
  }

  std::vector<std::string> lines() const;
  std::string render() const;

 private:
  bool enabled_ = false;
  std::uint64_t seq_ = 0;
  std::vector<TraceRecord> records_;
};

}  // namespace fiberrt
