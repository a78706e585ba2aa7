#include "fiberrt/trace.hpp"

namespace fiberrt {

const char* trace_event_name(TraceEvent e) noexcept {
  switch (e) {
    case TraceEvent::Spawn: return "SPAWN";
    case TraceEvent::Run: return "RUN";
    case TraceEvent::Yield: return "YIELD";
    case TraceEvent::Block: return "BLOCK";
    case TraceEvent::Unblock: return "UNBLOCK";
    case TraceEvent::Exit: return "EXIT";
    case TraceEvent::Send: return "SEND";
    case TraceEvent::Recv: return "RECV";
    case TraceEvent::CallStart: return "CALLSTART";
    case TraceEvent::Reply: return "REPLY";
  }
  return "?";
}

std::vector<std::string> TraceLog::lines() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) {
    out.push_back(std::to_string(r.seq) + " " + trace_event_name(r.event) + " " + std::to_string(r.pid));
  }
  return out;
}

std::string TraceLog::render() const {
  std::string out;
  for (const auto& line : lines()) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace fiberrt
