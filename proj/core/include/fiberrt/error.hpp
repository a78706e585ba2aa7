#pragma once

#include <stdexcept>
#include <string>

namespace fiberrt {

/// Error codes for every failure the runtime can report.
enum class Errc {
  SizeTooSmall,
  AllocationFailure,
  StackNotIntact,
  DeadContext,
  BackendMismatch,
  UnknownBackend,
  BackendUnavailable,
  SelectionAfterInit,
  NegativeInitial,
  BodyModeMismatch,
  SendToDirect,
  ReceiveOnNonInput,
  AlreadyCompleted,
  ReplyToSend,
  DeadlockDetected,
  UnknownKernel,
  EmptyInput,
  InvalidArgument,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fiberrt
