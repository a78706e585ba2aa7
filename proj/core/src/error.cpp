#include "fiberrt/error.hpp"

namespace fiberrt {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::SizeTooSmall: return "SizeTooSmall";
    case Errc::AllocationFailure: return "AllocationFailure";
    case Errc::StackNotIntact: return "StackNotIntact";
    case Errc::DeadContext: return "DeadContext";
    case Errc::BackendMismatch: return "BackendMismatch";
    case Errc::UnknownBackend: return "UnknownBackend";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::SelectionAfterInit: return "SelectionAfterInit";
    case Errc::NegativeInitial: return "NegativeInitial";
    case Errc::BodyModeMismatch: return "BodyModeMismatch";
    case Errc::SendToDirect: return "SendToDirect";
    case Errc::ReceiveOnNonInput: return "ReceiveOnNonInput";
    case Errc::AlreadyCompleted: return "AlreadyCompleted";
    case Errc::ReplyToSend: return "ReplyToSend";
    case Errc::DeadlockDetected: return "DeadlockDetected";
    case Errc::UnknownKernel: return "UnknownKernel";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace fiberrt
