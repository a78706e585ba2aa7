#pragma once

// Internal backend factories. Each returns a process-lifetime singleton.

#include "fiberrt/context.hpp"

namespace fiberrt::detail {

/// Base of the exceptions the threadpark backend throws to unwind its OS
/// threads (context exit and teardown cancellation). Any catch(...) sitting
/// between a switch point and the backend's thread wrapper must rethrow it.
struct ContextUnwindSignal {};

Backend* portable_backend();
Backend* threadpark_backend();

#if defined(FIBERRT_HAVE_FAST_BACKEND)
Backend* fast_backend();
#endif

/// Fatal: a context entry routine returned instead of switching away.
[[noreturn]] void context_entry_returned();

}  // namespace fiberrt::detail
