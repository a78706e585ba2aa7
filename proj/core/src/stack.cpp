#include "fiberrt/stack.hpp"

#include <algorithm>
#include <new>

#include "fiberrt/error.hpp"

namespace fiberrt {

const char* stack_check_name(StackCheck c) noexcept {
  switch (c) {
    case StackCheck::Intact: return "Intact";
    case StackCheck::Overflow: return "Overflow";
    case StackCheck::Underflow: return "Underflow";
    case StackCheck::Both: return "Both";
  }
  return "?";
}

StackRegion stack_new(std::size_t bytes, std::size_t min_bytes) {
  if (bytes < min_bytes) {
    throw Error(Errc::SizeTooSmall, "stack of " + std::to_string(bytes) + " bytes is below the " +
                                        std::to_string(min_bytes) + " byte floor");
  }
  std::size_t size = (bytes + kStackAlignment - 1) & ~(kStackAlignment - 1);

  StackRegion region;
  try {
    region.mem_.reset(new (std::align_val_t(kStackAlignment)) std::byte[size]);
  } catch (const std::bad_alloc&) {
    throw Error(Errc::AllocationFailure, "cannot allocate " + std::to_string(size) + " byte stack");
  }
  region.size_ = size;

#ifndef FIBERRT_NO_STACK_GUARDS
  std::ranges::fill(region.guard_low(), kGuardWord);
  std::ranges::fill(region.guard_high(), kGuardWord);
#endif
  return region;
}

StackCheck stack_check(const StackRegion& region) noexcept {
#ifdef FIBERRT_NO_STACK_GUARDS
  (void)region;
  return StackCheck::Intact;
#else
  auto intact = [](std::span<const std::uint32_t> guard) {
    return std::ranges::all_of(guard, [](std::uint32_t w) { return w == kGuardWord; });
  };
  bool low_ok = intact(region.guard_low());
  bool high_ok = intact(region.guard_high());
  if (low_ok && high_ok) return StackCheck::Intact;
  if (!low_ok && !high_ok) return StackCheck::Both;
  return low_ok ? StackCheck::Underflow : StackCheck::Overflow;
#endif
}

}  // namespace fiberrt
