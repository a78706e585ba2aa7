#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

namespace fiberrt {

inline constexpr std::size_t kMinStackBytes = 16 * 1024;
inline constexpr std::size_t kStackAlignment = 16;
inline constexpr std::uint32_t kGuardWord = 0x5349'4C49u;
inline constexpr std::size_t kGuardWords = 8;
inline constexpr std::size_t kGuardBytes = kGuardWords * sizeof(std::uint32_t);

enum class StackCheck { Intact, Overflow, Underflow, Both };

const char* stack_check_name(StackCheck c) noexcept;

/// Guard-instrumented stack memory for one green process. The usable span
/// sits between two canary sequences; a write into the low sequence is
/// classified as overflow, into the high one as underflow.
class StackRegion {
 public:
  StackRegion() = default;
  StackRegion(StackRegion&&) noexcept = default;
  StackRegion& operator=(StackRegion&&) noexcept = default;
  StackRegion(const StackRegion&) = delete;
  StackRegion& operator=(const StackRegion&) = delete;

  bool valid() const noexcept { return mem_ != nullptr; }
  std::size_t size() const noexcept { return size_; }

  std::byte* base() const noexcept { return mem_.get(); }
  std::byte* usable_base() const noexcept { return mem_.get() + kGuardBytes; }
  std::size_t usable_size() const noexcept { return size_ - 2 * kGuardBytes; }

  std::span<std::uint32_t> guard_low() const noexcept {
    return {reinterpret_cast<std::uint32_t*>(mem_.get()), kGuardWords};
  }
  std::span<std::uint32_t> guard_high() const noexcept {
    return {reinterpret_cast<std::uint32_t*>(mem_.get() + size_ - kGuardBytes), kGuardWords};
  }

 private:
  friend StackRegion stack_new(std::size_t, std::size_t);

  struct Free {
    void operator()(std::byte* p) const noexcept { ::operator delete[](p, std::align_val_t(kStackAlignment)); }
  };

  std::unique_ptr<std::byte[], Free> mem_;
  std::size_t size_ = 0;
};

/// Allocates a stack of at least `bytes` (rounded up to the platform
/// alignment) and writes both guard sequences.
StackRegion stack_new(std::size_t bytes, std::size_t min_bytes = kMinStackBytes);

/// Classifies a region by comparing its guard sequences against the canary
/// pattern. Pure inspection.
StackCheck stack_check(const StackRegion& region) noexcept;

}  // namespace fiberrt
