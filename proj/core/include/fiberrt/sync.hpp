#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>

#include "fiberrt/runtime.hpp"

namespace fiberrt {

/// Counting semaphore. A negative count records the number of waiters.
class Semaphore {
 public:
  explicit Semaphore(std::int64_t initial);

  std::int64_t count() const noexcept { return count_; }
  std::size_t waiting() const noexcept { return waiters_.size(); }

 private:
  friend void sem_p(Runtime&, Semaphore&);
  friend void sem_v(Runtime&, Semaphore&);

  std::int64_t count_;
  WaitQueue waiters_;
};

/// Decrement; blocks the caller when the count drops below zero.
void sem_p(Runtime& rt, Semaphore& s);

/// Increment; wakes the oldest waiter to the ready tail. Never blocks and
/// never hands off control. Callable from the lane owner between runs.
void sem_v(Runtime& rt, Semaphore& s);

enum class OpMode : std::uint8_t { Direct, Proc, Input };
enum class InvocationKind : std::uint8_t { Send, Call };

inline constexpr std::size_t kMaxArgWords = 8;

class Operation;
class Invocation;
struct Received;

/// Completes a pending call invocation; shared by op_reply and the Direct
/// and Proc call paths.
void detail_reply(Runtime& rt, Invocation* inv, Word value);

/// One pending message or call. Send invocations are owned by the operation
/// inbox; call invocations live on the blocked caller's stack until replied.
class Invocation {
 public:
  InvocationKind kind() const noexcept { return kind_; }
  std::span<const Word> args() const noexcept { return {args_.data(), argc_}; }
  bool completed() const noexcept { return completed_; }
  Word reply() const noexcept { return reply_; }
  std::uint64_t caller() const noexcept { return caller_pid_; }

 private:
  friend class Operation;
  friend void op_send(Runtime&, Operation&, std::span<const Word>);
  friend Received op_receive(Runtime&, Operation&);
  friend Word op_call(Runtime&, Operation&, std::span<const Word>);
  friend void detail_reply(Runtime&, Invocation*, Word);

  std::array<Word, kMaxArgWords> args_{};
  std::uint8_t argc_ = 0;
  InvocationKind kind_ = InvocationKind::Send;
  Word reply_ = 0;
  bool completed_ = false;
  std::uint64_t caller_pid_ = 0;
  WaitQueue caller_wait_;
  Invocation* inbox_link_ = nullptr;
};

/// Payload handed back by op_receive. For calls it carries the token the
/// servicer must reply to.
struct Received {
  std::array<Word, kMaxArgWords> args{};
  std::uint8_t argc = 0;
  InvocationKind kind = InvocationKind::Send;
  Invocation* call_token = nullptr;

  std::span<const Word> view() const noexcept { return {args.data(), argc}; }
};

using OpBody = std::function<Word(Runtime&, std::span<const Word>)>;

/// Communication endpoint: serviced inline (Direct), by a fresh process per
/// invocation (Proc), or by explicit receive (Input).
class Operation {
 public:
  Operation(OpMode mode, std::uint32_t owner_resource, OpBody body = {});
  ~Operation();
  Operation(const Operation&) = delete;
  Operation& operator=(const Operation&) = delete;

  OpMode mode() const noexcept { return mode_; }
  std::uint32_t owner_resource() const noexcept { return owner_resource_; }
  std::size_t inbox_size() const noexcept { return inbox_size_; }
  std::size_t receivers_waiting() const noexcept { return receivers_.size(); }
  std::uint64_t sent_total() const noexcept { return sent_; }
  std::uint64_t received_total() const noexcept { return received_; }

 private:
  friend void op_send(Runtime&, Operation&, std::span<const Word>);
  friend Received op_receive(Runtime&, Operation&);
  friend Word op_call(Runtime&, Operation&, std::span<const Word>);

  void inbox_push(Invocation* inv) noexcept;
  Invocation* inbox_pop() noexcept;

  OpMode mode_;
  std::uint32_t owner_resource_;
  OpBody body_;
  Invocation* inbox_head_ = nullptr;
  Invocation* inbox_tail_ = nullptr;
  std::size_t inbox_size_ = 0;
  WaitQueue receivers_;
  std::uint64_t sent_ = 0;
  std::uint64_t received_ = 0;
};

/// Asynchronous invocation. Input: hand to the oldest waiting receiver or
/// queue in the inbox. Proc: spawn a servicing process. Never blocks.
void op_send(Runtime& rt, Operation& op, std::span<const Word> args);
void op_send(Runtime& rt, Operation& op, std::initializer_list<Word> args);

/// Takes the oldest invocation, blocking while the inbox is empty.
Received op_receive(Runtime& rt, Operation& op);

/// Synchronous invocation; the flavor depends on the operation mode and on
/// whether the caller shares the operation's resource.
Word op_call(Runtime& rt, Operation& op, std::span<const Word> args);
Word op_call(Runtime& rt, Operation& op, std::initializer_list<Word> args);

/// Completes a received call: stores the reply and readies the caller.
void op_reply(Runtime& rt, Received& received, Word value);

}  // namespace fiberrt
