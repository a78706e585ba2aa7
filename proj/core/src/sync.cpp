#include "fiberrt/sync.hpp"

#include <algorithm>

namespace fiberrt {

Semaphore::Semaphore(std::int64_t initial) : count_(initial) {
  if (initial < 0) {
    throw Error(Errc::NegativeInitial, "semaphore initialized with " + std::to_string(initial));
  }
}

void sem_p(Runtime& rt, Semaphore& s) {
  if (rt.current() == nullptr) throw Error(Errc::InvalidArgument, "P outside a green process");
  if (--s.count_ < 0) {
    rt.block_current(s.waiters_);
  }
}

void sem_v(Runtime& rt, Semaphore& s) {
  if (++s.count_ <= 0) {
    rt.unblock_first(s.waiters_);
  }
}

namespace {

void copy_args(std::span<const Word> args, std::array<Word, kMaxArgWords>& dst, std::uint8_t& len) {
  if (args.size() > kMaxArgWords) {
    throw Error(Errc::InvalidArgument,
                "invocation carries more than " + std::to_string(kMaxArgWords) + " words");
  }
  std::copy(args.begin(), args.end(), dst.begin());
  len = static_cast<std::uint8_t>(args.size());
}

}  // namespace

Operation::Operation(OpMode mode, std::uint32_t owner_resource, OpBody body)
    : mode_(mode), owner_resource_(owner_resource), body_(std::move(body)) {
  bool needs_body = mode_ != OpMode::Input;
  if (needs_body != static_cast<bool>(body_)) {
    throw Error(Errc::BodyModeMismatch, needs_body ? "direct/proc operation requires a body"
                                                   : "input operation must not have a body");
  }
}

Operation::~Operation() {
  // Queued sends are heap records owned by the inbox; queued calls live on
  // their blocked callers' stacks.
  while (Invocation* inv = inbox_pop()) {
    if (inv->kind_ == InvocationKind::Send) delete inv;
  }
}

void Operation::inbox_push(Invocation* inv) noexcept {
  inv->inbox_link_ = nullptr;
  if (inbox_tail_ == nullptr) {
    inbox_head_ = inbox_tail_ = inv;
  } else {
    inbox_tail_->inbox_link_ = inv;
    inbox_tail_ = inv;
  }
  ++inbox_size_;
}

Invocation* Operation::inbox_pop() noexcept {
  Invocation* inv = inbox_head_;
  if (inv != nullptr) {
    inbox_head_ = inv->inbox_link_;
    if (inbox_head_ == nullptr) inbox_tail_ = nullptr;
    inv->inbox_link_ = nullptr;
    --inbox_size_;
  }
  return inv;
}

namespace {

// Fills the Received slot of the oldest parked receiver and readies it.
// For sends the payload is copied and the heap record is not needed.
void hand_to_waiting_receiver(Runtime& rt, Operation& op, WaitQueue& receivers,
                              std::span<const Word> args, InvocationKind kind, Invocation* token) {
  ProcessDescriptor* receiver = receivers.front();
  auto* slot = static_cast<Received*>(receiver->pending_recv);
  copy_args(args, slot->args, slot->argc);
  slot->kind = kind;
  slot->call_token = token;
  rt.unblock_first(receivers);
  (void)op;
}

}  // namespace

void op_send(Runtime& rt, Operation& op, std::span<const Word> args) {
  if (op.mode_ == OpMode::Direct) {
    throw Error(Errc::SendToDirect, "send targets a direct operation");
  }
  if (rt.trace().enabled()) rt.trace().emit(TraceEvent::Send, rt.current_pid());
  ++op.sent_;

  if (op.mode_ == OpMode::Proc) {
    // Asynchronous flavor of the new-process servicing path.
    std::array<Word, kMaxArgWords> packed{};
    std::uint8_t argc = 0;
    copy_args(args, packed, argc);
    Operation* target = &op;
    rt.spawn([target, packed, argc](Runtime& inner) {
      target->body_(inner, std::span<const Word>(packed.data(), argc));
    });
    return;
  }

  if (!op.receivers_.empty()) {
    hand_to_waiting_receiver(rt, op, op.receivers_, args, InvocationKind::Send, nullptr);
    return;
  }
  auto* inv = new Invocation;
  copy_args(args, inv->args_, inv->argc_);
  inv->kind_ = InvocationKind::Send;
  op.inbox_push(inv);
}

void op_send(Runtime& rt, Operation& op, std::initializer_list<Word> args) {
  op_send(rt, op, std::span<const Word>(args.begin(), args.size()));
}

Received op_receive(Runtime& rt, Operation& op) {
  if (op.mode_ != OpMode::Input) {
    throw Error(Errc::ReceiveOnNonInput, "receive targets a non-input operation");
  }
  ProcessDescriptor* cur = rt.current();
  if (cur == nullptr) throw Error(Errc::InvalidArgument, "receive outside a green process");

  Received out;
  if (Invocation* inv = op.inbox_pop()) {
    copy_args(inv->args(), out.args, out.argc);
    out.kind = inv->kind_;
    if (inv->kind_ == InvocationKind::Send) {
      delete inv;
    } else {
      out.call_token = inv;
    }
  } else {
    cur->pending_recv = &out;
    rt.block_current(op.receivers_);
    cur->pending_recv = nullptr;  // slot filled by the sender that woke us
  }
  ++op.received_;
  if (rt.trace().enabled()) rt.trace().emit(TraceEvent::Recv, cur->pid);
  return out;
}

void detail_reply(Runtime& rt, Invocation* inv, Word value) {
  if (inv->completed_) {
    throw Error(Errc::AlreadyCompleted, "invocation already carries a reply");
  }
  inv->reply_ = value;
  inv->completed_ = true;
  if (rt.trace().enabled()) rt.trace().emit(TraceEvent::Reply, rt.current_pid());
  rt.unblock_first(inv->caller_wait_);
}

void op_reply(Runtime& rt, Received& received, Word value) {
  if (received.kind == InvocationKind::Send || received.call_token == nullptr) {
    throw Error(Errc::ReplyToSend, "only call invocations take replies");
  }
  detail_reply(rt, received.call_token, value);
}

Word op_call(Runtime& rt, Operation& op, std::span<const Word> args) {
  ProcessDescriptor* cur = rt.current();
  if (cur == nullptr) throw Error(Errc::InvalidArgument, "call outside a green process");
  if (rt.trace().enabled()) rt.trace().emit(TraceEvent::CallStart, cur->pid);

  switch (op.mode_) {
    case OpMode::Direct: {
      if (cur->resource_id == op.owner_resource_) {
        // Local optimised path: plain body invocation on the caller's stack.
        Word result = op.body_(rt, args);
        if (rt.trace().enabled()) rt.trace().emit(TraceEvent::Reply, cur->pid);
        return result;
      }
      // Cross-resource path: arguments marshal through an invocation record
      // even though execution stays inline.
      Invocation inv;
      copy_args(args, inv.args_, inv.argc_);
      inv.kind_ = InvocationKind::Call;
      inv.caller_pid_ = cur->pid;
      inv.reply_ = op.body_(rt, inv.args());
      inv.completed_ = true;
      if (rt.trace().enabled()) rt.trace().emit(TraceEvent::Reply, cur->pid);
      return inv.reply_;
    }

    case OpMode::Proc: {
      // New servicing process per invocation; the caller waits for its reply.
      Invocation inv;
      copy_args(args, inv.args_, inv.argc_);
      inv.kind_ = InvocationKind::Call;
      inv.caller_pid_ = cur->pid;
      Operation* target = &op;
      Invocation* pending = &inv;
      ++op.sent_;
      rt.spawn([target, pending](Runtime& inner) {
        Word result = target->body_(inner, pending->args());
        detail_reply(inner, pending, result);
      });
      rt.block_current(inv.caller_wait_);
      return inv.reply_;
    }

    case OpMode::Input: {
      // Rendezvous: enqueue, wait for a servicer's receive + reply.
      Invocation inv;
      copy_args(args, inv.args_, inv.argc_);
      inv.kind_ = InvocationKind::Call;
      inv.caller_pid_ = cur->pid;
      ++op.sent_;
      if (!op.receivers_.empty()) {
        hand_to_waiting_receiver(rt, op, op.receivers_, inv.args(), InvocationKind::Call, &inv);
      } else {
        op.inbox_push(&inv);
      }
      rt.block_current(inv.caller_wait_);
      return inv.reply_;
    }
  }
  throw Error(Errc::InvalidArgument, "corrupt operation mode");
}

Word op_call(Runtime& rt, Operation& op, std::initializer_list<Word> args) {
  return op_call(rt, op, std::span<const Word>(args.begin(), args.size()));
}

}  // namespace fiberrt
