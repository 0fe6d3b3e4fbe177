#pragma once

#include "choreo/runtime/log.hpp"
#include "choreo/runtime/mail.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace choreo
{

using Mailbox = std::deque<Mail>;

class ProcessContext;

/// The code a process runs. One call to step() is one atomic scheduler step:
/// consume at most one message and react to it, or execute one script action.
class Behavior
{
  public:
    virtual ~Behavior() = default;

    /// Whether step() can make progress given the current mailbox.
    virtual bool ready(const Mailbox& mailbox) const = 0;
    virtual void step(ProcessContext& ctx) = 0;
    virtual std::unique_ptr<Behavior> clone() const = 0;
    /// Appends a canonical rendering of the private state.
    virtual void fingerprint(std::string& out) const = 0;
};

/// Creates the behavior for a system process forked with the given signature.
using SystemFactory =
    std::function<std::unique_ptr<Behavior>(const Signature& sig, Pid self, std::optional<Pid> parent)>;

/// Synchronous analysis attached to the emission point of every system
/// action. Used for inline monitoring, where no tracer processes exist.
class InlineHook
{
  public:
    virtual ~InlineHook() = default;
    virtual void on_event(const TraceEvent& e, ProcessContext& ctx) = 0;
    virtual std::unique_ptr<InlineHook> clone() const = 0;
    virtual void fingerprint(std::string& out) const = 0;
};

class Runtime;

/// The operations available to a process during its step. It deliberately
/// exposes no step counter or clock.
class ProcessContext
{
  public:
    ProcessContext(Runtime& rt, Pid self) : rt_(rt), self_(self) {}

    Pid self() const noexcept { return self_; }
    const Mailbox& mailbox() const;

    /// Dequeues the head of the mailbox. Precondition: mailbox not empty.
    Mail receive_any(std::string note = {});

    /// Removes the first message satisfying pred, leaving the rest in order.
    template <class Pred>
    std::optional<Mail> receive_matching(Pred&& pred, std::string note = {})
    {
        const auto& mb = mailbox();
        for (std::size_t i = 0; i < mb.size(); ++i)
            if (pred(mb[i]))
                return take(i, std::move(note));
        return std::nullopt;
    }

    void send(Pid to, Mail m, Via via = Via::Plain);

    /// System processes only: forks a child running sig. The child inherits
    /// the caller's tracer and the frk event is emitted in this same step.
    Pid fork(const Signature& sig);
    void exit();
    void crash();

    /// Spawns a monitor-side process (tracer or analyser).
    Pid spawn(std::unique_ptr<Behavior> behavior, Pid::Kind kind, std::string role);

    void trace(Pid ps, Pid pt);
    void clear(Pid ps, Pid pt);
    /// Returns the previous tracer of p_s.
    Pid preempt(Pid ps, Pid pt);
    void resume(Pid ps);

    /// Ends a monitor-side process.
    void terminate();

    bool logging(EntryKind k) const;
    /// Records an entry stamped with the current step and this process.
    void log(Entry e);

  private:
    Mail take(std::size_t index, std::string note);

    Runtime& rt_;
    Pid self_;
};

} // namespace choreo
