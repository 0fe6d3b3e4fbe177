#pragma once

#include "choreo/core/message.hpp"

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace choreo
{

/// Emulated native tracing substrate: which tracer collects events for each
/// system process, per-process event numbering, and the per-tracer stream of
/// emitted-but-undelivered events.
///
/// Every tracer has a single inbound event stream, so events reach a tracer
/// in the order they were emitted even when they come from different tracees.
/// Bindings outlive the traced process; a terminated process can still be
/// cleared or preempted.
class TraceBindings
{
  public:
    std::optional<Pid> tracer_of(Pid ps) const;

    /// Binds p_s to p_t. Throws AlreadyTraced when p_s is bound.
    void trace(Pid ps, Pid pt);

    /// Unbinds p_s from p_t and extracts, in emission order, every event of
    /// p_s still in p_t's stream. With flush disabled the events stay in the
    /// stream. Throws NotTraced unless p_s is bound to p_t.
    std::vector<TraceEvent> clear(Pid ps, Pid pt, bool flush = true);

    /// clear(p_s, current tracer) followed by trace(p_s, p_t).
    /// Returns the previous tracer. Throws NotTraced when p_s is unbound.
    Pid preempt(Pid ps, Pid pt, std::vector<TraceEvent>& flushed, bool flush = true);

    /// Fork-time inheritance: the child takes the parent's tracer, if any.
    void inherit(Pid parent, Pid child);

    /// Builds the next event of p_s (fresh seq) without routing it anywhere.
    TraceEvent next_event(Pid ps, Action act, std::optional<Pid> tgt, std::optional<Signature> sig);

    /// When p_s is bound, builds its next event and appends it to the bound
    /// tracer's stream; returns the tracer and the event.
    std::optional<std::pair<Pid, TraceEvent>> emit(Pid ps, Action act, std::optional<Pid> tgt,
                                                   std::optional<Signature> sig);

    bool has_pending(Pid pt) const;
    /// Pops the head of p_t's stream. Precondition: has_pending(p_t).
    TraceEvent pop(Pid pt);

    const std::map<Pid, Pid>& table() const noexcept { return table_; }
    const std::map<Pid, std::deque<TraceEvent>>& streams() const noexcept { return streams_; }
    std::uint64_t emitted(Pid ps) const;

    void fingerprint(std::string& out) const;

  private:
    std::map<Pid, Pid> table_;
    std::map<Pid, std::deque<TraceEvent>> streams_;
    std::map<Pid, std::uint64_t> seq_;
};

} // namespace choreo
