#pragma once

#include "choreo/core/monitor_spec.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace choreo
{

/// Immutable transition table produced by compile_monitor.
struct CompiledAutomaton
{
    struct Transition
    {
        EventPattern pattern;
        std::size_t to = 0;
    };

    std::string name;
    Signature target;
    std::vector<std::string> states;
    std::vector<Verdict> labels;
    std::vector<std::vector<Transition>> delta;
    std::size_t initial = 0;
    std::vector<std::string> warnings;
};

/// Deterministic sequence recognizer. Events that match no transition leave
/// the state unchanged; once an Accept or Reject state is reached the
/// automaton is flagged and ignores all further input.
class RecognizerAutomaton
{
  public:
    RecognizerAutomaton() = default;
    RecognizerAutomaton(std::shared_ptr<const CompiledAutomaton> table, std::optional<Pid> self);

    Verdict verdict() const noexcept;
    std::optional<Verdict> flagged() const noexcept { return flagged_; }
    std::size_t current() const noexcept { return current_; }
    const std::string& current_name() const { return table_->states[current_]; }
    const CompiledAutomaton& table() const { return *table_; }
    const std::map<std::string, std::string>& bindings() const noexcept { return bindings_; }

    /// Consumes one event and returns the verdict afterwards.
    Verdict feed(const TraceEvent& e);

    void fingerprint(std::string& out) const;

    friend bool operator==(const RecognizerAutomaton& a, const RecognizerAutomaton& b)
    {
        return a.table_ == b.table_ && a.current_ == b.current_ && a.flagged_ == b.flagged_ &&
               a.bindings_ == b.bindings_ && a.self_ == b.self_;
    }

  private:
    bool matches(const EventPattern& p, const TraceEvent& e, std::map<std::string, std::string>& fresh) const;

    std::shared_ptr<const CompiledAutomaton> table_;
    std::optional<Pid> self_;
    std::size_t current_ = 0;
    std::optional<Verdict> flagged_;
    std::map<std::string, std::string> bindings_;
};

/// Validates and compiles an automaton description. Throws
/// OverlappingPatterns when two transitions leaving one state can match the
/// same event, and MalformedPattern for structurally impossible patterns.
/// An unreachable verdict is reported in the warnings list.
std::shared_ptr<const CompiledAutomaton> compile_monitor(const MonitorSpec& spec);

/// Convenience: a fresh automaton bound to the monitored process.
RecognizerAutomaton instantiate(const std::shared_ptr<const CompiledAutomaton>& table, Pid self);

/// Functional step: returns the successor automaton and its verdict.
std::pair<RecognizerAutomaton, Verdict> step(RecognizerAutomaton a, const TraceEvent& e);

} // namespace choreo
