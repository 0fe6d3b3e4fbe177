#pragma once

#include "choreo/core/pid.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace choreo
{

enum class Action : std::uint8_t
{
    Frk,
    Ext,
    Snd,
    Rcv,
};

const char* to_string(Action a) noexcept;
std::optional<Action> parse_action(std::string_view text) noexcept;

/// Fields per action:  frk: src tgt sig | ext: src | snd: src tgt | rcv: src.
/// seq is a per-source emission counter; the protocol never reads it.
struct TraceEvent
{
    Action act = Action::Ext;
    Pid src;
    std::optional<Pid> tgt;
    std::optional<Signature> sig;
    std::uint64_t seq = 0;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct DetachCommand
{
    Pid iss;
    Pid tgt;

    friend bool operator==(const DetachCommand&, const DetachCommand&) = default;
};

/// A trace event or detach command wrapped by the tracer that first routed it.
/// The embedded payload can never itself be a routed message.
struct RoutedMessage
{
    Pid rtr;
    std::variant<TraceEvent, DetachCommand> emb;

    bool embeds_event() const noexcept { return std::holds_alternative<TraceEvent>(emb); }
    const TraceEvent& event() const;
    const DetachCommand& command() const;

    friend bool operator==(const RoutedMessage&, const RoutedMessage&) = default;
};

enum class Qualifier : std::uint8_t
{
    Evt,
    Dtc,
    Rtd,
};

const char* to_string(Qualifier q) noexcept;

/// Tagged union of the three protocol message families. Accessors for the
/// wrong variant throw WrongVariant.
class Message
{
  public:
    Message(TraceEvent e) : value_(std::move(e)) {}
    Message(DetachCommand c) : value_(c) {}
    Message(RoutedMessage r) : value_(std::move(r)) {}

    Qualifier q() const noexcept { return static_cast<Qualifier>(value_.index()); }

    const TraceEvent& event() const;
    const DetachCommand& command() const;
    const RoutedMessage& routed() const;

    friend bool operator==(const Message&, const Message&) = default;

  private:
    std::variant<TraceEvent, DetachCommand, RoutedMessage> value_;
};

/// Builds a trace event, rejecting field combinations that do not match the
/// action's row (MalformedEvent).
TraceEvent mk_event(Action act, Pid src, std::optional<Pid> tgt, std::optional<Signature> sig, std::uint64_t seq);

/// ⟨rtd, router, m⟩; throws NestedRouting for an already-routed m.
RoutedMessage wrap_routed(const Message& m, Pid router);

/// Canonical line-oriented renderings, e.g.
///   evt(frk src=S3 tgt=S4 sig=worker seq=0)
///   dtc(iss=T2 tgt=S4)
///   rtd(rtr=T1 emb=evt(rcv src=S4 seq=0))
std::string render(const TraceEvent& e);
std::string render(const DetachCommand& c);
std::string render(const RoutedMessage& r);
std::string render(const Message& m);

/// Parses a canonical rendering back (ParseError on malformed text).
Message parse_message(std::string_view text);

} // namespace choreo
