#pragma once

#include "choreo/core/message.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace choreo
{

enum class Verdict : std::uint8_t
{
    Inconclusive,
    Accept,
    Reject,
};

const char* to_string(Verdict v) noexcept;
std::optional<Verdict> parse_verdict(std::string_view text) noexcept;

/// One field constraint of an event pattern.
///   _      anything
///   self   the pid of the monitored process
///   $x     variable, bound at first match and required equal afterwards
///   other  literal (a pid such as S3 for src/tgt, a signature name for sig)
struct PatternTerm
{
    enum class Kind : std::uint8_t
    {
        Any,
        Self,
        Var,
        Literal,
    };

    Kind kind = Kind::Any;
    std::string text;

    static PatternTerm parse(std::string_view token);
    std::string render() const;

    friend bool operator==(const PatternTerm&, const PatternTerm&) = default;
};

struct EventPattern
{
    std::optional<Action> act; // nullopt is the `*` wildcard
    PatternTerm src{PatternTerm::Kind::Self, {}};
    PatternTerm tgt;
    PatternTerm sig;

    std::string render() const;

    friend bool operator==(const EventPattern&, const EventPattern&) = default;
};

struct TransitionSpec
{
    std::string from;
    EventPattern pattern;
    std::string to;
};

/// Declarative automaton description; compiled by the analysis module.
struct MonitorSpec
{
    std::string name;
    Signature target;
    std::vector<std::string> states;
    std::string initial;
    std::set<std::string> accept;
    std::set<std::string> reject;
    std::vector<TransitionSpec> transitions;
};

using MonitorSpecPtr = std::shared_ptr<const MonitorSpec>;

/// Instrumentation map: which forked signatures receive a dedicated monitor.
using Phi = std::map<Signature, MonitorSpecPtr>;

} // namespace choreo
