#pragma once

#include "choreo/core/pid.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace choreo
{

/// One scheduler decision: let a process take a step, deliver the head of a
/// point-to-point channel, or deliver the head of a tracer's event stream.
struct Choice
{
    enum class Kind : std::uint8_t
    {
        Run,
        Deliver,
        Trace,
    };

    Kind kind = Kind::Run;
    Pid a; // process (Run), sender (Deliver), tracer (Trace)
    Pid b; // receiver (Deliver)

    static Choice run(Pid p) { return {Kind::Run, p, {}}; }
    static Choice deliver(Pid from, Pid to) { return {Kind::Deliver, from, to}; }
    static Choice trace(Pid tracer) { return {Kind::Trace, tracer, {}}; }

    /// Receiving process of a delivery, or the acting process of a run.
    Pid target() const noexcept { return kind == Kind::Deliver ? b : a; }

    friend bool operator==(const Choice&, const Choice&) = default;
    friend auto operator<=>(const Choice&, const Choice&) = default;
};

/// `S1`, `S1>T2`, `trace>T2`
std::string to_string(const Choice& c);
std::optional<Choice> parse_choice(std::string_view text);

struct SeedSchedule
{
    std::uint64_t seed = 0;
    friend bool operator==(const SeedSchedule&, const SeedSchedule&) = default;
};

struct StepSchedule
{
    std::vector<Choice> steps;
    friend bool operator==(const StepSchedule&, const StepSchedule&) = default;
};

using Schedule = std::variant<SeedSchedule, StepSchedule>;

/// `seed:<u64>` or `steps:[S1,S1>T2,trace>T2]`
std::string to_string(const Schedule& s);
Schedule parse_schedule(std::string_view text);

} // namespace choreo

template <>
struct std::hash<choreo::Choice>
{
    std::size_t operator()(const choreo::Choice& c) const noexcept
    {
        std::hash<choreo::Pid> h;
        return h(c.a) * 31 + h(c.b) * 7 + static_cast<std::size_t>(c.kind);
    }
};
