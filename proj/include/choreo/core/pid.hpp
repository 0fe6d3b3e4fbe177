#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace choreo
{

/// Process identifier. The kind is encoded in the identifier itself so a
/// system pid can never be confused with a tracer or analyser pid.
struct Pid
{
    enum class Kind : std::uint8_t
    {
        System,
        Tracer,
        Analyzer,
    };

    Kind kind = Kind::System;
    std::uint32_t serial = 0;

    constexpr bool is_system() const noexcept { return kind == Kind::System; }
    constexpr bool is_tracer() const noexcept { return kind == Kind::Tracer; }
    constexpr bool is_analyzer() const noexcept { return kind == Kind::Analyzer; }

    friend constexpr bool operator==(const Pid&, const Pid&) = default;
    friend constexpr auto operator<=>(const Pid& a, const Pid& b) noexcept
    {
        if (auto c = a.serial <=> b.serial; c != 0)
            return c;
        return a.kind <=> b.kind;
    }
};

/// Renders as S3 / T4 / A5.
std::string to_string(const Pid& p);
char kind_prefix(Pid::Kind k) noexcept;

/// Inverse of to_string; nullopt on malformed input.
std::optional<Pid> parse_pid(std::string_view text);

/// Symbolic identifier of the code a forked process runs.
struct Signature
{
    std::string name;

    friend bool operator==(const Signature&, const Signature&) = default;
    friend auto operator<=>(const Signature&, const Signature&) = default;
};

} // namespace choreo

template <>
struct std::hash<choreo::Pid>
{
    std::size_t operator()(const choreo::Pid& p) const noexcept
    {
        return (static_cast<std::size_t>(p.serial) << 2) ^ static_cast<std::size_t>(p.kind);
    }
};

template <>
struct std::hash<choreo::Signature>
{
    std::size_t operator()(const choreo::Signature& s) const noexcept { return std::hash<std::string>{}(s.name); }
};
