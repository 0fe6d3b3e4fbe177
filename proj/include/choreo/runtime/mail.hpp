#pragma once

#include "choreo/core/message.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace choreo
{

/// Application payload exchanged between system processes.
struct SystemMessage
{
    std::string tag;
    std::int64_t value = 0;

    friend bool operator==(const SystemMessage&, const SystemMessage&) = default;
};

/// Out-of-band signal from a tracer to its analyser.
struct Control
{
    enum class Kind : std::uint8_t
    {
        Stop,
    };
    Kind kind = Kind::Stop;

    friend bool operator==(const Control&, const Control&) = default;
};

/// Anything that can sit in a mailbox.
using Mail = std::variant<Message, SystemMessage, Control>;

inline const Message* as_message(const Mail& m) noexcept
{
    return std::get_if<Message>(&m);
}

inline bool is_routed(const Mail& m) noexcept
{
    auto* msg = as_message(m);
    return msg && msg->q() == Qualifier::Rtd;
}

/// sys(tag value) / ctl(stop) / the protocol renderings.
std::string render(const Mail& m);
Mail parse_mail(std::string_view text);

/// Label attached to every send so logs distinguish protocol operations.
enum class Via : std::uint8_t
{
    Plain,
    Route,
    Forwd,
    Dtc,
    Analyse,
    Signal,
};

const char* to_string(Via v) noexcept;
std::optional<Via> parse_via(std::string_view text) noexcept;

} // namespace choreo
