#include "choreo/core/pid.hpp"

#include <charconv>

namespace choreo
{

char kind_prefix(Pid::Kind k) noexcept
{
    switch (k)
    {
    case Pid::Kind::System: return 'S';
    case Pid::Kind::Tracer: return 'T';
    case Pid::Kind::Analyzer: return 'A';
    }
    return '?';
}

std::string to_string(const Pid& p)
{
    return kind_prefix(p.kind) + std::to_string(p.serial);
}

std::optional<Pid> parse_pid(std::string_view text)
{
    if (text.size() < 2)
        return std::nullopt;
    Pid p;
    switch (text.front())
    {
    case 'S': p.kind = Pid::Kind::System; break;
    case 'T': p.kind = Pid::Kind::Tracer; break;
    case 'A': p.kind = Pid::Kind::Analyzer; break;
    default: return std::nullopt;
    }
    const char* first = text.data() + 1;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, p.serial);
    if (ec != std::errc{} || ptr != last)
        return std::nullopt;
    return p;
}

} // namespace choreo
