#include "choreo/core/monitor_spec.hpp"

namespace choreo
{

const char* to_string(Verdict v) noexcept
{
    switch (v)
    {
    case Verdict::Inconclusive: return "Inconclusive";
    case Verdict::Accept: return "Accept";
    case Verdict::Reject: return "Reject";
    }
    return "?";
}

std::optional<Verdict> parse_verdict(std::string_view text) noexcept
{
    if (text == "Inconclusive")
        return Verdict::Inconclusive;
    if (text == "Accept")
        return Verdict::Accept;
    if (text == "Reject")
        return Verdict::Reject;
    return std::nullopt;
}

PatternTerm PatternTerm::parse(std::string_view token)
{
    if (token.empty() || token == "_")
        return {Kind::Any, {}};
    if (token == "self")
        return {Kind::Self, {}};
    if (token.front() == '$')
        return {Kind::Var, std::string(token.substr(1))};
    return {Kind::Literal, std::string(token)};
}

std::string PatternTerm::render() const
{
    switch (kind)
    {
    case Kind::Any: return "_";
    case Kind::Self: return "self";
    case Kind::Var: return "$" + text;
    case Kind::Literal: return text;
    }
    return "?";
}

std::string EventPattern::render() const
{
    std::string out = act ? to_string(*act) : "*";
    out += "(" + src.render() + "," + tgt.render() + "," + sig.render() + ")";
    return out;
}

} // namespace choreo
