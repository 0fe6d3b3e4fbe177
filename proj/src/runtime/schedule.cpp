#include "choreo/runtime/schedule.hpp"

#include "choreo/core/errors.hpp"

#include <charconv>

namespace choreo
{

std::string to_string(const Choice& c)
{
    switch (c.kind)
    {
    case Choice::Kind::Run: return to_string(c.a);
    case Choice::Kind::Deliver: return to_string(c.a) + ">" + to_string(c.b);
    case Choice::Kind::Trace: return "trace>" + to_string(c.a);
    }
    return "?";
}

std::optional<Choice> parse_choice(std::string_view text)
{
    auto gt = text.find('>');
    if (gt == std::string_view::npos)
    {
        auto p = parse_pid(text);
        if (!p)
            return std::nullopt;
        return Choice::run(*p);
    }
    auto rhs = parse_pid(text.substr(gt + 1));
    if (!rhs)
        return std::nullopt;
    auto lhs = text.substr(0, gt);
    if (lhs == "trace")
        return Choice::trace(*rhs);
    auto from = parse_pid(lhs);
    if (!from)
        return std::nullopt;
    return Choice::deliver(*from, *rhs);
}

std::string to_string(const Schedule& s)
{
    if (auto* seed = std::get_if<SeedSchedule>(&s))
        return "seed:" + std::to_string(seed->seed);
    const auto& steps = std::get<StepSchedule>(s).steps;
    std::string out = "steps:[";
    for (std::size_t i = 0; i < steps.size(); ++i)
    {
        if (i)
            out += ',';
        out += to_string(steps[i]);
    }
    out += "]";
    return out;
}

Schedule parse_schedule(std::string_view text)
{
    if (text.starts_with("seed:"))
    {
        auto num = text.substr(5);
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), seed);
        if (ec != std::errc{} || ptr != num.data() + num.size())
            throw ParseError("bad seed in schedule '" + std::string(text) + "'");
        return SeedSchedule{seed};
    }
    if (text.starts_with("steps:[") && text.ends_with("]"))
    {
        StepSchedule out;
        auto body = text.substr(7, text.size() - 8);
        while (!body.empty())
        {
            auto comma = body.find(',');
            auto item = body.substr(0, comma);
            auto c = parse_choice(item);
            if (!c)
                throw ParseError("bad step '" + std::string(item) + "' in schedule");
            out.steps.push_back(*c);
            if (comma == std::string_view::npos)
                break;
            body.remove_prefix(comma + 1);
        }
        return out;
    }
    throw ParseError("schedule must be seed:<n> or steps:[...], got '" + std::string(text) + "'");
}

} // namespace choreo
