#include "choreo/runtime/mail.hpp"

#include "choreo/core/errors.hpp"

#include <charconv>

namespace choreo
{

std::string render(const Mail& m)
{
    struct Visitor
    {
        std::string operator()(const Message& msg) const { return render(msg); }
        std::string operator()(const SystemMessage& s) const
        {
            return "sys(" + s.tag + " " + std::to_string(s.value) + ")";
        }
        std::string operator()(const Control&) const { return "ctl(stop)"; }
    };
    return std::visit(Visitor{}, m);
}

Mail parse_mail(std::string_view text)
{
    if (text == "ctl(stop)")
        return Control{};
    if (text.starts_with("sys(") && text.ends_with(")"))
    {
        auto body = text.substr(4, text.size() - 5);
        auto space = body.find(' ');
        if (space == std::string_view::npos || space == 0)
            throw ParseError("bad system message '" + std::string(text) + "'");
        SystemMessage s{std::string(body.substr(0, space)), 0};
        auto num = body.substr(space + 1);
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), s.value);
        if (ec != std::errc{} || ptr != num.data() + num.size())
            throw ParseError("bad system message value '" + std::string(text) + "'");
        return s;
    }
    return parse_message(text);
}

const char* to_string(Via v) noexcept
{
    switch (v)
    {
    case Via::Plain: return "plain";
    case Via::Route: return "route";
    case Via::Forwd: return "forwd";
    case Via::Dtc: return "dtc";
    case Via::Analyse: return "analyse";
    case Via::Signal: return "signal";
    }
    return "?";
}

std::optional<Via> parse_via(std::string_view text) noexcept
{
    for (auto v : {Via::Plain, Via::Route, Via::Forwd, Via::Dtc, Via::Analyse, Via::Signal})
        if (text == to_string(v))
            return v;
    return std::nullopt;
}

} // namespace choreo
