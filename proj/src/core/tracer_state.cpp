#include "choreo/core/tracer_state.hpp"

#include "choreo/core/errors.hpp"

#include <algorithm>

namespace choreo
{

char mode_symbol(Mode m) noexcept
{
    return m == Mode::Direct ? 'o' : 'p';
}

std::optional<Mode> parse_mode(std::string_view text) noexcept
{
    if (text == "o")
        return Mode::Direct;
    if (text == "p")
        return Mode::Priority;
    return std::nullopt;
}

bool TracerState::has_priority_entries() const noexcept
{
    return std::any_of(traced.begin(), traced.end(), [](const auto& kv) { return kv.second == Mode::Priority; });
}

bool TracerState::maps_disjoint() const noexcept
{
    return std::none_of(routing.begin(), routing.end(), [&](const auto& kv) { return traced.count(kv.first) != 0; });
}

TracerSnapshot TracerSnapshot::of(const TracerState& s)
{
    TracerSnapshot out;
    out.mode = s.mode;
    out.routing.assign(s.routing.begin(), s.routing.end());
    out.traced.assign(s.traced.begin(), s.traced.end());
    return out;
}

std::string render(const TracerSnapshot& s)
{
    std::string out = "mode=";
    out += mode_symbol(s.mode);
    out += " pi={";
    for (std::size_t i = 0; i < s.routing.size(); ++i)
    {
        if (i)
            out += ',';
        out += to_string(s.routing[i].first) + ":" + to_string(s.routing[i].second);
    }
    out += "} gamma={";
    for (std::size_t i = 0; i < s.traced.size(); ++i)
    {
        if (i)
            out += ',';
        out += to_string(s.traced[i].first) + ":" + mode_symbol(s.traced[i].second);
    }
    out += "}";
    return out;
}

namespace
{

std::vector<std::pair<std::string_view, std::string_view>> split_map(std::string_view body, std::string_view whole)
{
    std::vector<std::pair<std::string_view, std::string_view>> out;
    while (!body.empty())
    {
        auto comma = body.find(',');
        auto item = body.substr(0, comma);
        auto colon = item.find(':');
        if (colon == std::string_view::npos)
            throw ParseError("bad map item in snapshot '" + std::string(whole) + "'");
        out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
        if (comma == std::string_view::npos)
            break;
        body.remove_prefix(comma + 1);
    }
    return out;
}

std::string_view braced(std::string_view text, std::string_view key, std::string_view whole)
{
    auto at = text.find(key);
    if (at == std::string_view::npos)
        throw ParseError("missing " + std::string(key) + " in snapshot '" + std::string(whole) + "'");
    auto open = at + key.size();
    auto close = text.find('}', open);
    if (close == std::string_view::npos)
        throw ParseError("unterminated map in snapshot '" + std::string(whole) + "'");
    return text.substr(open, close - open);
}

} // namespace

TracerSnapshot parse_snapshot(std::string_view text)
{
    TracerSnapshot s;
    if (!text.starts_with("mode="))
        throw ParseError("snapshot must start with mode= in '" + std::string(text) + "'");
    auto m = parse_mode(text.substr(5, 1));
    if (!m)
        throw ParseError("bad mode in snapshot '" + std::string(text) + "'");
    s.mode = *m;
    for (auto [k, v] : split_map(braced(text, "pi={", text), text))
    {
        auto kp = parse_pid(k);
        auto vp = parse_pid(v);
        if (!kp || !vp)
            throw ParseError("bad pid in snapshot '" + std::string(text) + "'");
        s.routing.emplace_back(*kp, *vp);
    }
    for (auto [k, v] : split_map(braced(text, "gamma={", text), text))
    {
        auto kp = parse_pid(k);
        auto mv = parse_mode(v);
        if (!kp || !mv)
            throw ParseError("bad gamma item in snapshot '" + std::string(text) + "'");
        s.traced.emplace_back(*kp, *mv);
    }
    return s;
}

} // namespace choreo
