#include "choreo/runtime/log.hpp"

#include "choreo/core/errors.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace choreo
{

namespace
{

constexpr std::array<const char*, kEntryKindCount> kKindNames = {
    "spawn", "send",      "deliver", "drop",   "consume", "emit",   "bind",   "unbind", "flush",
    "resume", "exit",     "crash",   "terminate", "analyse", "branch", "pi+",  "pi-",    "gamma+",
    "gamma-", "gamma~",   "mode",    "state",  "monitor", "verdict", "fault", "note",
};

std::string sanitize(std::string_view t)
{
    std::string out(t);
    for (char& c : out)
        if (c == ' ')
            c = '_';
    return out;
}

std::optional<Pid> pid_or_dash(std::string_view text, std::string_view line)
{
    if (text == "-")
        return std::nullopt;
    auto p = parse_pid(text);
    if (!p)
        throw ParseError("bad pid '" + std::string(text) + "' in log line '" + std::string(line) + "'");
    return p;
}

} // namespace

const char* to_string(EntryKind k) noexcept
{
    return kKindNames[static_cast<std::size_t>(k)];
}

std::optional<EntryKind> parse_entry_kind(std::string_view text) noexcept
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (text == kKindNames[i])
            return static_cast<EntryKind>(i);
    return std::nullopt;
}

std::string render(const Entry& e)
{
    std::string out = std::to_string(e.step);
    out += ' ';
    out += e.actor ? to_string(*e.actor) : "-";
    out += ' ';
    out += to_string(e.kind);
    if (e.p)
        out += " p=" + to_string(*e.p);
    if (e.q)
        out += " q=" + to_string(*e.q);
    if (!e.t.empty())
        out += " t=" + sanitize(e.t);
    if (e.snap)
        out += " " + render(*e.snap);
    if (e.msg)
        out += " msg=" + render(*e.msg);
    return out;
}

Entry parse_entry(std::string_view line)
{
    Entry e;
    auto next_token = [](std::string_view& rest) {
        auto sp = rest.find(' ');
        auto tok = rest.substr(0, sp);
        rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
        return tok;
    };
    std::string_view rest = line;
    auto step_tok = next_token(rest);
    auto [ptr, ec] = std::from_chars(step_tok.data(), step_tok.data() + step_tok.size(), e.step);
    if (ec != std::errc{} || ptr != step_tok.data() + step_tok.size())
        throw ParseError("bad step in log line '" + std::string(line) + "'");
    e.actor = pid_or_dash(next_token(rest), line);
    auto kind_tok = next_token(rest);
    auto kind = parse_entry_kind(kind_tok);
    if (!kind)
        throw ParseError("bad entry kind '" + std::string(kind_tok) + "' in log line '" + std::string(line) + "'");
    e.kind = *kind;
    while (!rest.empty())
    {
        if (rest.starts_with("msg="))
        {
            e.msg = parse_mail(rest.substr(4));
            break;
        }
        if (rest.starts_with("mode="))
        {
            auto end = rest.find("gamma={");
            end = end == std::string_view::npos ? end : rest.find('}', end);
            if (end == std::string_view::npos)
                throw ParseError("bad snapshot in log line '" + std::string(line) + "'");
            e.snap = parse_snapshot(rest.substr(0, end + 1));
            rest = rest.substr(end + 1);
            if (rest.starts_with(" "))
                rest.remove_prefix(1);
            continue;
        }
        auto tok = next_token(rest);
        if (tok.starts_with("p="))
            e.p = pid_or_dash(tok.substr(2), line);
        else if (tok.starts_with("q="))
            e.q = pid_or_dash(tok.substr(2), line);
        else if (tok.starts_with("t="))
            e.t = std::string(tok.substr(2));
        else
            throw ParseError("unknown field '" + std::string(tok) + "' in log line '" + std::string(line) + "'");
    }
    return e;
}

std::optional<std::string> ExecutionLog::header_value(std::string_view key) const
{
    for (const auto& [k, v] : header)
        if (k == key)
            return v;
    return std::nullopt;
}

void ExecutionLog::write(std::ostream& out) const
{
    for (const auto& [k, v] : header)
        out << "# " << k << ' ' << v << '\n';
    for (const auto& e : entries_)
        out << render(e) << '\n';
}

std::string ExecutionLog::text() const
{
    std::ostringstream out;
    write(out);
    return out.str();
}

ExecutionLog ExecutionLog::read(std::istream& in)
{
    ExecutionLog log;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        if (line.starts_with("# "))
        {
            auto body = std::string_view(line).substr(2);
            auto sp = body.find(' ');
            log.header.emplace_back(std::string(body.substr(0, sp)),
                                    sp == std::string_view::npos ? std::string{} : std::string(body.substr(sp + 1)));
            continue;
        }
        log.entries_.push_back(parse_entry(line));
    }
    return log;
}

} // namespace choreo
