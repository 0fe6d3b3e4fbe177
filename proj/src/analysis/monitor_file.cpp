#include "choreo/analysis/monitor_file.hpp"

#include "choreo/core/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace choreo
{

MonitorSpec order_monitor(std::string name, Signature target, const std::vector<Action>& chain)
{
    MonitorSpec m;
    m.name = std::move(name);
    m.target = std::move(target);
    m.initial = "q0";
    for (std::size_t i = 0; i <= chain.size(); ++i)
        m.states.push_back("q" + std::to_string(i));
    m.accept.insert("q" + std::to_string(chain.size()));
    if (chain.empty())
        return m;

    std::set<Action> alphabet(chain.begin(), chain.end());
    m.states.push_back("sink");
    m.reject.insert("sink");
    for (std::size_t i = 0; i < chain.size(); ++i)
    {
        const std::string from = "q" + std::to_string(i);
        for (Action a : alphabet)
        {
            EventPattern p;
            p.act = a;
            m.transitions.push_back({from, p, a == chain[i] ? "q" + std::to_string(i + 1) : "sink"});
        }
    }
    return m;
}

namespace
{

std::vector<std::string> words(std::string_view line)
{
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    std::string w;
    while (in >> w)
        out.push_back(w);
    return out;
}

[[noreturn]] void fail(std::size_t lineno, const std::string& why)
{
    throw ParseError("monitor file line " + std::to_string(lineno) + ": " + why);
}

EventPattern parse_pattern(std::string_view text, std::size_t lineno)
{
    EventPattern p;
    auto open = text.find('(');
    auto act_text = text.substr(0, open);
    if (act_text != "*")
    {
        auto a = parse_action(act_text);
        if (!a)
            fail(lineno, "unknown action '" + std::string(act_text) + "'");
        p.act = a;
    }
    if (open == std::string_view::npos)
        return p;
    if (!text.ends_with(")"))
        fail(lineno, "unterminated pattern '" + std::string(text) + "'");
    auto args = text.substr(open + 1, text.size() - open - 2);
    std::vector<std::string_view> parts;
    while (true)
    {
        auto comma = args.find(',');
        parts.push_back(args.substr(0, comma));
        if (comma == std::string_view::npos)
            break;
        args.remove_prefix(comma + 1);
    }
    if (parts.size() > 3)
        fail(lineno, "a pattern takes at most three arguments");
    if (parts.size() > 0 && !parts[0].empty())
        p.src = PatternTerm::parse(parts[0]);
    if (parts.size() > 1)
        p.tgt = PatternTerm::parse(parts[1]);
    if (parts.size() > 2)
        p.sig = PatternTerm::parse(parts[2]);
    return p;
}

} // namespace

std::vector<MonitorSpec> parse_monitor_file(std::string_view text)
{
    std::vector<MonitorSpec> out;
    std::optional<MonitorSpec> cur;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw))
    {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        auto w = words(raw);
        if (w.empty())
            continue;
        if (w[0] == "monitor")
        {
            if (cur)
                fail(lineno, "nested monitor block");
            if (w.size() != 4 || w[2] != "for")
                fail(lineno, "expected 'monitor <name> for <signature>'");
            cur = MonitorSpec{};
            cur->name = w[1];
            cur->target = Signature{w[3]};
            continue;
        }
        if (!cur)
            fail(lineno, "statement outside a monitor block");
        if (w[0] == "end")
        {
            if (cur->initial.empty())
                fail(lineno, "monitor " + cur->name + " has no initial state");
            out.push_back(std::move(*cur));
            cur.reset();
        }
        else if (w[0] == "states")
            cur->states.insert(cur->states.end(), w.begin() + 1, w.end());
        else if (w[0] == "initial")
        {
            if (w.size() != 2)
                fail(lineno, "expected 'initial <state>'");
            cur->initial = w[1];
        }
        else if (w[0] == "accept")
            cur->accept.insert(w.begin() + 1, w.end());
        else if (w[0] == "reject")
            cur->reject.insert(w.begin() + 1, w.end());
        else if (w[0] == "order")
        {
            std::vector<Action> chain;
            for (std::size_t i = 1; i < w.size(); ++i)
            {
                auto a = parse_action(w[i]);
                if (!a)
                    fail(lineno, "unknown action '" + w[i] + "'");
                chain.push_back(*a);
            }
            auto built = order_monitor(cur->name, cur->target, chain);
            *cur = std::move(built);
        }
        else if (w.size() == 3 && w[1].starts_with("--") && w[1].ends_with("-->"))
        {
            auto pat = std::string_view(w[1]).substr(2, w[1].size() - 5);
            cur->transitions.push_back({w[0], parse_pattern(pat, lineno), w[2]});
        }
        else
            fail(lineno, "cannot parse '" + raw + "'");
    }
    if (cur)
        fail(lineno, "monitor " + cur->name + " is missing 'end'");
    return out;
}

std::vector<MonitorSpec> load_monitor_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open monitor file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_monitor_file(buf.str());
}

std::string render_monitor(const MonitorSpec& spec)
{
    std::string out = "monitor " + spec.name + " for " + spec.target.name + "\n";
    if (!spec.states.empty())
    {
        out += "  states";
        for (const auto& s : spec.states)
            out += " " + s;
        out += "\n";
    }
    out += "  initial " + spec.initial + "\n";
    if (!spec.accept.empty())
    {
        out += "  accept";
        for (const auto& s : spec.accept)
            out += " " + s;
        out += "\n";
    }
    if (!spec.reject.empty())
    {
        out += "  reject";
        for (const auto& s : spec.reject)
            out += " " + s;
        out += "\n";
    }
    for (const auto& t : spec.transitions)
        out += "  " + t.from + " --" + t.pattern.render() + "--> " + t.to + "\n";
    out += "end\n";
    return out;
}

} // namespace choreo
