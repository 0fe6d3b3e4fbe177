#include "choreo/tracing/bindings.hpp"

#include "choreo/core/errors.hpp"

namespace choreo
{

std::optional<Pid> TraceBindings::tracer_of(Pid ps) const
{
    auto it = table_.find(ps);
    if (it == table_.end())
        return std::nullopt;
    return it->second;
}

void TraceBindings::trace(Pid ps, Pid pt)
{
    auto [it, inserted] = table_.emplace(ps, pt);
    if (!inserted)
        throw AlreadyTraced(to_string(ps) + " is traced by " + to_string(it->second));
}

std::vector<TraceEvent> TraceBindings::clear(Pid ps, Pid pt, bool flush)
{
    auto it = table_.find(ps);
    if (it == table_.end())
        throw NotTraced(to_string(ps) + " is not traced");
    if (it->second != pt)
        throw NotTraced(to_string(ps) + " is traced by " + to_string(it->second) + ", not " + to_string(pt));
    table_.erase(it);

    std::vector<TraceEvent> flushed;
    if (!flush)
        return flushed;
    auto sit = streams_.find(pt);
    if (sit == streams_.end())
        return flushed;
    auto& stream = sit->second;
    std::deque<TraceEvent> kept;
    for (auto& e : stream)
    {
        if (e.src == ps)
            flushed.push_back(std::move(e));
        else
            kept.push_back(std::move(e));
    }
    if (kept.empty())
        streams_.erase(sit);
    else
        stream = std::move(kept);
    return flushed;
}

Pid TraceBindings::preempt(Pid ps, Pid pt, std::vector<TraceEvent>& flushed, bool flush)
{
    auto old = tracer_of(ps);
    if (!old)
        throw NotTraced(to_string(ps) + " is not traced");
    flushed = clear(ps, *old, flush);
    trace(ps, pt);
    return *old;
}

void TraceBindings::inherit(Pid parent, Pid child)
{
    if (auto t = tracer_of(parent))
        table_[child] = *t;
}

TraceEvent TraceBindings::next_event(Pid ps, Action act, std::optional<Pid> tgt, std::optional<Signature> sig)
{
    auto& seq = seq_[ps];
    return mk_event(act, ps, tgt, std::move(sig), seq++);
}

std::optional<std::pair<Pid, TraceEvent>> TraceBindings::emit(Pid ps, Action act, std::optional<Pid> tgt,
                                                              std::optional<Signature> sig)
{
    auto t = tracer_of(ps);
    if (!t)
        return std::nullopt;
    auto e = next_event(ps, act, tgt, std::move(sig));
    streams_[*t].push_back(e);
    return std::make_pair(*t, std::move(e));
}

bool TraceBindings::has_pending(Pid pt) const
{
    return streams_.count(pt) != 0;
}

TraceEvent TraceBindings::pop(Pid pt)
{
    auto it = streams_.find(pt);
    if (it == streams_.end())
        throw InvalidChoice("no pending trace events for " + to_string(pt));
    TraceEvent e = std::move(it->second.front());
    it->second.pop_front();
    if (it->second.empty())
        streams_.erase(it);
    return e;
}

std::uint64_t TraceBindings::emitted(Pid ps) const
{
    auto it = seq_.find(ps);
    return it == seq_.end() ? 0 : it->second;
}

void TraceBindings::fingerprint(std::string& out) const
{
    out += "B";
    for (const auto& [s, t] : table_)
        out += to_string(s) + ">" + to_string(t) + ",";
    out += "Q";
    for (const auto& [s, n] : seq_)
        out += to_string(s) + "#" + std::to_string(n) + ",";
    out += "E";
    for (const auto& [t, stream] : streams_)
    {
        out += to_string(t) + "[";
        for (const auto& e : stream)
            out += render(e) + ";";
        out += "]";
    }
}

} // namespace choreo
