#include "choreo/analysis/monitoring.hpp"

#include "choreo/core/errors.hpp"

namespace choreo
{

std::string to_string(const MonitorKey& k)
{
    return to_string(k.pid) + "/" + k.sig.name;
}

CompiledPhi compile_phi(const Phi& phi)
{
    CompiledPhi out;
    for (const auto& [sig, spec] : phi)
        out.emplace(sig, compile_monitor(*spec));
    return out;
}

Entry monitor_entry(const MonitorKey& k)
{
    Entry e;
    e.kind = EntryKind::Monitor;
    e.p = k.pid;
    e.t = k.sig.name;
    return e;
}

Entry verdict_entry(const MonitorKey& k, Verdict v)
{
    Entry e;
    e.kind = EntryKind::Verdict;
    e.p = k.pid;
    e.t = k.sig.name + "/" + to_string(v);
    return e;
}

namespace
{

void fold(VerdictMap& out, const Entry& e)
{
    if (!e.p)
        return;
    if (e.kind == EntryKind::Monitor)
        out.emplace(MonitorKey{*e.p, Signature{e.t}}, Verdict::Inconclusive);
    else if (e.kind == EntryKind::Verdict)
    {
        auto slash = e.t.rfind('/');
        if (slash == std::string::npos)
            throw ParseError("bad verdict entry '" + render(e) + "'");
        auto v = parse_verdict(std::string_view(e.t).substr(slash + 1));
        if (!v)
            throw ParseError("bad verdict entry '" + render(e) + "'");
        out[MonitorKey{*e.p, Signature{e.t.substr(0, slash)}}] = *v;
    }
}

} // namespace

VerdictProfile verdict_profile(const VerdictMap& v)
{
    VerdictProfile out;
    for (const auto& [k, verdict] : v)
        ++out[k.sig][verdict];
    return out;
}

VerdictMap collect_verdicts(const std::vector<Entry>& entries)
{
    VerdictMap out;
    for (const auto& e : entries)
        fold(out, e);
    return out;
}

void VerdictCollector::record(const Entry& e)
{
    fold(verdicts_, e);
}

AnalyserBehavior::AnalyserBehavior(MonitorKey key, RecognizerAutomaton automaton)
    : key_(std::move(key)), automaton_(std::move(automaton))
{
}

void AnalyserBehavior::analyse(ProcessContext& ctx, const Mail& m)
{
    auto* msg = as_message(m);
    if (!msg || msg->q() != Qualifier::Evt)
        return;
    const bool was_flagged = automaton_.flagged().has_value();
    Verdict v = automaton_.feed(msg->event());
    if (!was_flagged && v != Verdict::Inconclusive)
        ctx.log(verdict_entry(key_, v));
}

void AnalyserBehavior::step(ProcessContext& ctx)
{
    Mail m = ctx.receive_any();
    if (!std::holds_alternative<Control>(m))
    {
        analyse(ctx, m);
        return;
    }
    while (!ctx.mailbox().empty())
        analyse(ctx, ctx.receive_any());
    ctx.log(verdict_entry(key_, automaton_.verdict()));
    ctx.terminate();
}

void AnalyserBehavior::fingerprint(std::string& out) const
{
    out += "An";
    automaton_.fingerprint(out);
}

InlineMonitorHook::InlineMonitorHook(std::shared_ptr<const CompiledPhi> phi) : phi_(std::move(phi)) {}

void InlineMonitorHook::on_event(const TraceEvent& e, ProcessContext& ctx)
{
    if (e.act == Action::Frk)
    {
        Pid child = *e.tgt;
        if (auto it = phi_->find(*e.sig); it != phi_->end())
        {
            group_[child] = child;
            monitors_.emplace(child, std::make_pair(*e.sig, instantiate(it->second, child)));
            ctx.log(monitor_entry(MonitorKey{child, *e.sig}));
        }
        else if (auto g = group_.find(e.src); g != group_.end())
            group_[child] = g->second;
    }
    auto g = group_.find(e.src);
    if (g == group_.end())
        return;
    auto& [sig, automaton] = monitors_.at(g->second);
    const bool was_flagged = automaton.flagged().has_value();
    Verdict v = automaton.feed(e);
    if (!was_flagged && v != Verdict::Inconclusive)
        ctx.log(verdict_entry(MonitorKey{g->second, sig}, v));
}

void InlineMonitorHook::fingerprint(std::string& out) const
{
    out += "H";
    for (const auto& [p, g] : group_)
        out += to_string(p) + ">" + to_string(g) + ",";
    for (const auto& [p, m] : monitors_)
    {
        out += to_string(p);
        m.second.fingerprint(out);
    }
}

VerdictMap InlineMonitorHook::verdicts() const
{
    VerdictMap out;
    for (const auto& [p, m] : monitors_)
        out.emplace(MonitorKey{p, m.first}, m.second.verdict());
    return out;
}

} // namespace choreo
