#include "choreo/invariants/checker.hpp"

#include "choreo/core/errors.hpp"

#include <algorithm>

namespace choreo
{

const char* to_string(CheckStatus s) noexcept
{
    switch (s)
    {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::NotApplicable: return "N/A";
    }
    return "?";
}

const std::vector<std::string>& invariant_ids()
{
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (int i = 1; i <= 26; ++i)
            v.push_back((i < 10 ? "l0" : "l") + std::to_string(i));
        return v;
    }();
    return ids;
}

const std::vector<std::string>& report_ids()
{
    static const std::vector<std::string> ids = [] {
        auto v = invariant_ids();
        v.insert(v.end(), {"order", "gc", "verdicts"});
        return v;
    }();
    return ids;
}

bool InvariantReport::ok() const
{
    return std::none_of(results.begin(), results.end(),
                        [](const CheckResult& r) { return r.status == CheckStatus::Fail; });
}

const CheckResult& InvariantReport::get(std::string_view id) const
{
    for (const auto& r : results)
        if (r.id == id)
            return r;
    throw Error("no check named '" + std::string(id) + "'");
}

std::vector<std::string> InvariantReport::failing() const
{
    std::vector<std::string> out;
    for (const auto& r : results)
        if (r.status == CheckStatus::Fail)
            out.push_back(r.id);
    return out;
}

std::string InvariantReport::render() const
{
    std::string out;
    for (const auto& r : results)
    {
        out += r.id + " " + to_string(r.status);
        if (r.status == CheckStatus::Fail)
        {
            if (schedule)
                out += " sched=" + to_string(*schedule);
            if (r.at)
                out += " at=" + std::to_string(*r.at);
        }
        out += '\n';
    }
    return out;
}

// Checker -------------------------------------------------------------------

namespace
{

std::size_t index_of(std::string_view id)
{
    const auto& ids = report_ids();
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end())
        throw Error("no check named '" + std::string(id) + "'");
    return static_cast<std::size_t>(it - ids.begin());
}

std::size_t fault_invariant(std::string_view kind)
{
    if (kind == "MisdirectedDtc")
        return 17;
    if (kind == "OrphanRoutedEvent")
        return 21;
    if (kind == "DtcProtocolViolation")
        return 13;
    if (kind == "UnknownProcess")
        return 25;
    return 10; // UnknownQualifier and anything unexpected
}

const Message* message_of(const Entry& e)
{
    return e.msg ? as_message(*e.msg) : nullptr;
}

/// The process a routed or forwarded message is about.
std::optional<Pid> subject(const Message& m)
{
    switch (m.q())
    {
    case Qualifier::Evt: return m.event().src;
    case Qualifier::Dtc: return m.command().tgt;
    case Qualifier::Rtd:
    {
        const auto& r = m.routed();
        return r.embeds_event() ? r.event().src : r.command().tgt;
    }
    }
    return std::nullopt;
}

struct SentMessage
{
    Pid to;
    Via via;
    Mail mail;
};

} // namespace

InvariantChecker::InvariantChecker(CheckOptions opts) : opts_(std::move(opts))
{
    for (const auto& id : report_ids())
        results_.push_back(CheckResult{id, CheckStatus::Pass, std::nullopt, {}});
}

void InvariantChecker::record(const Entry& e)
{
    if (!buffer_.empty() && buffer_.front().step != e.step)
        close();
    buffer_.push_back(e);
}

void InvariantChecker::end_step()
{
    if (!buffer_.empty())
        close();
}

void InvariantChecker::fail(std::size_t index, std::uint64_t step, const std::string& why)
{
    failed_ = true;
    auto& r = results_[index];
    if (r.status == CheckStatus::Fail)
        return;
    r.status = CheckStatus::Fail;
    r.at = step;
    r.detail = why;
}

void InvariantChecker::fail(std::string_view id, std::uint64_t step, const std::string& why)
{
    fail(index_of(id), step, why);
}

void InvariantChecker::close()
{
    last_.swap(buffer_);
    buffer_.clear();
    const bool delivery = std::any_of(last_.begin(), last_.end(), [](const Entry& e) {
        return e.kind == EntryKind::Deliver || e.kind == EntryKind::Drop;
    });
    std::optional<Pid> actor;
    for (const auto& e : last_)
        if (e.actor && e.kind != EntryKind::Crash)
        {
            actor = e.actor;
            break;
        }
    if (!delivery && actor && actor->kind == Pid::Kind::Tracer && tracers_.count(*actor))
    {
        std::vector<Entry> own;
        std::vector<Entry> rest;
        for (const auto& e : last_)
            (e.actor == actor && e.kind != EntryKind::Crash ? own : rest).push_back(e);
        tracer_step(*actor, own);
        system_step(rest);
    }
    else
        system_step(last_);
}

void InvariantChecker::feed_oracle(const TraceEvent& e)
{
    if (!opts_.phi)
        return;
    if (e.act == Action::Frk)
    {
        if (auto it = opts_.phi->find(*e.sig); it != opts_.phi->end())
        {
            group_[*e.tgt] = *e.tgt;
            oracle_[*e.tgt] = Monitor{*e.sig, instantiate(it->second, *e.tgt)};
        }
        else if (auto g = group_.find(e.src); g != group_.end())
            group_[*e.tgt] = g->second;
    }
    if (auto g = group_.find(e.src); g != group_.end())
        oracle_.at(g->second).automaton.feed(e);
}

void InvariantChecker::system_step(const std::vector<Entry>& es)
{
    for (const auto& e : es)
    {
        switch (e.kind)
        {
        case EntryKind::Emit:
            if (auto* m = message_of(e); m && m->q() == Qualifier::Evt)
            {
                const auto& ev = m->event();
                emitted_[ev.src] = ev.seq + 1;
                feed_oracle(ev);
            }
            break;
        case EntryKind::Spawn:
            if (e.p && e.t.rfind("sys:", 0) == 0)
                sigs_[*e.p] = Signature{e.t.substr(4, e.t.find(':', 4) - 4)};
            if (e.p && e.t == "tracer:root")
            {
                Shadow s;
                s.root = true;
                tracers_[*e.p] = s;
            }
            break;
        case EntryKind::Monitor:
        case EntryKind::Verdict:
        {
            std::vector<Entry> one{e};
            for (const auto& [k, v] : collect_verdicts(one))
                if (e.kind == EntryKind::Verdict || !logged_.count(k))
                    logged_[k] = v;
            break;
        }
        case EntryKind::Terminate:
        case EntryKind::Crash:
            if (e.actor)
            {
                if (auto it = tracers_.find(*e.actor); it != tracers_.end())
                    it->second.alive = false;
                if (auto it = analysers_.find(*e.actor); it != analysers_.end())
                    it->second = false;
            }
            break;
        default: break;
        }
    }
}

void InvariantChecker::tracer_step(Pid t, const std::vector<Entry>& es)
{
    auto& S = tracers_[t];
    const bool init = !S.initialised;
    const std::uint64_t step = es.empty() ? 0 : es.front().step;

    std::optional<Message> consumed;
    for (const auto& e : es)
        if (e.kind == EntryKind::Consume && e.msg)
        {
            if (auto* m = as_message(*e.msg))
                consumed = *m;
            else
                fail(10, step, "tracer consumed " + render(*e.msg));
        }
    const Mode before = S.mode;
    if (consumed && consumed->q() == Qualifier::Rtd && !consumed->routed().embeds_event())
    {
        const auto& cmd = consumed->routed().command();
        if (cmd.iss == t && !S.pi.count(cmd.tgt))
            S.detaching.erase(cmd.tgt);
    }
    std::optional<Pid> spawn_router;
    if (consumed && consumed->q() == Qualifier::Rtd)
        spawn_router = consumed->routed().rtr;
    else
        spawn_router = t;

    std::vector<TraceEvent> analysed;
    std::vector<SentMessage> sends;
    std::vector<Pid> spawned;
    std::vector<std::pair<Pid, Pid>> pi_adds;
    std::vector<Pid> pi_dels;
    std::vector<Pid> gamma_adds;
    std::vector<Pid> gamma_dels;
    std::vector<Pid> gamma_marks;
    bool mode_changed = false;

    for (const auto& e : es)
    {
        switch (e.kind)
        {
        case EntryKind::Branch: branches_.insert(e.t); break;
        case EntryKind::PiAdd:
            if (S.pi.count(*e.p))
                fail(22, step, "route for " + to_string(*e.p) + " added twice");
            S.pi[*e.p] = *e.q;
            pi_adds.emplace_back(*e.p, *e.q);
            break;
        case EntryKind::PiDel:
            if (!S.pi.erase(*e.p))
                fail(23, step, "missing route for " + to_string(*e.p) + " removed");
            pi_dels.push_back(*e.p);
            break;
        case EntryKind::GammaAdd:
        {
            if (S.gamma.count(*e.p))
                fail(24, step, to_string(*e.p) + " added to Γ twice");
            auto mark = parse_mode(e.t).value_or(Mode::Direct);
            if (mark == Mode::Priority)
                ++S.priority_adds;
            S.gamma[*e.p] = mark;
            gamma_adds.push_back(*e.p);
            break;
        }
        case EntryKind::GammaDel:
            if (!S.gamma.erase(*e.p))
                fail(25, step, "absent " + to_string(*e.p) + " removed from Γ");
            gamma_dels.push_back(*e.p);
            break;
        case EntryKind::GammaMark:
            if (!S.gamma.count(*e.p))
                fail(25, step, "absent " + to_string(*e.p) + " re-marked in Γ");
            if (S.mode != Mode::Priority)
                fail(11, step, "dtc handled in direct mode");
            S.gamma[*e.p] = parse_mode(e.t).value_or(Mode::Direct);
            gamma_marks.push_back(*e.p);
            break;
        case EntryKind::ModeSwitch:
        {
            auto m = parse_mode(e.t).value_or(Mode::Direct);
            if (S.root && m == Mode::Priority)
                fail(0, step, "root tracer entered priority mode");
            if (!init && S.mode == Mode::Priority && m == Mode::Direct &&
                (!S.detaching.empty() || std::any_of(S.gamma.begin(), S.gamma.end(), [](const auto& g) {
                     return g.second == Mode::Priority;
                 })))
                fail(18, step, "switched to direct mode with undetached processes");
            if (!init)
                mode_changed = true;
            S.mode = m;
            break;
        }
        case EntryKind::Send:
        {
            auto via = parse_via(e.t).value_or(Via::Plain);
            sends.push_back(SentMessage{*e.p, via, *e.msg});
            const Message* m = message_of(e);
            if (via == Via::Dtc)
            {
                ++S.dtc_sent;
                if (m && m->q() == Qualifier::Dtc)
                    S.detaching.insert(m->command().tgt);
                if (S.root)
                    fail(0, step, "root tracer issued a dtc");
                else if (S.router && *e.p != *S.router)
                    fail(1, step, "dtc sent to " + to_string(*e.p) + " instead of router " + to_string(*S.router));
            }
            if (m && S.root)
            {
                if ((m->q() == Qualifier::Dtc && m->command().iss == t) ||
                    (m->q() == Qualifier::Rtd && !m->routed().embeds_event() && m->routed().command().iss == t))
                    fail(0, step, "root tracer issued a dtc");
            }
            if ((via == Via::Route || via == Via::Forwd) && m)
            {
                auto who = subject(*m);
                auto it = who ? S.pi.find(*who) : S.pi.end();
                if (it == S.pi.end() || it->second != *e.p)
                    fail(21, step, "sent " + render(*m) + " without a route to " + to_string(*e.p));
            }
            break;
        }
        case EntryKind::Spawn:
            if (e.t == "tracer")
            {
                Shadow child;
                child.router = spawn_router;
                tracers_[*e.p] = child;
                spawned.push_back(*e.p);
            }
            else if (e.t == "analyser")
            {
                ++S.analysers;
                analysers_[*e.p] = true;
            }
            break;
        case EntryKind::Analyse:
            if (auto* m = message_of(e); m && m->q() == Qualifier::Evt)
            {
                const auto& ev = m->event();
                analysed.push_back(ev);
                by_tracer_[t][ev.src].push_back(ev.act);
                auto& next = analysed_[ev.src];
                if (ev.seq != next)
                    fail("order", step,
                         to_string(ev.src) + " analysed seq " + std::to_string(ev.seq) + " expecting " +
                             std::to_string(next));
                next = ev.seq + 1;
            }
            break;
        case EntryKind::Terminate:
            if (!S.pi.empty() || !S.gamma.empty() || !S.detaching.empty())
                fail(2, step, "tracer terminated with non-empty maps or pending detaches");
            S.alive = false;
            break;
        case EntryKind::Fault:
            fail(fault_invariant(e.t), step, "fault " + e.t);
            break;
        case EntryKind::State:
        {
            snapshots_seen_ = true;
            TracerSnapshot shadow{S.mode, {S.pi.begin(), S.pi.end()}, {S.gamma.begin(), S.gamma.end()}};
            if (!e.snap || !(shadow == *e.snap))
                throw LogIncomplete("state snapshot of " + to_string(t) + " at step " + std::to_string(step) +
                                    " disagrees with the logged map operations");
            break;
        }
        case EntryKind::Monitor:
        case EntryKind::Verdict:
        {
            std::vector<Entry> one{e};
            for (const auto& [k, v] : collect_verdicts(one))
                if (e.kind == EntryKind::Verdict || !logged_.count(k))
                    logged_[k] = v;
            break;
        }
        default: break;
        }
    }

    auto has = [](const auto& v, const auto& x) { return std::find(v.begin(), v.end(), x) != v.end(); };
    auto count_via = [&](Via via) {
        return std::count_if(sends.begin(), sends.end(), [&](const SentMessage& s) { return s.via == via; });
    };
    auto forwarded = [&](const RoutedMessage& r) {
        return std::any_of(sends.begin(), sends.end(), [&](const SentMessage& s) {
            auto* m = as_message(s.mail);
            return s.via == Via::Forwd && m && m->q() == Qualifier::Rtd && m->routed() == r;
        });
    };
    auto routed = [&](const Message& inner) {
        return std::any_of(sends.begin(), sends.end(), [&](const SentMessage& s) {
            auto* m = as_message(s.mail);
            if (s.via != Via::Route || !m || m->q() != Qualifier::Rtd || m->routed().rtr != t)
                return false;
            const auto& r = m->routed();
            return r.embeds_event() ? inner.q() == Qualifier::Evt && r.event() == inner.event()
                                    : inner.q() == Qualifier::Dtc && r.command() == inner.command();
        });
    };

    if (!init && consumed)
    {
        if (before == Mode::Priority && consumed->q() != Qualifier::Rtd)
            fail(10, step, "priority mode consumed " + render(*consumed));
        switch (consumed->q())
        {
        case Qualifier::Evt:
        {
            const auto& ev = consumed->event();
            const bool a = has(analysed, ev);
            const bool r = routed(*consumed);
            if (before == Mode::Direct && (a == r || count_via(Via::Forwd) != 0))
                fail(14, step, "direct event neither analysed nor routed exactly once");
            if (r && ev.act == Action::Frk &&
                !std::any_of(pi_adds.begin(), pi_adds.end(), [&](const auto& p) { return p.first == *ev.tgt; }))
                fail(6, step, "routed frk without adding a route for " + to_string(*ev.tgt));
            break;
        }
        case Qualifier::Dtc:
        {
            const auto& c = consumed->command();
            if (!routed(*consumed))
                fail(17, step, "direct dtc for " + to_string(c.tgt) + " was not routed");
            else if (!has(pi_dels, c.tgt))
                fail(8, step, "routed dtc without removing the route for " + to_string(c.tgt));
            break;
        }
        case Qualifier::Rtd:
        {
            const auto& r = consumed->routed();
            if (S.root)
                fail(0, step, "root tracer received a routed message");
            else if (S.router && r.rtr != *S.router)
                fail(1, step, "routed message from " + to_string(r.rtr) + " but router is " + to_string(*S.router));
            const bool f = forwarded(r);
            if (r.embeds_event())
            {
                const auto& ev = r.event();
                const bool a = has(analysed, ev);
                if (before == Mode::Priority && (a == f || count_via(Via::Route) != 0))
                    fail(12, step, "priority mode neither analysed nor forwarded a routed event");
                if (before == Mode::Direct && (!f || a))
                    fail(15, step, "direct mode did not just forward a routed event");
                if (f && ev.act == Action::Frk &&
                    !std::any_of(pi_adds.begin(), pi_adds.end(), [&](const auto& p) { return p.first == *ev.tgt; }))
                    fail(7, step, "forwarded frk without adding a route for " + to_string(*ev.tgt));
            }
            else
            {
                const auto& c = r.command();
                const bool handled =
                    !gamma_marks.empty() || (c.iss == t && count_via(Via::Signal) == static_cast<long>(sends.size()));
                if (before == Mode::Priority && (handled == f || count_via(Via::Route) != 0))
                    fail(13, step, "priority mode neither handled nor forwarded a routed dtc");
                if (before == Mode::Direct && (!f || !gamma_marks.empty() || mode_changed))
                    fail(16, step, "direct mode did not just forward a routed dtc");
                if (f && !has(pi_dels, c.tgt))
                    fail(9, step, "forwarded dtc without removing the route for " + to_string(c.tgt));
            }
            break;
        }
        }
    }

    for (const auto& ev : analysed)
    {
        if (ev.act == Action::Frk)
        {
            if (!spawned.empty())
            {
                if (!has(pi_adds, std::make_pair(*ev.tgt, spawned.front())))
                    fail(5, step, "instrumented " + to_string(*ev.tgt) + " without a route to its tracer");
            }
            else if (!has(gamma_adds, *ev.tgt))
                fail(3, step, "analysed frk without adding " + to_string(*ev.tgt) + " to Γ");
        }
        else if (ev.act == Action::Ext && !has(gamma_dels, ev.src))
            fail(4, step, "analysed ext without removing " + to_string(ev.src) + " from Γ");
    }

    if (S.dtc_sent != S.priority_adds)
        fail(19, step,
             std::to_string(S.dtc_sent) + " dtc issued for " + std::to_string(S.priority_adds) + " detached additions");

    if (init)
    {
        S.initialised = true;
        if (!S.root && opts_.variant == AnalysisVariant::EA && S.analysers != 1)
            fail(20, step, "tracer without exactly one analyser");
        if (opts_.variant == AnalysisVariant::IA && S.analysers != 0)
            fail(20, step, "analyser spawned under internalised analysis");
    }
}

InvariantReport InvariantChecker::finish(bool quiescent) const
{
    InvariantReport rep;
    rep.results = results_;
    auto set = [&](std::string_view id, CheckStatus st) {
        auto& r = rep.results[index_of(id)];
        if (r.status != CheckStatus::Fail)
            r.status = st;
    };
    auto fail_end = [&](std::string_view id, const std::string& why) {
        auto& r = rep.results[index_of(id)];
        if (r.status == CheckStatus::Fail)
            return;
        r.status = CheckStatus::Fail;
        r.detail = why;
    };
    if (!monitored())
    {
        for (auto& r : rep.results)
            r.status = CheckStatus::NotApplicable;
        return rep;
    }
    if (opts_.require_snapshots && !snapshots_seen_)
        throw LogIncomplete("monitored log carries no tracer state snapshots");

    std::optional<AnalysisVariant> variant = opts_.variant;
    if (!variant && !analysers_.empty())
        variant = AnalysisVariant::EA;
    bool any_instrumented = false;
    for (const auto& [pid, s] : tracers_)
    {
        if (s.root || !s.initialised)
            continue;
        any_instrumented = true;
        if (variant == AnalysisVariant::EA && s.analysers != 1)
            fail_end("l21", to_string(pid) + " has " + std::to_string(s.analysers) + " analysers");
    }
    if (!any_instrumented || variant != AnalysisVariant::EA)
        set("l21", CheckStatus::NotApplicable);

    if (!quiescent)
    {
        set("gc", CheckStatus::NotApplicable);
        set("verdicts", CheckStatus::NotApplicable);
        return rep;
    }
    for (const auto& [p, n] : emitted_)
    {
        auto it = analysed_.find(p);
        const std::uint64_t got = it == analysed_.end() ? 0 : it->second;
        if (got != n)
        {
            fail_end("order", to_string(p) + " has " + std::to_string(n - std::min(n, got)) + " unanalysed events");
            break;
        }
    }
    for (const auto& [p, s] : tracers_)
        if (s.alive)
        {
            fail_end("gc", "tracer " + to_string(p) + " still alive");
            break;
        }
    for (const auto& [p, alive] : analysers_)
        if (alive)
        {
            fail_end("gc", "analyser " + to_string(p) + " still alive");
            break;
        }
    if (!opts_.phi)
        set("verdicts", CheckStatus::NotApplicable);
    else
    {
        VerdictMap expected;
        for (const auto& [p, m] : oracle_)
            expected[MonitorKey{p, m.sig}] = m.automaton.verdict();
        if (expected != logged_)
        {
            std::string why;
            for (const auto& [k, v] : expected)
            {
                auto it = logged_.find(k);
                if (it == logged_.end() || it->second != v)
                {
                    why = to_string(k) + " expected " + to_string(v) + " got " +
                          (it == logged_.end() ? std::string("nothing") : to_string(it->second));
                    break;
                }
            }
            fail_end("verdicts", why.empty() ? "unexpected monitors in log" : why);
        }
    }
    return rep;
}

std::string InvariantChecker::analysis_summary() const
{
    std::string out;
    for (const auto& [t, procs] : by_tracer_)
    {
        if (!out.empty())
            out += " ";
        out += to_string(t) + "{";
        bool first = true;
        for (const auto& [p, acts] : procs)
        {
            auto it = sigs_.find(p);
            out += (first ? "" : " ") + (it != sigs_.end() ? it->second.name : to_string(p)) + ":";
            for (std::size_t i = 0; i < acts.size(); ++i)
                out += (i ? "," : "") + std::string(to_string(acts[i]));
            first = false;
        }
        out += "}";
    }
    return out;
}

void InvariantChecker::fingerprint(std::string& out) const
{
    out += "K";
    for (const auto& [t, procs] : by_tracer_)
        for (const auto& [p, acts] : procs)
            out += "a" + to_string(t) + to_string(p) + ":" + std::to_string(acts.size());
    for (const auto& [p, s] : tracers_)
    {
        out += to_string(p);
        out += s.root ? 'r' : 'n';
        out += s.initialised ? 'i' : '-';
        out += s.alive ? 'a' : 'd';
        out += mode_symbol(s.mode);
        for (const auto& [k, v] : s.pi)
            out += to_string(k) + ">" + to_string(v) + ",";
        for (const auto& [k, v] : s.gamma)
            out += to_string(k) + mode_symbol(v) + ",";
        for (const auto& k : s.detaching)
            out += "D" + to_string(k);
        if (s.router)
            out += "R" + to_string(*s.router);
        out += "#" + std::to_string(s.dtc_sent) + "/" + std::to_string(s.priority_adds) + "/" +
               std::to_string(s.analysers) + ";";
    }
    for (const auto& [p, alive] : analysers_)
        out += to_string(p) + (alive ? "a" : "d");
    for (const auto& [p, n] : emitted_)
        out += "E" + to_string(p) + ":" + std::to_string(n);
    for (const auto& [p, n] : analysed_)
        out += "Z" + to_string(p) + ":" + std::to_string(n);
    for (const auto& [p, g] : group_)
        out += "g" + to_string(p) + to_string(g);
    for (const auto& [p, m] : oracle_)
    {
        out += "o" + to_string(p);
        m.automaton.fingerprint(out);
    }
    for (const auto& [k, v] : logged_)
        out += "v" + to_string(k) + to_string(v);
}

InvariantReport check_invariants(const ExecutionLog& log, CheckOptions opts)
{
    if (!opts.variant)
    {
        auto mode = log.header_value("mode");
        if (mode == "ea")
            opts.variant = AnalysisVariant::EA;
        else if (mode == "ia")
            opts.variant = AnalysisVariant::IA;
    }
    InvariantChecker ck(std::move(opts));
    for (const auto& e : log.entries())
        ck.record(e);
    ck.end_step();
    auto rep = ck.finish(true);
    if (auto s = log.header_value("schedule"))
        rep.schedule = parse_schedule(*s);
    return rep;
}

// Order oracle --------------------------------------------------------------

OrderReport order_oracle(const ExecutionLog& log)
{
    OrderReport rep;
    for (const auto& e : log.entries())
    {
        auto* m = message_of(e);
        if (!m || m->q() != Qualifier::Evt)
            continue;
        if (e.kind == EntryKind::Emit)
            rep.emitted[m->event().src].push_back(m->event());
        else if (e.kind == EntryKind::Analyse)
            rep.analysed[m->event().src].push_back(m->event());
    }
    for (const auto& [p, em] : rep.emitted)
    {
        static const std::vector<TraceEvent> none;
        auto it = rep.analysed.find(p);
        const auto& an = it == rep.analysed.end() ? none : it->second;
        const std::size_t n = std::max(em.size(), an.size());
        for (std::size_t i = 0; i < n; ++i)
        {
            std::optional<TraceEvent> want = i < em.size() ? std::optional(em[i]) : std::nullopt;
            std::optional<TraceEvent> got = i < an.size() ? std::optional(an[i]) : std::nullopt;
            if (want != got)
            {
                rep.divergences.push_back(OrderDivergence{p, i, want, got});
                break;
            }
        }
    }
    for (const auto& [p, an] : rep.analysed)
        if (!rep.emitted.count(p) && !an.empty())
            rep.divergences.push_back(OrderDivergence{p, 0, std::nullopt, an.front()});
    return rep;
}

std::map<Pid, std::vector<TraceEvent>> analysed_by_tracer(const std::vector<Entry>& entries)
{
    std::map<Pid, std::vector<TraceEvent>> out;
    for (const auto& e : entries)
        if (e.kind == EntryKind::Analyse && e.actor)
            if (auto* m = message_of(e); m && m->q() == Qualifier::Evt)
                out[*e.actor].push_back(m->event());
    return out;
}

} // namespace choreo
