#include "choreo/choreography/tracer.hpp"

#include "choreo/core/errors.hpp"

#include <algorithm>

namespace choreo
{

const char* to_string(AnalysisVariant v) noexcept
{
    return v == AnalysisVariant::EA ? "ea" : "ia";
}

const std::vector<std::string>& tracer_branch_ids()
{
    static const std::vector<std::string> ids = {
        "instrument.o.new", "instrument.o.share", "instrument.p.new", "instrument.p.share",
        "fork.o.route",     "fork.o.analyse",     "exit.o.route",     "exit.o.analyse",
        "comm.o.route",     "comm.o.analyse",     "routedtc.route",   "forwd.o.dtc",
        "forwd.o.evt",      "forwd.o.evt.frk",    "fork.p.forward",   "fork.p.analyse",
        "exit.p.forward",   "exit.p.analyse",     "comm.p.forward",   "comm.p.analyse",
        "dtc.p.forward",    "dtc.p.own",          "dtc.p.switch",     "gc.collect",
        "gc.keep",
    };
    return ids;
}

struct TracerBehavior::Step
{
    ProcessContext& ctx;
    bool collect = false;
};

TracerBehavior::TracerBehavior(std::shared_ptr<const TracerConfig> cfg, bool root, Pid process, Pid router,
                               std::optional<MonitorKey> key)
    : cfg_(std::move(cfg)), root_(root), process_(process), router_(router), key_(std::move(key))
{
}

std::unique_ptr<TracerBehavior> TracerBehavior::root(std::shared_ptr<const TracerConfig> cfg, Pid top_level)
{
    return std::unique_ptr<TracerBehavior>(new TracerBehavior(std::move(cfg), true, top_level, Pid{}, std::nullopt));
}

std::unique_ptr<TracerBehavior> TracerBehavior::instrumented(std::shared_ptr<const TracerConfig> cfg, MonitorKey key,
                                                             Pid router)
{
    Pid ps = key.pid;
    return std::unique_ptr<TracerBehavior>(new TracerBehavior(std::move(cfg), false, ps, router, std::move(key)));
}

bool TracerBehavior::ready(const Mailbox& mailbox) const
{
    if (!initialised_)
        return true;
    if (sigma_.mode == Mode::Direct || mutated(Mutation::NoPriorityMode))
        return !mailbox.empty();
    return std::any_of(mailbox.begin(), mailbox.end(), [](const Mail& m) { return is_routed(m); });
}

void TracerBehavior::step(ProcessContext& ctx)
{
    Step s{ctx};
    if (!initialised_)
    {
        sigma_.self_pid = ctx.self();
        if (root_)
            init_root(s);
        else
            init_instrumented(s);
        initialised_ = true;
    }
    else
    {
        std::optional<Mail> m;
        const char note[2] = {mode_symbol(sigma_.mode), '\0'};
        if (sigma_.mode == Mode::Direct || mutated(Mutation::NoPriorityMode))
            m = ctx.receive_any(note);
        else
            m = ctx.receive_matching([](const Mail& x) { return is_routed(x); }, note);
        try
        {
            const Message* msg = as_message(*m);
            if (!msg)
                throw ProtocolError(ProtocolError::Kind::UnknownQualifier, "non-protocol mail " + render(*m));
            if (sigma_.mode == Mode::Priority && msg->q() == Qualifier::Rtd)
            {
                const auto& r = msg->routed();
                if (r.embeds_event())
                    handle_event_priority(s, r);
                else
                    handle_dtc(s, r);
            }
            else
            {
                switch (msg->q())
                {
                case Qualifier::Evt: handle_event_direct(s, msg->event()); break;
                case Qualifier::Dtc: route_dtc(s, msg->command()); break;
                case Qualifier::Rtd: forwd_rtd(s, msg->routed()); break;
                }
            }
        }
        catch (const ProtocolError& err)
        {
            Entry f;
            f.kind = EntryKind::Fault;
            f.t = ProtocolError::name(err.kind());
            f.msg = *m;
            ctx.log(std::move(f));
        }
    }
    if (cfg_->snapshots && ctx.logging(EntryKind::State))
    {
        Entry st;
        st.kind = EntryKind::State;
        st.snap = TracerSnapshot::of(sigma_);
        ctx.log(std::move(st));
    }
    if (s.collect)
    {
        if (automaton_ && key_)
            ctx.log(verdict_entry(*key_, automaton_->verdict()));
        ctx.terminate();
    }
}

void TracerBehavior::init_root(Step& s)
{
    // ROOT: trace before the top-level process can act, so nothing is lost.
    s.ctx.trace(process_, sigma_.self_pid);
    s.ctx.resume(process_);
    sigma_.instrumentation = cfg_->phi;
    gamma_add(s, process_, Mode::Direct);
    set_mode(s, Mode::Direct);
}

void TracerBehavior::init_instrumented(Step& s)
{
    sigma_.instrumentation = cfg_->phi;
    gamma_add(s, process_, Mode::Priority);
    if (!mutated(Mutation::NoDetach))
        detach(s, process_, router_);
    const auto& table = cfg_->compiled.at(key_->sig);
    if (cfg_->variant == AnalysisVariant::EA)
    {
        auto analyser = std::make_unique<AnalyserBehavior>(*key_, instantiate(table, process_));
        sigma_.analyzer = s.ctx.spawn(std::move(analyser), Pid::Kind::Analyzer, "analyser");
    }
    else
        automaton_ = instantiate(table, process_);
    s.ctx.log(monitor_entry(*key_));
    set_mode(s, mutated(Mutation::NoPriorityMode) ? Mode::Direct : Mode::Priority);
}

// Direct mode ---------------------------------------------------------------

void TracerBehavior::handle_event_direct(Step& s, const TraceEvent& e)
{
    auto pt = route_of(e.src);
    switch (e.act)
    {
    case Action::Frk:
        if (pt)
        {
            branch(s, "fork.o.route");
            route(s, Message{e}, *pt);
            if (!mutated(Mutation::SkipRouteAdd))
                pi_add(s, *e.tgt, *pt);
        }
        else
        {
            branch(s, "fork.o.analyse");
            analyse(s, e);
            instrument(s, Mode::Direct, e, sigma_.self_pid);
        }
        break;
    case Action::Ext:
        if (pt)
        {
            branch(s, "exit.o.route");
            route(s, Message{e}, *pt);
        }
        else
        {
            branch(s, "exit.o.analyse");
            analyse(s, e);
            gamma_del(s, e.src);
            try_gc(s);
        }
        break;
    case Action::Snd:
    case Action::Rcv:
        if (pt)
        {
            branch(s, "comm.o.route");
            route(s, Message{e}, *pt);
        }
        else
        {
            branch(s, "comm.o.analyse");
            analyse(s, e);
        }
        break;
    }
}

void TracerBehavior::route_dtc(Step& s, const DetachCommand& c)
{
    if (mutated(Mutation::DropDtc))
        return;
    auto pt = route_of(c.tgt);
    if (!pt)
        throw ProtocolError(ProtocolError::Kind::MisdirectedDtc, "no route for " + to_string(c.tgt));
    branch(s, "routedtc.route");
    route(s, Message{c}, *pt);
    if (!mutated(Mutation::SkipRouteDeletion))
        pi_del(s, c.tgt);
    try_gc(s);
}

void TracerBehavior::forwd_rtd(Step& s, const RoutedMessage& r)
{
    if (r.embeds_event())
    {
        const auto& e = r.event();
        if (mutated(Mutation::AnalyseRoutedInDirect))
        {
            analyse(s, e);
            return;
        }
        auto pt = route_of(e.src);
        if (!pt)
        {
            if (mutated(Mutation::NoPriorityMode))
                return handle_event_priority(s, r);
            throw ProtocolError(ProtocolError::Kind::OrphanRoutedEvent, "no route for " + to_string(e.src));
        }
        // The forward target is the next hop p_t, never the analyser.
        branch(s, e.act == Action::Frk ? "forwd.o.evt.frk" : "forwd.o.evt");
        forwd(s, r, *pt);
        if (e.act == Action::Frk)
            pi_add(s, *e.tgt, *pt);
        return;
    }
    const auto& c = r.command();
    auto pt = route_of(c.tgt);
    if (!pt)
    {
        if (mutated(Mutation::NoPriorityMode) && c.iss == sigma_.self_pid)
            return own_dtc(s, c);
        throw ProtocolError(ProtocolError::Kind::MisdirectedDtc, "no route for " + to_string(c.tgt));
    }
    branch(s, "forwd.o.dtc");
    forwd(s, r, *pt);
    pi_del(s, c.tgt);
    try_gc(s);
}

// Priority mode -------------------------------------------------------------

void TracerBehavior::handle_event_priority(Step& s, const RoutedMessage& r)
{
    const auto& e = r.event();
    auto pt = route_of(e.src);
    switch (e.act)
    {
    case Action::Frk:
        if (pt)
        {
            branch(s, "fork.p.forward");
            forwd(s, r, *pt);
            pi_add(s, *e.tgt, *pt);
        }
        else
        {
            branch(s, "fork.p.analyse");
            analyse(s, e);
            instrument(s, Mode::Priority, e, mutated(Mutation::WrongRouterPid) ? sigma_.self_pid : r.rtr);
        }
        break;
    case Action::Ext:
        if (pt)
        {
            branch(s, "exit.p.forward");
            forwd(s, r, *pt);
        }
        else
        {
            branch(s, "exit.p.analyse");
            analyse(s, e);
            gamma_del(s, e.src);
            try_gc(s);
        }
        break;
    case Action::Snd:
    case Action::Rcv:
        if (pt)
        {
            branch(s, "comm.p.forward");
            forwd(s, r, *pt);
        }
        else
        {
            branch(s, "comm.p.analyse");
            analyse(s, e);
        }
        break;
    }
}

void TracerBehavior::handle_dtc(Step& s, const RoutedMessage& r)
{
    const auto& c = r.command();
    if (auto pt = route_of(c.tgt))
    {
        // Passing the command on also retires the route, exactly as in
        // direct-mode forwarding; otherwise the route would never be freed.
        branch(s, "dtc.p.forward");
        forwd(s, r, *pt);
        pi_del(s, c.tgt);
        try_gc(s);
        return;
    }
    if (c.iss != sigma_.self_pid)
        throw ProtocolError(ProtocolError::Kind::DtcProtocolViolation,
                            "dtc of " + to_string(c.iss) + " for unrouted " + to_string(c.tgt));
    own_dtc(s, c);
}

void TracerBehavior::own_dtc(Step& s, const DetachCommand& c)
{
    auto it = sigma_.traced.find(c.tgt);
    if (it != sigma_.traced.end())
    {
        if (it->second == Mode::Direct)
            throw ProtocolError(ProtocolError::Kind::DtcProtocolViolation,
                                to_string(c.tgt) + " is already detached");
        gamma_mark(s, c.tgt, Mode::Direct);
    }
    // A process that already exited left Γ before its dtc returned; only the
    // mode check remains.
    sigma_.detaching.erase(c.tgt);
    if (sigma_.has_priority_entries() || !sigma_.detaching.empty())
    {
        branch(s, "dtc.p.own");
        return;
    }
    branch(s, "dtc.p.switch");
    set_mode(s, Mode::Direct);
    try_gc(s);
}

// Instrumentation and primitives -------------------------------------------

void TracerBehavior::instrument(Step& s, Mode mode, const TraceEvent& e, Pid router)
{
    const Pid child = *e.tgt;
    if (cfg_->compiled.count(*e.sig))
    {
        branch(s, mode == Mode::Direct ? "instrument.o.new" : "instrument.p.new");
        auto tracer = TracerBehavior::instrumented(cfg_, MonitorKey{child, *e.sig}, router);
        Pid pt = s.ctx.spawn(std::move(tracer), Pid::Kind::Tracer, "tracer");
        pi_add(s, child, pt);
        return;
    }
    if (mode == Mode::Direct)
    {
        // No detach needed: the child is already traced by this tracer.
        branch(s, "instrument.o.share");
        gamma_add(s, child, Mode::Direct);
        return;
    }
    branch(s, "instrument.p.share");
    if (!mutated(Mutation::NoDetach))
        detach(s, child, router);
    gamma_add(s, child, Mode::Priority);
}

void TracerBehavior::route(Step& s, const Message& m, Pid pt)
{
    if (mutated(Mutation::ForwardInsteadOfRoute))
    {
        s.ctx.send(pt, m, Via::Forwd);
        return;
    }
    s.ctx.send(pt, Message{wrap_routed(m, sigma_.self_pid)}, Via::Route);
}

void TracerBehavior::forwd(Step& s, const RoutedMessage& r, Pid pt)
{
    s.ctx.send(pt, Message{r}, Via::Forwd);
}

void TracerBehavior::detach(Step& s, Pid ps, Pid router)
{
    s.ctx.preempt(ps, sigma_.self_pid);
    s.ctx.send(router, Message{DetachCommand{sigma_.self_pid, ps}}, Via::Dtc);
    sigma_.detaching.insert(ps);
}

void TracerBehavior::analyse(Step& s, const TraceEvent& e)
{
    if (s.ctx.logging(EntryKind::Analyse))
    {
        Entry a;
        a.kind = EntryKind::Analyse;
        a.msg = Message{e};
        s.ctx.log(std::move(a));
    }
    if (sigma_.analyzer)
        s.ctx.send(*sigma_.analyzer, Message{e}, Via::Analyse);
    else if (automaton_)
    {
        const bool was_flagged = automaton_->flagged().has_value();
        Verdict v = automaton_->feed(e);
        if (!was_flagged && v != Verdict::Inconclusive)
            s.ctx.log(verdict_entry(*key_, v));
    }
}

void TracerBehavior::try_gc(Step& s)
{
    if (mutated(Mutation::NoGc))
        return;
    if (!sigma_.collectable())
    {
        branch(s, "gc.keep");
        return;
    }
    branch(s, "gc.collect");
    if (sigma_.analyzer)
        s.ctx.send(*sigma_.analyzer, Control{}, Via::Signal);
    s.collect = true;
}

std::optional<Pid> TracerBehavior::route_of(Pid ps) const
{
    auto it = sigma_.routing.find(ps);
    if (it == sigma_.routing.end())
        return std::nullopt;
    return it->second;
}

void TracerBehavior::pi_add(Step& s, Pid ps, Pid pt)
{
    s.ctx.log(Entry{0, std::nullopt, EntryKind::PiAdd, ps, pt, {}, std::nullopt, std::nullopt});
    sigma_.routing[ps] = pt;
}

void TracerBehavior::pi_del(Step& s, Pid ps)
{
    auto it = sigma_.routing.find(ps);
    std::optional<Pid> old;
    if (it != sigma_.routing.end())
        old = it->second;
    s.ctx.log(Entry{0, std::nullopt, EntryKind::PiDel, ps, old, {}, std::nullopt, std::nullopt});
    if (it != sigma_.routing.end())
        sigma_.routing.erase(it);
}

void TracerBehavior::gamma_add(Step& s, Pid ps, Mode mark)
{
    s.ctx.log(Entry{0, std::nullopt, EntryKind::GammaAdd, ps, std::nullopt, std::string(1, mode_symbol(mark)),
                    std::nullopt, std::nullopt});
    sigma_.traced[ps] = mark;
}

void TracerBehavior::gamma_del(Step& s, Pid ps)
{
    s.ctx.log(Entry{0, std::nullopt, EntryKind::GammaDel, ps, std::nullopt, {}, std::nullopt, std::nullopt});
    if (sigma_.traced.erase(ps) == 0)
        throw ProtocolError(ProtocolError::Kind::UnknownProcess, to_string(ps) + " is not traced here");
}

void TracerBehavior::gamma_mark(Step& s, Pid ps, Mode mark)
{
    s.ctx.log(Entry{0, std::nullopt, EntryKind::GammaMark, ps, std::nullopt, std::string(1, mode_symbol(mark)),
                    std::nullopt, std::nullopt});
    sigma_.traced[ps] = mark;
}

void TracerBehavior::branch(Step& s, const char* id)
{
    if (s.ctx.logging(EntryKind::Branch))
        s.ctx.log(Entry{0, std::nullopt, EntryKind::Branch, std::nullopt, std::nullopt, id, std::nullopt, std::nullopt});
}

void TracerBehavior::set_mode(Step& s, Mode m)
{
    sigma_.mode = m;
    s.ctx.log(Entry{0, std::nullopt, EntryKind::ModeSwitch, std::nullopt, std::nullopt, std::string(1, mode_symbol(m)),
                    std::nullopt, std::nullopt});
}

void TracerBehavior::fingerprint(std::string& out) const
{
    out += root_ ? "Tr" : "Ti";
    out += initialised_ ? '1' : '0';
    out += mode_symbol(sigma_.mode);
    out += to_string(process_) + "," + to_string(router_);
    for (const auto& [k, v] : sigma_.routing)
        out += "P" + to_string(k) + ">" + to_string(v);
    for (const auto& [k, v] : sigma_.traced)
        out += "G" + to_string(k) + mode_symbol(v);
    for (const auto& k : sigma_.detaching)
        out += "D" + to_string(k);
    if (sigma_.analyzer)
        out += "A" + to_string(*sigma_.analyzer);
    if (automaton_)
        automaton_->fingerprint(out);
}

} // namespace choreo
