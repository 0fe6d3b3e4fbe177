#include "choreo/runtime/runtime.hpp"

#include "choreo/core/errors.hpp"

#include <random>

namespace choreo
{

const char* to_string(Status s) noexcept
{
    switch (s)
    {
    case Status::Paused: return "paused";
    case Status::Runnable: return "runnable";
    case Status::Blocked: return "blocked";
    case Status::Terminated: return "terminated";
    }
    return "?";
}

void EnabledSet::add(const Choice& c)
{
    if (index_.emplace(c, items_.size()).second)
        items_.push_back(c);
}

void EnabledSet::remove(const Choice& c)
{
    auto it = index_.find(c);
    if (it == index_.end())
        return;
    std::size_t pos = it->second;
    index_.erase(it);
    if (pos + 1 != items_.size())
    {
        items_[pos] = items_.back();
        index_[items_[pos]] = pos;
    }
    items_.pop_back();
}

Runtime::Runtime(std::shared_ptr<const SystemFactory> factory, RuntimeOptions opts)
    : factory_(std::move(factory)), opts_(opts)
{
    procs_.emplace_back(); // slot 0 is never handed out
    for (auto& v : slots_)
        v.push_back(0);
}

Runtime::Runtime(const Runtime& other)
    : factory_(other.factory_), opts_(other.opts_), channels_(other.channels_), tracing_(other.tracing_),
      enabled_(other.enabled_), slots_(other.slots_), hook_(other.hook_ ? other.hook_->clone() : nullptr), sink_(other.sink_),
      mask_(other.mask_), step_(other.step_), acting_(other.acting_), created_(other.created_), live_(other.live_),
      live_peak_(other.live_peak_), mailbox_peak_(other.mailbox_peak_)
{
    procs_.reserve(other.procs_.size());
    for (const auto& p : other.procs_)
    {
        ProcessRecord r;
        r.pid = p.pid;
        r.status = p.status;
        r.mailbox = p.mailbox;
        r.behavior = p.behavior ? p.behavior->clone() : nullptr;
        r.sig = p.sig;
        r.parent = p.parent;
        procs_.push_back(std::move(r));
    }
}

Runtime& Runtime::operator=(const Runtime& other)
{
    if (this != &other)
    {
        Runtime copy(other);
        *this = std::move(copy);
    }
    return *this;
}

Runtime::~Runtime() = default;

void Runtime::set_sink(LogSink* sink)
{
    sink_ = sink;
    mask_.reset();
    if (sink_)
        for (std::size_t k = 0; k < kEntryKindCount; ++k)
            mask_[k] = sink_->wants(static_cast<EntryKind>(k));
}

void Runtime::set_inline_hook(std::unique_ptr<InlineHook> hook)
{
    hook_ = std::move(hook);
}

void Runtime::record(Entry e)
{
    e.step = step_;
    sink_->record(e);
}

ProcessRecord& Runtime::rec(Pid p)
{
    auto i = slot(p);
    if (i == 0)
        throw Error("unknown process " + to_string(p));
    return procs_[i];
}

const ProcessRecord* Runtime::process(Pid p) const
{
    auto i = slot(p);
    return i == 0 ? nullptr : &procs_[i];
}

std::size_t Runtime::slot(Pid p) const noexcept
{
    const auto& v = slots_[static_cast<std::size_t>(p.kind)];
    return p.serial < v.size() ? v[p.serial] : 0;
}

Pid Runtime::allocate(Pid::Kind kind)
{
    auto k = static_cast<std::size_t>(kind);
    Pid pid{kind, static_cast<std::uint32_t>(slots_[k].size())};
    slots_[k].push_back(static_cast<std::uint32_t>(procs_.size()));
    procs_.emplace_back();
    procs_.back().pid = pid;
    ++created_[k];
    ++live_[k];
    live_peak_[k] = std::max(live_peak_[k], live_[k]);
    return pid;
}

Pid Runtime::spawn_system(const Signature& sig, bool paused)
{
    Pid pid = allocate(Pid::Kind::System);
    auto& r = procs_[slot(pid)];
    r.sig = sig;
    r.behavior = (*factory_)(sig, pid, std::nullopt);
    r.status = paused ? Status::Paused : Status::Blocked;
    if (logging(EntryKind::Spawn))
        record(Entry{0, std::nullopt, EntryKind::Spawn, pid, std::nullopt,
                     "sys:" + sig.name + (paused ? ":paused" : ""), std::nullopt, std::nullopt});
    refresh(pid);
    return pid;
}

Pid Runtime::spawn(std::unique_ptr<Behavior> behavior, Pid::Kind kind, std::string role, bool paused)
{
    Pid pid = allocate(kind);
    auto& r = procs_[slot(pid)];
    r.behavior = std::move(behavior);
    r.status = paused ? Status::Paused : Status::Blocked;
    if (logging(EntryKind::Spawn))
        record(Entry{0, acting_, EntryKind::Spawn, pid, std::nullopt, std::move(role), std::nullopt, std::nullopt});
    refresh(pid);
    return pid;
}

void Runtime::refresh(Pid p)
{
    auto& r = procs_[slot(p)];
    if (r.status == Status::Paused || r.status == Status::Terminated)
    {
        enabled_.remove(Choice::run(p));
        return;
    }
    if (r.behavior->ready(r.mailbox))
    {
        r.status = Status::Runnable;
        enabled_.add(Choice::run(p));
    }
    else
    {
        r.status = Status::Blocked;
        enabled_.remove(Choice::run(p));
    }
}

void Runtime::push_mail(Pid to, Mail m)
{
    auto& r = rec(to);
    r.mailbox.push_back(std::move(m));
    mailbox_peak_ = std::max(mailbox_peak_, r.mailbox.size());
}

void Runtime::terminate(Pid p, EntryKind kind)
{
    auto& r = rec(p);
    if (r.status == Status::Terminated)
        return;
    r.status = Status::Terminated;
    --live_[static_cast<std::size_t>(p.kind)];
    if (logging(kind))
        record(Entry{0, p, kind, std::nullopt, std::nullopt, {}, std::nullopt, std::nullopt});
}

void Runtime::halt(Pid p)
{
    if (p.is_system())
        throw Error("halt applies to monitor-side processes only");
    terminate(p, EntryKind::Crash);
    refresh(p);
}

std::size_t Runtime::in_flight() const
{
    std::size_t n = 0;
    for (const auto& [k, q] : channels_)
        n += q.size();
    for (const auto& [t, s] : tracing_.streams())
        n += s.size();
    return n;
}

void Runtime::apply(Choice c)
{
    if (!enabled_.contains(c))
        throw InvalidChoice(to_string(c) + " is not enabled at step " + std::to_string(step_));
    ++step_;
    switch (c.kind)
    {
    case Choice::Kind::Run:
    {
        acting_ = c.a;
        ProcessContext ctx(*this, c.a);
        rec(c.a).behavior->step(ctx);
        acting_.reset();
        refresh(c.a);
        break;
    }
    case Choice::Kind::Deliver:
    {
        auto key = std::make_pair(c.a, c.b);
        auto it = channels_.find(key);
        Mail m = std::move(it->second.front());
        it->second.pop_front();
        if (it->second.empty())
        {
            channels_.erase(it);
            enabled_.remove(c);
        }
        auto& r = rec(c.b);
        const bool dead = r.status == Status::Terminated;
        const auto kind = dead ? EntryKind::Drop : EntryKind::Deliver;
        if (logging(kind))
            record(Entry{0, c.b, kind, c.a, std::nullopt, {}, std::nullopt, m});
        if (!dead)
        {
            push_mail(c.b, std::move(m));
            refresh(c.b);
        }
        break;
    }
    case Choice::Kind::Trace:
    {
        TraceEvent e = tracing_.pop(c.a);
        if (!tracing_.has_pending(c.a))
            enabled_.remove(c);
        auto& r = rec(c.a);
        const bool dead = r.status == Status::Terminated;
        const auto kind = dead ? EntryKind::Drop : EntryKind::Deliver;
        if (logging(kind))
            record(Entry{0, c.a, kind, std::nullopt, std::nullopt, "trace", std::nullopt, Mail{Message{e}}});
        if (!dead)
        {
            push_mail(c.a, Message{std::move(e)});
            refresh(c.a);
        }
        break;
    }
    }
}

void Runtime::emit(ProcessContext& ctx, Action act, std::optional<Pid> tgt, std::optional<Signature> sig)
{
    Pid ps = ctx.self();
    if (hook_)
    {
        TraceEvent e = tracing_.next_event(ps, act, tgt, std::move(sig));
        if (logging(EntryKind::Emit))
            record(Entry{0, ps, EntryKind::Emit, std::nullopt, std::nullopt, {}, std::nullopt, Mail{Message{e}}});
        hook_->on_event(e, ctx);
        return;
    }
    auto out = tracing_.emit(ps, act, tgt, std::move(sig));
    if (!out)
        return;
    enabled_.add(Choice::trace(out->first));
    if (logging(EntryKind::Emit))
        record(Entry{0, ps, EntryKind::Emit, out->first, std::nullopt, {}, std::nullopt,
                     Mail{Message{std::move(out->second)}}});
}

void Runtime::flush_into(Pid pt, Pid ps, std::vector<TraceEvent> flushed)
{
    if (!tracing_.has_pending(pt))
        enabled_.remove(Choice::trace(pt));
    if (flushed.empty())
        return;
    auto& r = rec(pt);
    const bool dead = r.status == Status::Terminated;
    for (auto& e : flushed)
    {
        if (logging(EntryKind::Flush))
            record(Entry{0, acting_, EntryKind::Flush, ps, pt, dead ? "dropped" : "", std::nullopt,
                         Mail{Message{e}}});
        if (!dead)
            push_mail(pt, Message{std::move(e)});
    }
    if (!dead)
        refresh(pt);
}

RunOutcome run(Runtime& rt, const Schedule& schedule)
{
    RunOutcome out;
    const auto cap = rt.options().step_cap;
    if (auto* seeded = std::get_if<SeedSchedule>(&schedule))
    {
        std::mt19937_64 rng(seeded->seed);
        while (!rt.quiescent())
        {
            if (rt.steps() >= cap)
                throw StepCapExceeded("no quiescence after " + std::to_string(cap) + " steps");
            const auto& en = rt.enabled();
            Choice c = en[rng() % en.size()];
            if (rt.options().record_choices)
                out.realized.push_back(c);
            rt.apply(c);
        }
        out.quiescent = true;
        return out;
    }
    for (const auto& c : std::get<StepSchedule>(schedule).steps)
    {
        if (rt.steps() >= cap)
            throw StepCapExceeded("no quiescence after " + std::to_string(cap) + " steps");
        rt.apply(c);
        out.realized.push_back(c);
    }
    if (!rt.quiescent())
        throw ScheduleExhausted("schedule ended after " + std::to_string(out.realized.size()) +
                                " steps with " + std::to_string(rt.enabled().size()) + " choices still enabled");
    out.quiescent = true;
    return out;
}

void Runtime::fingerprint(std::string& out) const
{
    for (std::size_t i = 1; i < procs_.size(); ++i)
    {
        const auto& r = procs_[i];
        out += to_string(r.pid);
        out += static_cast<char>('0' + static_cast<int>(r.status));
        out += '{';
        for (const auto& m : r.mailbox)
            out += render(m) + ";";
        out += '}';
        if (r.status != Status::Terminated && r.behavior)
            r.behavior->fingerprint(out);
        out += '|';
    }
    out += "C";
    for (const auto& [k, q] : channels_)
    {
        out += to_string(k.first) + ">" + to_string(k.second) + "[";
        for (const auto& m : q)
            out += render(m) + ";";
        out += "]";
    }
    tracing_.fingerprint(out);
    if (hook_)
        hook_->fingerprint(out);
}

// ProcessContext ------------------------------------------------------------

const Mailbox& ProcessContext::mailbox() const
{
    return rt_.rec(self_).mailbox;
}

Mail ProcessContext::take(std::size_t index, std::string note)
{
    auto& r = rt_.rec(self_);
    Mail m = std::move(r.mailbox[index]);
    r.mailbox.erase(r.mailbox.begin() + static_cast<std::ptrdiff_t>(index));
    if (rt_.logging(EntryKind::Consume))
        rt_.record(Entry{0, self_, EntryKind::Consume, std::nullopt, std::nullopt, std::move(note), std::nullopt, m});
    if (self_.is_system())
        rt_.emit(*this, Action::Rcv, std::nullopt, std::nullopt);
    return m;
}

Mail ProcessContext::receive_any(std::string note)
{
    if (mailbox().empty())
        throw Error("receive_any on empty mailbox of " + to_string(self_));
    return take(0, std::move(note));
}

void ProcessContext::send(Pid to, Mail m, Via via)
{
    if (!rt_.process(to))
        throw Error("send to unknown process " + to_string(to));
    if (self_.is_system())
        rt_.emit(*this, Action::Snd, to, std::nullopt);
    if (rt_.logging(EntryKind::Send))
        rt_.record(Entry{0, self_, EntryKind::Send, to, std::nullopt, to_string(via), std::nullopt, m});
    auto key = std::make_pair(self_, to);
    rt_.channels_[key].push_back(std::move(m));
    rt_.enabled_.add(Choice::deliver(self_, to));
}

Pid ProcessContext::fork(const Signature& sig)
{
    if (!self_.is_system())
        throw Error("only system processes fork");
    Pid child = rt_.allocate(Pid::Kind::System);
    auto& r = rt_.procs_[rt_.slot(child)];
    r.sig = sig;
    r.parent = self_;
    r.behavior = (*rt_.factory_)(sig, child, self_);
    r.status = Status::Blocked;
    if (rt_.logging(EntryKind::Spawn))
        rt_.record(Entry{0, self_, EntryKind::Spawn, child, std::nullopt, "sys:" + sig.name, std::nullopt,
                         std::nullopt});
    rt_.tracing_.inherit(self_, child);
    if (auto t = rt_.tracing_.tracer_of(child); t && rt_.logging(EntryKind::Bind))
        rt_.record(Entry{0, self_, EntryKind::Bind, child, *t, "inherit", std::nullopt, std::nullopt});
    rt_.emit(*this, Action::Frk, child, sig);
    rt_.refresh(child);
    return child;
}

void ProcessContext::exit()
{
    rt_.emit(*this, Action::Ext, std::nullopt, std::nullopt);
    rt_.terminate(self_, EntryKind::Exit);
}

void ProcessContext::crash()
{
    rt_.emit(*this, Action::Ext, std::nullopt, std::nullopt);
    rt_.terminate(self_, EntryKind::Crash);
}

Pid ProcessContext::spawn(std::unique_ptr<Behavior> behavior, Pid::Kind kind, std::string role)
{
    return rt_.spawn(std::move(behavior), kind, std::move(role));
}

void ProcessContext::trace(Pid ps, Pid pt)
{
    rt_.tracing_.trace(ps, pt);
    if (rt_.logging(EntryKind::Bind))
        rt_.record(Entry{0, self_, EntryKind::Bind, ps, pt, {}, std::nullopt, std::nullopt});
}

void ProcessContext::clear(Pid ps, Pid pt)
{
    auto flushed = rt_.tracing_.clear(ps, pt, rt_.opts_.flush_on_clear);
    if (rt_.logging(EntryKind::Unbind))
        rt_.record(Entry{0, self_, EntryKind::Unbind, ps, pt, {}, std::nullopt, std::nullopt});
    rt_.flush_into(pt, ps, std::move(flushed));
}

Pid ProcessContext::preempt(Pid ps, Pid pt)
{
    std::vector<TraceEvent> flushed;
    Pid old = rt_.tracing_.preempt(ps, pt, flushed, rt_.opts_.flush_on_clear);
    if (rt_.logging(EntryKind::Unbind))
        rt_.record(Entry{0, self_, EntryKind::Unbind, ps, old, {}, std::nullopt, std::nullopt});
    rt_.flush_into(old, ps, std::move(flushed));
    if (rt_.logging(EntryKind::Bind))
        rt_.record(Entry{0, self_, EntryKind::Bind, ps, pt, {}, std::nullopt, std::nullopt});
    return old;
}

void ProcessContext::resume(Pid ps)
{
    auto& r = rt_.rec(ps);
    if (r.status != Status::Paused)
        return;
    r.status = Status::Blocked;
    if (rt_.logging(EntryKind::Resume))
        rt_.record(Entry{0, self_, EntryKind::Resume, ps, std::nullopt, {}, std::nullopt, std::nullopt});
    rt_.refresh(ps);
}

void ProcessContext::terminate()
{
    rt_.terminate(self_, EntryKind::Terminate);
}

bool ProcessContext::logging(EntryKind k) const
{
    return rt_.logging(k);
}

void ProcessContext::log(Entry e)
{
    if (!rt_.logging(e.kind))
        return;
    e.actor = self_;
    rt_.record(std::move(e));
}

} // namespace choreo
