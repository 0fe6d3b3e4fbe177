#include "choreo/invariants/exhaustive.hpp"

#include "choreo/core/errors.hpp"

#include <algorithm>
#include <memory>
#include <sstream>
#include <unordered_set>

namespace choreo
{

std::vector<std::string> ExhaustiveSummary::missing_branches() const
{
    std::vector<std::string> out;
    for (const auto& id : tracer_branch_ids())
        if (!branch_hits.count(id))
            out.push_back(id);
    return out;
}

namespace
{

RaceFlags races_in_step(const std::vector<Entry>& step, const Runtime& rt)
{
    RaceFlags f;
    for (const auto& e : step)
    {
        const Message* m = e.msg ? as_message(*e.msg) : nullptr;
        if (!m || m->q() != Qualifier::Rtd || !m->routed().embeds_event())
            continue;
        const auto& ev = m->routed().event();
        if (e.kind == EntryKind::Send && e.t == to_string(Via::Route))
            f.routed_event = true;
        if (e.kind == EntryKind::Deliver && e.actor && ev.act == Action::Rcv)
        {
            const auto* rec = rt.process(*e.actor);
            if (!rec)
                continue;
            for (const auto& queued : rec->mailbox)
            {
                auto* q = as_message(queued);
                if (q && q->q() == Qualifier::Evt && q->event().act == Action::Ext && q->event().src == ev.src)
                    f.ext_before_rcv = true;
            }
        }
    }
    return f;
}

struct Node
{
    Runtime rt;
    InvariantChecker ck;

    Node(Runtime r, InvariantChecker c) : rt(std::move(r)), ck(std::move(c)) { rt.set_sink(&ck); }
    Node(const Node& o) : rt(o.rt), ck(o.ck) { rt.set_sink(&ck); }
};

struct Key
{
    std::uint64_t a;
    std::uint64_t b;
    friend bool operator==(const Key&, const Key&) = default;
};

struct KeyHash
{
    std::size_t operator()(const Key& k) const noexcept { return k.a ^ (k.b * 0x9e3779b97f4a7c15ULL); }
};

Key key_of(const Node& n)
{
    std::string fp;
    fp.reserve(4096);
    n.rt.fingerprint(fp);
    n.ck.fingerprint(fp);
    std::uint64_t fnv = 1469598103934665603ULL;
    for (unsigned char ch : fp)
    {
        fnv ^= ch;
        fnv *= 1099511628211ULL;
    }
    return Key{std::hash<std::string>{}(fp), fnv};
}

bool commutes_with_everything(const Runtime& rt, const Choice& c)
{
    auto dead = [&](Pid p) {
        const auto* r = rt.process(p);
        return r && r->status == Status::Terminated;
    };
    switch (c.kind)
    {
    case Choice::Kind::Run: return c.a.kind == Pid::Kind::Analyzer;
    case Choice::Kind::Deliver: return c.b.kind == Pid::Kind::Analyzer || dead(c.b);
    case Choice::Kind::Trace:
        if (!dead(c.a))
            return false;
        for (const auto& [ps, pt] : rt.tracing().table())
            if (pt == c.a && !dead(ps))
                return false;
        return true;
    }
    return false;
}

std::vector<Choice> candidates(const Runtime& rt, bool reduce)
{
    if (reduce)
        for (const auto& c : rt.enabled())
            if (commutes_with_everything(rt, c))
                return {c};
    return rt.enabled();
}

/// Extends a witness prefix to quiescence by always taking the first
/// enabled choice, and reports whether the full run passed.
bool complete(Node node, std::vector<Choice>& path, std::size_t cap)
{
    while (!node.rt.quiescent() && path.size() < cap)
    {
        Choice c = node.rt.enabled().front();
        node.rt.apply(c);
        node.ck.end_step();
        path.push_back(c);
    }
    return node.rt.quiescent() && node.ck.finish(true).ok();
}

} // namespace

ExhaustiveSummary exhaustive_check(const Scenario& s, const ExhaustiveOptions& opts)
{
    ExhaustiveSummary sum;
    CheckOptions co;
    if (opts.check_verdicts)
        co.phi = std::make_shared<const CompiledPhi>(compile_phi(s.phi));
    if (opts.run.mode == MonitoringMode::OutlineEA)
        co.variant = AnalysisVariant::EA;
    else if (opts.run.mode == MonitoringMode::OutlineIA)
        co.variant = AnalysisVariant::IA;
    co.require_snapshots = opts.run.snapshots;

    RunConfig rc = opts.run;
    rc.record_choices = false;
    InvariantChecker start_ck(co);
    Runtime start_rt = build_runtime(s, rc, &start_ck);
    auto root = std::make_unique<Node>(std::move(start_rt), std::move(start_ck));

    std::unordered_set<Key, KeyHash> seen;
    struct Frame
    {
        std::unique_ptr<Node> node;
        std::vector<Choice> choices;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;
    std::vector<Choice> path;
    bool stop = false;

    auto record_failure = [&](const Node& n, const std::string& detail) {
        ++sum.failed;
        auto rep = n.ck.finish(n.rt.quiescent());
        for (const auto& id : rep.failing())
            sum.failed_checks.insert(id);
        if (!detail.empty())
            sum.failed_checks.insert("exception");
        if (!sum.counterexample)
        {
            rep.schedule = StepSchedule{path};
            sum.counterexample = Counterexample{StepSchedule{path}, std::move(rep), detail};
        }
        if (opts.stop_at_first_failure)
            stop = true;
    };

    // Returns true when a frame was pushed for the node.
    auto enter = [&](std::unique_ptr<Node> node) {
        if (!seen.insert(key_of(*node)).second)
            return false;
        if (++sum.states > opts.state_guard && !opts.force)
            throw ExplosionGuard("more than " + std::to_string(opts.state_guard) + " states in " + s.name);
        if (node->rt.quiescent())
        {
            ++sum.terminals;
            sum.verdicts.insert(node->ck.verdicts());
            sum.analyses.insert(node->ck.analysis_summary());
            sum.live_monitors_at_end = std::max(
                sum.live_monitors_at_end, node->rt.live(Pid::Kind::Tracer) + node->rt.live(Pid::Kind::Analyzer));
            auto rep = node->ck.finish(true);
            if (rep.ok())
                ++sum.passed;
            else
                record_failure(*node, {});
            return false;
        }
        if (path.size() >= opts.depth_cap)
        {
            ++sum.truncated;
            return false;
        }
        auto choices = candidates(node->rt, opts.reduce);
        stack.push_back(Frame{std::move(node), std::move(choices), 0});
        return true;
    };

    enter(std::move(root));
    while (!stack.empty() && !stop)
    {
        auto& top = stack.back();
        if (top.next == top.choices.size())
        {
            stack.pop_back();
            if (!path.empty())
                path.pop_back();
            continue;
        }
        const Choice c = top.choices[top.next++];
        auto child = std::make_unique<Node>(*top.node);
        path.push_back(c);
        ++sum.transitions;
        try
        {
            child->rt.apply(c);
            child->ck.end_step();
        }
        catch (const Error& err)
        {
            record_failure(*child, err.what());
            path.pop_back();
            continue;
        }
        for (const auto& e : child->ck.last_step())
            if (e.kind == EntryKind::Branch)
                ++sum.branch_hits[e.t];
        auto races = races_in_step(child->ck.last_step(), child->rt);
        if (races.routed_event && !sum.routed_event_witness)
        {
            auto full = path;
            sum.routed_event_witness_ok = complete(*child, full, opts.depth_cap);
            sum.routed_event_witness = StepSchedule{std::move(full)};
        }
        if (races.ext_before_rcv && !sum.ext_before_rcv_witness)
        {
            auto full = path;
            sum.ext_before_rcv_witness_ok = complete(*child, full, opts.depth_cap);
            sum.ext_before_rcv_witness = StepSchedule{std::move(full)};
        }
        if (child->ck.failed())
        {
            record_failure(*child, {});
            path.pop_back();
            continue;
        }
        if (!enter(std::move(child)))
            path.pop_back();
    }
    return sum;
}

RaceFlags detect_races(const Scenario& s, const RunConfig& cfg, const StepSchedule& schedule)
{
    struct StepLog : LogSink
    {
        std::vector<Entry> entries;
        void record(const Entry& e) override { entries.push_back(e); }
    } sink;
    Runtime rt = build_runtime(s, cfg, &sink);
    RaceFlags out;
    for (const auto& c : schedule.steps)
    {
        sink.entries.clear();
        rt.apply(c);
        auto f = races_in_step(sink.entries, rt);
        out.routed_event |= f.routed_event;
        out.ext_before_rcv |= f.ext_before_rcv;
    }
    rt.set_sink(nullptr);
    return out;
}

std::string render(const ExhaustiveSummary& s)
{
    std::ostringstream out;
    out << "states " << s.states << "\n"
        << "transitions " << s.transitions << "\n"
        << "end-states " << s.terminals << " passed " << s.passed << " failed " << s.failed << "\n"
        << "truncated " << s.truncated << "\n";
    const auto missing = s.missing_branches();
    const auto total = tracer_branch_ids().size();
    out << "branches " << (total - missing.size()) << "/" << total;
    for (const auto& m : missing)
        out << " -" << m;
    out << "\n";
    out << "race routed-event " << (s.routed_event_witness ? (s.routed_event_witness_ok ? "seen ok" : "seen FAIL") : "unseen")
        << "\n";
    out << "race ext-before-rcv "
        << (s.ext_before_rcv_witness ? (s.ext_before_rcv_witness_ok ? "seen ok" : "seen FAIL") : "unseen") << "\n";
    if (s.counterexample)
    {
        out << "counterexample " << to_string(Schedule{s.counterexample->schedule}) << "\n";
        if (!s.counterexample->detail.empty())
            out << "error " << s.counterexample->detail << "\n";
        out << s.counterexample->report.render();
    }
    for (const auto& a : s.analyses)
        out << "analysis " << a << "\n";
    return out.str();
}

} // namespace choreo
