#include "choreo/core/errors.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <random>
#include <set>
#include <tuple>

using namespace choreo;
using namespace choreo::test;

namespace
{

const std::vector<MonitoringMode> kOutline{MonitoringMode::OutlineEA, MonitoringMode::OutlineIA};

std::map<Pid, Signature> signatures(const ExecutionLog& log)
{
    std::map<Pid, Signature> out;
    for (const auto& e : log.entries())
        if (e.kind == EntryKind::Spawn && e.t.rfind("sys:", 0) == 0)
        {
            auto name = e.t.substr(4);
            out[*e.p] = Signature{name.substr(0, name.find(':'))};
        }
    return out;
}

std::vector<TraceEvent> events_of(const ExecutionLog& log, EntryKind kind)
{
    std::vector<TraceEvent> out;
    for (const auto& e : log.entries())
        if (e.kind == kind && e.msg)
            if (auto* m = as_message(*e.msg); m && m->q() == Qualifier::Evt)
                out.push_back(m->event());
    return out;
}

/// Signature -> actions analysed, per tracer.
std::map<Pid, std::map<std::string, std::vector<Action>>> analysed_by_signature(const ExecutionLog& log)
{
    const auto sigs = signatures(log);
    std::map<Pid, std::map<std::string, std::vector<Action>>> out;
    for (const auto& [t, evs] : analysed_by_tracer(log.entries()))
        for (const auto& e : evs)
            out[t][sigs.at(e.src).name].push_back(e.act);
    return out;
}

std::size_t count(const ExecutionLog& log, EntryKind kind, std::string_view t = {})
{
    return static_cast<std::size_t>(std::count_if(log.entries().begin(), log.entries().end(), [&](const Entry& e) {
        return e.kind == kind && (t.empty() || e.t == t);
    }));
}

} // namespace

TEST_SUITE("choreography")
{
    TEST_CASE("running example: each tracer analyses exactly its processes")
    {
        using A = Action;
        const std::map<std::string, std::vector<Action>> t1{{"P", {A::Frk, A::Snd, A::Ext}}};
        const std::map<std::string, std::vector<Action>> t2{{"Q", {A::Rcv, A::Frk, A::Ext}}};
        const std::map<std::string, std::vector<Action>> t3{{"R", {A::Ext}}};
        for (auto mode : kOutline)
            for (std::uint64_t seed = 1; seed <= 60; ++seed)
            {
                auto r = logged_run(running_example(), mode, SeedSchedule{seed});
                auto by = analysed_by_signature(r.log);
                CHECK(by == std::map<Pid, std::map<std::string, std::vector<Action>>>{{T(1), t1}, {T(2), t2}, {T(3), t3}});
                CHECK(verdict_profile(r.result.verdicts) ==
                      VerdictProfile{{Signature{"Q"}, {{Verdict::Accept, 1}}}, {Signature{"R"}, {{Verdict::Accept, 1}}}});
            }
    }

    TEST_CASE("a crashing process still reports its exit")
    {
        for (std::uint64_t seed = 1; seed <= 30; ++seed)
        {
            auto r = logged_run(running_example_crash(), MonitoringMode::OutlineEA, SeedSchedule{seed});
            auto by = analysed_by_signature(r.log);
            CHECK(by[T(2)]["Q"] == std::vector<Action>{Action::Rcv, Action::Frk, Action::Ext});
            CHECK(count(r.log, EntryKind::Crash) == 1);
        }
    }

    TEST_CASE("an empty instrumentation map leaves only the root tracer")
    {
        auto s = running_example();
        s.phi.clear();
        for (auto mode : kOutline)
        {
            auto r = logged_run(s, mode, SeedSchedule{4});
            CHECK(r.result.created[static_cast<std::size_t>(Pid::Kind::Tracer)] == 1);
            CHECK(r.result.created[static_cast<std::size_t>(Pid::Kind::Analyzer)] == 0);
            CHECK(r.result.verdicts.empty());
            auto by = analysed_by_signature(r.log);
            CHECK(by.size() == 1);
            CHECK(by[T(1)].size() == 3);
        }
    }

    TEST_CASE("two top-level processes are analysed by disjoint tracer sets")
    {
        auto s = running_example();
        s.initial = {Signature{"P"}, Signature{"P"}};
        for (std::uint64_t seed = 1; seed <= 40; ++seed)
        {
            auto r = logged_run(s, MonitoringMode::OutlineEA, SeedSchedule{seed});
            std::map<Pid, std::set<Pid>> tracers_of;
            for (const auto& [t, evs] : analysed_by_tracer(r.log.entries()))
                for (const auto& e : evs)
                    tracers_of[e.src].insert(t);
            CHECK(tracers_of.size() == 6);
            for (const auto& [p, ts] : tracers_of)
                CHECK(ts.size() == 1);
            CHECK(r.result.created[static_cast<std::size_t>(Pid::Kind::Tracer)] == 6);
        }
    }

    TEST_CASE("an instrumented tracer starts in priority mode and sends dtc to the router")
    {
        auto r = logged_run(running_example(), MonitoringMode::OutlineEA, SeedSchedule{1});
        auto first = select(r.log, [](const Entry& e) { return e.actor == T(2) && e.kind != EntryKind::Deliver; });
        REQUIRE(first.size() > 5);
        CHECK(first[0].kind == EntryKind::GammaAdd);
        CHECK(first[0].p == S(2));
        CHECK(first[0].t == "p");
        auto dtc = std::find_if(first.begin(), first.end(), [](const Entry& e) {
            return e.kind == EntryKind::Send && e.t == "dtc";
        });
        REQUIRE(dtc != first.end());
        CHECK(dtc->p == T(1));
        CHECK(*dtc->msg == Mail{Message{DetachCommand{T(2), S(2)}}});
        auto mode = std::find_if(first.begin(), first.end(), [](const Entry& e) { return e.kind == EntryKind::ModeSwitch; });
        REQUIRE(mode != first.end());
        CHECK(mode->t == "p");
    }

    TEST_CASE("analysers exist only under external analysis")
    {
        auto ea = logged_run(running_example(), MonitoringMode::OutlineEA, SeedSchedule{9});
        auto ia = logged_run(running_example(), MonitoringMode::OutlineIA, SeedSchedule{9});
        CHECK(ea.result.created[static_cast<std::size_t>(Pid::Kind::Analyzer)] == 2);
        CHECK(ia.result.created[static_cast<std::size_t>(Pid::Kind::Analyzer)] == 0);
        CHECK(ea.result.live == std::array<std::size_t, 3>{0, 0, 0});
        CHECK(ia.result.live == std::array<std::size_t, 3>{0, 0, 0});
    }

    TEST_CASE("property: events flushed on preempt reach the old tracer before its dtc")
    {
        for (auto mode : kOutline)
            for (std::uint64_t seed = 1; seed <= 150; ++seed)
            {
                auto r = logged_run(random_scenario(seed), mode, SeedSchedule{seed});
                std::map<Pid, Pid> detached_from; // process -> old tracer
                for (const auto& e : r.log.entries())
                    if (e.kind == EntryKind::Unbind && e.actor && e.actor->is_tracer() && e.actor != e.q)
                        detached_from[*e.p] = *e.q;
                // Old tracer must consume every bare event of p before the dtc for p.
                std::set<Pid> dtc_seen;
                for (const auto& e : r.log.entries())
                {
                    if (e.kind != EntryKind::Consume || !e.actor || !e.actor->is_tracer() || !e.msg)
                        continue;
                    const auto* m = as_message(*e.msg);
                    if (!m)
                        continue;
                    if (m->q() == Qualifier::Evt)
                    {
                        auto it = detached_from.find(m->event().src);
                        if (it != detached_from.end() && it->second == *e.actor)
                            CHECK_FALSE(dtc_seen.count(m->event().src));
                    }
                    const DetachCommand* c = nullptr;
                    if (m->q() == Qualifier::Dtc)
                        c = &m->command();
                    else if (m->q() == Qualifier::Rtd && !m->routed().embeds_event())
                        c = &m->routed().command();
                    if (c && detached_from.count(c->tgt) && detached_from[c->tgt] == *e.actor)
                        dtc_seen.insert(c->tgt);
                }
            }
    }

    TEST_CASE("property: after the takeover a process emits only to its new tracer")
    {
        for (std::uint64_t seed = 1; seed <= 150; ++seed)
        {
            auto r = logged_run(random_scenario(seed), MonitoringMode::OutlineEA, SeedSchedule{seed});
            std::map<Pid, Pid> bound;
            for (const auto& e : r.log.entries())
            {
                if (e.kind == EntryKind::Bind)
                    bound[*e.p] = *e.q;
                if (e.kind == EntryKind::Emit && e.p)
                    CHECK(e.p == bound.at(*e.actor));
            }
        }
    }

    TEST_CASE("property: every emitted event is analysed exactly once")
    {
        for (auto mode : kOutline)
            for (std::uint64_t seed = 1; seed <= 200; ++seed)
            {
                auto r = logged_run(random_scenario(seed), mode, SeedSchedule{seed * 31});
                auto key = [](const TraceEvent& e) { return std::make_pair(e.src, e.seq); };
                std::multiset<std::pair<Pid, std::uint64_t>> emitted, analysed;
                for (const auto& e : events_of(r.log, EntryKind::Emit))
                    emitted.insert(key(e));
                for (const auto& e : events_of(r.log, EntryKind::Analyse))
                    analysed.insert(key(e));
                CHECK(emitted == analysed);
                CHECK(std::set<std::pair<Pid, std::uint64_t>>(emitted.begin(), emitted.end()).size() == emitted.size());
            }
    }

    TEST_CASE("a shared tracer stays in priority mode with two priority entries")
    {
        std::size_t shared_steps = 0;
        for (std::uint64_t seed = 1; seed <= 60; ++seed)
        {
            auto r = logged_run(shared_scenario(), MonitoringMode::OutlineEA, SeedSchedule{seed});
            const auto& es = r.log.entries();
            for (std::size_t i = 0; i < es.size(); ++i)
            {
                if (es[i].kind != EntryKind::Branch || es[i].t != "instrument.p.share")
                    continue;
                ++shared_steps;
                auto st = std::find_if(es.begin() + static_cast<std::ptrdiff_t>(i), es.end(), [&](const Entry& e) {
                    return e.kind == EntryKind::State && e.actor == es[i].actor;
                });
                REQUIRE(st != es.end());
                CHECK(st->snap->mode == Mode::Priority);
                CHECK(std::count_if(st->snap->traced.begin(), st->snap->traced.end(),
                                    [](const auto& kv) { return kv.second == Mode::Priority; }) == 2);
            }
        }
        CHECK(shared_steps > 0);
    }

    TEST_CASE("forwarding keeps the original router")
    {
        std::size_t forwarded = 0;
        for (std::uint64_t seed = 1; seed <= 40; ++seed)
        {
            auto r = logged_run(chain_scenario(), MonitoringMode::OutlineEA, SeedSchedule{seed});
            std::optional<Mail> consumed;
            for (const auto& e : r.log.entries())
            {
                if (e.kind == EntryKind::Consume && e.actor && e.actor->is_tracer())
                    consumed = e.msg;
                if (e.kind == EntryKind::Send && e.t == "forwd")
                {
                    ++forwarded;
                    REQUIRE(consumed.has_value());
                    CHECK(*e.msg == *consumed);
                    CHECK(as_message(*e.msg)->routed().rtr != *e.actor);
                }
            }
        }
        CHECK(forwarded > 0);
    }

    TEST_CASE("a halted analyser does not stop the rest of the run")
    {
        RunConfig cfg;
        cfg.mode = MonitoringMode::OutlineEA;
        VerdictCollector verdicts;
        Runtime rt = build_runtime(running_example(), cfg, &verdicts);
        std::mt19937_64 rng(5);
        bool halted = false;
        while (!rt.quiescent())
        {
            if (!halted && rt.created(Pid::Kind::Analyzer) == 1)
            {
                rt.halt(A(1));
                halted = true;
            }
            const auto& en = rt.enabled();
            rt.apply(en[rng() % en.size()]);
        }
        REQUIRE(halted);
        CHECK(rt.process(A(1))->status == Status::Terminated);
        CHECK(rt.live(Pid::Kind::System) == 0);
        CHECK(verdicts.verdicts().count(MonitorKey{S(3), Signature{"R"}}) == 1);
        CHECK(verdicts.verdicts().count(MonitorKey{S(2), Signature{"Q"}}) == 1);
        CHECK(verdicts.verdicts().at(MonitorKey{S(2), Signature{"Q"}}) == Verdict::Inconclusive);
        rt.set_sink(nullptr);
    }

    TEST_CASE("property: monitoring leaves the system behaviour unchanged")
    {
        using Behaviour = std::multiset<std::pair<std::string, std::vector<std::string>>>;
        using Traffic = std::multiset<std::tuple<std::string, std::string, std::string>>;
        for (std::uint64_t seed = 1; seed <= 80; ++seed)
        {
            const auto s = random_scenario(seed);
            std::vector<Behaviour> behaviours;
            std::vector<Traffic> traffic;
            for (auto mode : {MonitoringMode::None, MonitoringMode::Inline, MonitoringMode::OutlineEA,
                              MonitoringMode::OutlineIA})
            {
                auto r = logged_run(s, mode, SeedSchedule{seed});
                CHECK(r.result.outcome.quiescent);
                CHECK(r.result.live[0] == 0);
                const auto sigs = signatures(r.log);
                // Per process: its signature and the kinds of its system actions.
                std::map<Pid, std::vector<std::string>> acts;
                Traffic sent;
                for (const auto& e : r.log.entries())
                {
                    if (!e.actor || !e.actor->is_system())
                        continue;
                    switch (e.kind)
                    {
                    case EntryKind::Spawn: acts[*e.actor].push_back("fork " + sigs.at(*e.p).name); break;
                    case EntryKind::Send:
                        acts[*e.actor].push_back("send");
                        sent.insert({sigs.at(*e.actor).name, sigs.at(*e.p).name, render(*e.msg)});
                        break;
                    case EntryKind::Consume: acts[*e.actor].push_back("recv"); break;
                    case EntryKind::Exit: acts[*e.actor].push_back("exit"); break;
                    case EntryKind::Crash: acts[*e.actor].push_back("crash"); break;
                    default: break;
                    }
                }
                Behaviour b;
                for (const auto& [p, seq] : acts)
                    b.insert({sigs.at(p).name, seq});
                behaviours.push_back(b);
                traffic.push_back(sent);
            }
            for (std::size_t i = 1; i < behaviours.size(); ++i)
            {
                CHECK(behaviours[i] == behaviours[0]);
                CHECK(traffic[i] == traffic[0]);
            }
        }
    }

    TEST_CASE("programs parse and render")
    {
        auto p = Program::parse("fork Q as q; send q; recv\nexit");
        CHECK(p.render() == "fork Q as q; send q; recv; exit");
        CHECK(p.actions() == std::vector<Action>{Action::Frk, Action::Snd, Action::Rcv, Action::Ext});
        CHECK_THROWS_AS(Program::parse("jump"), ParseError);
        CHECK_THROWS_AS(scenario_by_name("nope"), ParseError);
    }

    TEST_CASE("mutations render in kebab case")
    {
        for (auto m : kAllMutations)
            CHECK(parse_mutation(to_string(m)) == m);
        CHECK(std::string(to_string(Mutation::SkipRouteAdd)) == "skip-route-add");
    }
}
