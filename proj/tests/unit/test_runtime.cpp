#include "choreo/core/errors.hpp"
#include "choreo/runtime/explore.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace choreo;
using namespace choreo::test;

namespace
{

Scenario scripted(std::initializer_list<std::pair<const char*, const char*>> progs)
{
    Scenario s;
    s.name = "scripted";
    for (const auto& [sig, text] : progs)
        s.programs[Signature{sig}] = std::make_shared<const Program>(Program::parse(text));
    return s;
}

Runtime raw_runtime(const Scenario& s, RuntimeOptions opts = {})
{
    return Runtime(make_factory(s), opts);
}

/// Sends a fixed list of messages to `to`, one per step.
class Sender : public Behavior
{
  public:
    Sender(Pid to, std::vector<Mail> mails) : to_(to), mails_(std::move(mails)) {}
    bool ready(const Mailbox&) const override { return next_ <= mails_.size(); }
    void step(ProcessContext& ctx) override
    {
        if (next_ == mails_.size())
            ctx.terminate();
        else
            ctx.send(to_, mails_[next_]);
        ++next_;
    }
    std::unique_ptr<Behavior> clone() const override { return std::make_unique<Sender>(*this); }
    void fingerprint(std::string& out) const override { out += std::to_string(next_); }

  private:
    Pid to_;
    std::vector<Mail> mails_;
    std::size_t next_ = 0;
};

/// Takes one routed message out of the mailbox once one is present.
class RoutedTaker : public Behavior
{
  public:
    bool ready(const Mailbox& mb) const override
    {
        return !done_ && std::any_of(mb.begin(), mb.end(), [](const Mail& m) { return is_routed(m); });
    }
    void step(ProcessContext& ctx) override
    {
        taken = ctx.receive_matching([](const Mail& m) { return is_routed(m); });
        done_ = true;
    }
    std::unique_ptr<Behavior> clone() const override { return std::make_unique<RoutedTaker>(*this); }
    void fingerprint(std::string& out) const override { out += done_ ? "d" : "w"; }

    std::optional<Mail> taken;

  private:
    bool done_ = false;
};

/// Never finishes.
class Spinner : public Behavior
{
  public:
    bool ready(const Mailbox&) const override { return true; }
    void step(ProcessContext&) override {}
    std::unique_ptr<Behavior> clone() const override { return std::make_unique<Spinner>(*this); }
    void fingerprint(std::string&) const override {}
};

Mail evt_mail(std::uint64_t seq)
{
    return Message{mk_event(Action::Ext, S(9), std::nullopt, std::nullopt, seq)};
}

Mail rtd_mail()
{
    return Message{wrap_routed(Message{mk_event(Action::Rcv, S(9), std::nullopt, std::nullopt, 0)}, T(7))};
}

std::vector<std::int64_t> consumed_values(const ExecutionLog& log, Pid who)
{
    std::vector<std::int64_t> out;
    for (const auto& e : log.entries())
        if (e.kind == EntryKind::Consume && e.actor == who && e.msg)
            if (auto* m = std::get_if<SystemMessage>(&*e.msg))
                out.push_back(m->value);
    return out;
}

} // namespace

TEST_SUITE("runtime")
{
    TEST_CASE("paused processes are not schedulable")
    {
        auto s = scripted({{"P", "exit"}});
        auto rt = raw_runtime(s);
        Pid p = rt.spawn_system(Signature{"P"}, true);
        CHECK(rt.process(p)->status == Status::Paused);
        CHECK(rt.enabled().empty());
        CHECK(rt.quiescent());
        Pid q = rt.spawn_system(Signature{"P"}, false);
        CHECK(rt.enabled() == std::vector<Choice>{Choice::run(q)});
    }

    TEST_CASE("spawned processes get distinct pids numbered per kind")
    {
        auto s = scripted({{"P", "exit"}});
        auto rt = raw_runtime(s);
        std::set<Pid> seen;
        for (int i = 0; i < 5; ++i)
            seen.insert(rt.spawn_system(Signature{"P"}, true));
        seen.insert(rt.spawn(std::make_unique<Spinner>(), Pid::Kind::Tracer, "tracer", true));
        CHECK(seen.size() == 6);
        CHECK(seen.count(S(5)) == 1);
        CHECK(seen.count(T(1)) == 1);
        CHECK(rt.created(Pid::Kind::System) == 5);
        CHECK(rt.created(Pid::Kind::Tracer) == 1);
    }

    TEST_CASE("property: messages between one pair arrive in send order")
    {
        auto s = scripted({{"P", "fork Q as q; send q; send q; send q; send q; exit"}, {"Q", "recv; recv; recv; recv"}});
        s.initial = {Signature{"P"}};
        RunConfig cfg;
        cfg.mode = MonitoringMode::None;
        for (std::uint64_t seed = 1; seed <= 200; ++seed)
        {
            ExecutionLog log;
            run_scenario(s, cfg, SeedSchedule{seed}, &log);
            CHECK(consumed_values(log, S(2)) == std::vector<std::int64_t>{1, 2, 3, 4});
        }
    }

    TEST_CASE("messages from different senders interleave both ways")
    {
        auto s = scripted({{"R", "fork A as a; fork B as b; recv; recv"}, {"A", "send parent"}, {"B", "send parent"}});
        s.initial = {Signature{"R"}};
        RunConfig cfg;
        cfg.mode = MonitoringMode::None;
        std::set<std::vector<Pid>> orders;
        for (std::uint64_t seed = 1; seed <= 100; ++seed)
        {
            ExecutionLog log;
            run_scenario(s, cfg, SeedSchedule{seed}, &log);
            std::vector<Pid> senders;
            for (const auto& e : log.entries())
                if (e.kind == EntryKind::Deliver && e.actor == S(1))
                    senders.push_back(*e.p);
            orders.insert(senders);
        }
        CHECK(orders == std::set<std::vector<Pid>>{{S(2), S(3)}, {S(3), S(2)}});
    }

    TEST_CASE("selective receive takes the routed message and keeps the rest in order")
    {
        Runtime rt(make_factory(Scenario{}));
        auto taker = std::make_unique<RoutedTaker>();
        Pid r = rt.spawn(std::move(taker), Pid::Kind::Tracer, "taker");
        rt.spawn(std::make_unique<Sender>(r, std::vector<Mail>{evt_mail(0), rtd_mail(), evt_mail(1)}),
                 Pid::Kind::Tracer, "sender");
        // Deliver everything before the taker may run.
        while (!rt.quiescent())
        {
            Choice next = rt.enabled().front();
            for (const auto& c : rt.enabled())
                if (c.kind != Choice::Kind::Run || c.a != r)
                {
                    next = c;
                    break;
                }
            rt.apply(next);
        }
        const auto* rec = rt.process(r);
        REQUIRE(rec->mailbox.size() == 2);
        CHECK(rec->mailbox[0] == evt_mail(0));
        CHECK(rec->mailbox[1] == evt_mail(1));
    }

    TEST_CASE("selective receive blocks until a matching message arrives")
    {
        Runtime rt(make_factory(Scenario{}));
        Pid r = rt.spawn(std::make_unique<RoutedTaker>(), Pid::Kind::Tracer, "taker");
        rt.spawn(std::make_unique<Sender>(r, std::vector<Mail>{evt_mail(0), evt_mail(1)}), Pid::Kind::Tracer,
                 "sender");
        run(rt, SeedSchedule{3});
        const auto* rec = rt.process(r);
        CHECK(rec->status == Status::Blocked);
        CHECK(rec->mailbox.size() == 2);
    }

    TEST_CASE("an empty system is immediately quiescent")
    {
        Runtime rt(make_factory(Scenario{}));
        auto out = run(rt, SeedSchedule{1});
        CHECK(out.quiescent);
        CHECK(out.realized.empty());
        CHECK(rt.steps() == 0);
    }

    TEST_CASE("the same seed reproduces the same log")
    {
        auto a = logged_run(running_example(), MonitoringMode::OutlineEA, SeedSchedule{42});
        auto b = logged_run(running_example(), MonitoringMode::OutlineEA, SeedSchedule{42});
        CHECK(a.log.text() == b.log.text());
    }

    TEST_CASE("replaying the realized choices reproduces the log")
    {
        for (std::uint64_t seed : {1u, 2u, 77u})
        {
            auto a = logged_run(running_example(), MonitoringMode::OutlineIA, SeedSchedule{seed});
            auto b = logged_run(running_example(), MonitoringMode::OutlineIA, StepSchedule{a.result.outcome.realized});
            CHECK(a.log.entries() == b.log.entries());
        }
    }

    TEST_CASE("independent processes yield every interleaving")
    {
        auto s = scripted({{"P", "exit"}});
        for (std::size_t n : {2u, 3u})
        {
            auto rt = raw_runtime(s);
            for (std::size_t i = 0; i < n; ++i)
                rt.spawn_system(Signature{"P"}, false);
            std::set<std::vector<Choice>> all;
            auto count = enumerate_schedules(rt, EnumerationOptions{}, [&](const StepSchedule& sch, bool truncated) {
                CHECK_FALSE(truncated);
                all.insert(sch.steps);
                return true;
            });
            CHECK(count == (n == 2 ? 2u : 6u));
            CHECK(all.size() == count);
        }
    }

    TEST_CASE("the step cap stops a divergent run")
    {
        RuntimeOptions opts;
        opts.step_cap = 100;
        Runtime rt(make_factory(Scenario{}), opts);
        rt.spawn(std::make_unique<Spinner>(), Pid::Kind::Tracer, "spin");
        CHECK_THROWS_AS(run(rt, SeedSchedule{1}), StepCapExceeded);
        CHECK(rt.steps() == 100);
    }

    TEST_CASE("explicit schedules must be enabled and complete")
    {
        auto s = scripted({{"P", "tick; exit"}});
        auto rt = raw_runtime(s);
        Pid p = rt.spawn_system(Signature{"P"}, false);
        CHECK_THROWS_AS(rt.apply(Choice::run(S(9))), InvalidChoice);
        auto copy = rt;
        CHECK_THROWS_AS(run(copy, StepSchedule{{Choice::run(p)}}), ScheduleExhausted);
        CHECK(run(rt, StepSchedule{{Choice::run(p), Choice::run(p)}}).quiescent);
    }

    TEST_CASE("choices and schedules round-trip through text")
    {
        for (const auto& c : {Choice::run(S(1)), Choice::deliver(S(1), T(2)), Choice::trace(T(3))})
            CHECK(parse_choice(to_string(c)) == c);
        Schedule sch = StepSchedule{{Choice::run(S(1)), Choice::deliver(S(1), S(2)), Choice::trace(T(1))}};
        CHECK(to_string(sch) == "steps:[S1,S1>S2,trace>T1]");
        CHECK(parse_schedule(to_string(sch)) == sch);
        CHECK(parse_schedule("seed:12") == Schedule{SeedSchedule{12}});
        CHECK_THROWS_AS(parse_schedule("bogus"), ParseError);
    }

    TEST_CASE("log entries round-trip through text")
    {
        auto a = logged_run(running_example(), MonitoringMode::OutlineEA, SeedSchedule{5});
        std::istringstream in(a.log.text());
        auto back = ExecutionLog::read(in);
        CHECK(back.entries() == a.log.entries());
        CHECK(back.header == a.log.header);
    }
}
