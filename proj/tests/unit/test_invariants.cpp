#include "choreo/core/errors.hpp"
#include "choreo/invariants/exhaustive.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace choreo;
using namespace choreo::test;

namespace
{

Entry emit(std::uint64_t step, const TraceEvent& e)
{
    return Entry{step, e.src, EntryKind::Emit, T(1), std::nullopt, {}, std::nullopt, Mail{Message{e}}};
}

Entry analyse(std::uint64_t step, const TraceEvent& e)
{
    return Entry{step, T(1), EntryKind::Analyse, std::nullopt, std::nullopt, {}, std::nullopt, Mail{Message{e}}};
}

CheckOptions with_phi(const Scenario& s)
{
    CheckOptions o;
    o.phi = std::make_shared<const CompiledPhi>(compile_phi(s.phi));
    return o;
}

} // namespace

TEST_SUITE("invariants")
{
    TEST_CASE("report ids are the numbered checks plus order, gc and verdicts")
    {
        const auto& ids = report_ids();
        REQUIRE(ids.size() == 29);
        CHECK(ids.front() == "l01");
        CHECK(ids[25] == "l26");
        CHECK(std::vector<std::string>(ids.end() - 3, ids.end()) == std::vector<std::string>{"order", "gc", "verdicts"});
    }

    TEST_CASE("a canonical external-analysis run passes every check")
    {
        auto r = logged_run(running_example(), MonitoringMode::OutlineEA, SeedSchedule{1});
        auto rep = check_invariants(r.log, with_phi(running_example()));
        CHECK(rep.ok());
        for (const auto& id : report_ids())
            CHECK_MESSAGE(rep.get(id).status == CheckStatus::Pass, id);
    }

    TEST_CASE("a canonical internal-analysis run passes and skips the analyser check")
    {
        auto r = logged_run(running_example(), MonitoringMode::OutlineIA, SeedSchedule{1});
        auto rep = check_invariants(r.log, with_phi(running_example()));
        CHECK(rep.ok());
        for (const auto& id : report_ids())
            CHECK_MESSAGE(rep.get(id).status == (id == "l21" ? CheckStatus::NotApplicable : CheckStatus::Pass), id);
    }

    TEST_CASE("an unmonitored run makes every check not applicable")
    {
        auto r = logged_run(running_example(), MonitoringMode::None, SeedSchedule{1});
        auto rep = check_invariants(r.log);
        CHECK(rep.ok());
        for (const auto& res : rep.results)
            CHECK_MESSAGE(res.status == CheckStatus::NotApplicable, res.id);
    }

    TEST_CASE("a monitored log without snapshots is incomplete")
    {
        RunConfig cfg;
        cfg.snapshots = false;
        ExecutionLog log;
        describe(log, running_example(), cfg, SeedSchedule{1});
        run_scenario(running_example(), cfg, SeedSchedule{1}, &log);
        CHECK_THROWS_AS(check_invariants(log), LogIncomplete);
        CheckOptions lenient;
        lenient.require_snapshots = false;
        CHECK(check_invariants(log, lenient).ok());
    }

    TEST_CASE("skipping the route deletion is caught with a replayable counterexample")
    {
        ExhaustiveOptions opts;
        opts.run.mutations = {Mutation::SkipRouteDeletion};
        auto sum = exhaustive_check(running_example(), opts);
        CHECK_FALSE(sum.ok());
        CHECK(sum.failed_checks.count("l09") == 1);
        REQUIRE(sum.counterexample.has_value());
        CHECK(sum.counterexample->report.get("l09").status == CheckStatus::Fail);

        // The schedule is a prefix; replaying it reproduces the violation.
        struct Sink : LogSink
        {
            InvariantChecker ck;
            void record(const Entry& e) override { ck.record(e); }
        } sink;
        RunConfig cfg;
        cfg.mutations = opts.run.mutations;
        Runtime rt = build_runtime(running_example(), cfg, &sink);
        for (const auto& c : sum.counterexample->schedule.steps)
            rt.apply(c);
        sink.ck.end_step();
        CHECK(sink.ck.finish(false).get("l09").status == CheckStatus::Fail);
        rt.set_sink(nullptr);
    }

    TEST_CASE("the failing report line names the schedule")
    {
        auto r = logged_run(running_example(), MonitoringMode::OutlineEA, SeedSchedule{2}, {Mutation::NoGc});
        auto rep = check_invariants(r.log, with_phi(running_example()));
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.failing() == std::vector<std::string>{"gc"});
        CHECK(rep.render().find("gc FAIL sched=seed:2") != std::string::npos);
    }

    TEST_CASE("order oracle accepts matching orders and pinpoints divergences")
    {
        const auto a = mk_event(Action::Rcv, S(2), std::nullopt, std::nullopt, 0);
        const auto b = mk_event(Action::Frk, S(2), S(3), Signature{"R"}, 1);
        const auto c = mk_event(Action::Ext, S(2), std::nullopt, std::nullopt, 2);

        ExecutionLog good;
        for (const auto& e : {emit(1, a), emit(2, b), emit(3, c), analyse(4, a), analyse(5, b), analyse(6, c)})
            good.record(e);
        auto ok = order_oracle(good);
        CHECK(ok.ok());
        CHECK(ok.emitted.at(S(2)).size() == 3);

        ExecutionLog bad;
        for (const auto& e : {emit(1, a), emit(2, b), emit(3, c), analyse(4, a), analyse(5, c), analyse(6, b)})
            bad.record(e);
        auto rep = order_oracle(bad);
        REQUIRE(rep.divergences.size() == 1);
        CHECK(rep.divergences[0].process == S(2));
        CHECK(rep.divergences[0].index == 1);
        CHECK(rep.divergences[0].expected == b);
        CHECK(rep.divergences[0].got == c);

        ExecutionLog missing;
        for (const auto& e : {emit(1, a), emit(2, b), analyse(4, a)})
            missing.record(e);
        auto m = order_oracle(missing);
        REQUIRE(m.divergences.size() == 1);
        CHECK(m.divergences[0].index == 1);
        CHECK_FALSE(m.divergences[0].got.has_value());
    }

    TEST_CASE("property: random systems pass every check in both analysis variants")
    {
        for (auto mode : {MonitoringMode::OutlineEA, MonitoringMode::OutlineIA})
            for (std::uint64_t seed = 1; seed <= 300; ++seed)
            {
                auto s = random_scenario(seed);
                auto r = logged_run(s, mode, SeedSchedule{seed + 1000});
                auto rep = check_invariants(r.log, with_phi(s));
                CHECK_MESSAGE(rep.ok(), s.name, " ", rep.render());
                CHECK(order_oracle(r.log).ok());
                CHECK(verdict_profile(r.result.verdicts) == verdict_profile(inline_run(s, SeedSchedule{seed + 1000})));
            }
    }

    TEST_CASE("the incremental checker agrees with the offline check")
    {
        for (std::uint64_t seed = 1; seed <= 40; ++seed)
        {
            auto s = random_scenario(seed);
            auto r = logged_run(s, MonitoringMode::OutlineEA, SeedSchedule{seed});
            InvariantChecker ck(with_phi(s));
            for (const auto& e : r.log.entries())
                ck.record(e);
            ck.end_step();
            CHECK(ck.finish(true).render() == check_invariants(r.log, with_phi(s)).render());
        }
    }

    TEST_CASE("exhaustive exploration of the running example passes")
    {
        ExhaustiveOptions opts;
        opts.run.mode = MonitoringMode::OutlineIA;
        auto sum = exhaustive_check(running_example(), opts);
        CHECK(sum.ok());
        CHECK(sum.truncated == 0);
        CHECK(sum.terminals == sum.passed);
        CHECK(sum.analyses == std::set<std::string>{"T1{P:frk,snd,ext} T2{Q:rcv,frk,ext} T3{R:ext}"});
        CHECK(sum.live_monitors_at_end == 0);
        CHECK(sum.routed_event_witness_ok);
        CHECK(sum.ext_before_rcv_witness_ok);
    }

    TEST_CASE("the state guard stops oversized explorations")
    {
        ExhaustiveOptions opts;
        opts.state_guard = 100;
        CHECK_THROWS_AS(exhaustive_check(running_example(), opts), ExplosionGuard);
    }
}
