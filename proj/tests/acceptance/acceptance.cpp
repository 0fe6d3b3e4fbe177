#include "choreo/bench/bench.hpp"
#include "choreo/core/errors.hpp"
#include "choreo/invariants/checker.hpp"
#include "choreo/invariants/exhaustive.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace choreo;

namespace
{

// Pinned limits.
constexpr double kCriterion1Seconds = 60.0;
constexpr std::uint64_t kRandomRuns = 10'000;
constexpr std::uint64_t kOracleRuns = 1'000;
constexpr std::size_t kBenchWorkers = 1'000;
constexpr std::size_t kBenchRequests = 10;
constexpr double kBenchSeconds = 300.0;
constexpr double kMinRSquared = 0.95;
constexpr std::size_t kReplayRuns = 100;

const char* const kExpectedAnalysis = "T1{P:frk,snd,ext} T2{Q:rcv,frk,ext} T3{R:ext}";
const std::vector<std::string> kFixedScenarios{"running-example", "running-example-crash", "shared"};
const std::vector<MonitoringMode> kOutline{MonitoringMode::OutlineEA, MonitoringMode::OutlineIA};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& why)
    {
        if (!ok)
        {
            pass = false;
            detail << " [" << why << "]";
        }
    }
};

int failures = 0;

void report(int id, const std::string& title, Outcome& v)
{
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " --" << v.detail.str() << "\n"
              << std::flush;
    if (!v.pass)
        ++failures;
}

/// Exhaustive summaries shared by several criteria.
struct Exhaustive
{
    std::map<std::pair<std::string, MonitoringMode>, ExhaustiveSummary> runs;
    std::map<std::pair<std::string, MonitoringMode>, double> seconds;

    const ExhaustiveSummary& get(const std::string& name, MonitoringMode mode)
    {
        auto key = std::make_pair(name, mode);
        auto it = runs.find(key);
        if (it != runs.end())
            return it->second;
        ExhaustiveOptions opts;
        opts.run.mode = mode;
        opts.stop_at_first_failure = false;
        auto t0 = Clock::now();
        auto sum = exhaustive_check(scenario_by_name(name), opts);
        seconds[key] = seconds_since(t0);
        return runs.emplace(key, std::move(sum)).first->second;
    }
} exhaustive;

/// Random-campaign totals shared by criteria 3, 4 and 6.
struct Campaign
{
    std::uint64_t runs = 0;
    std::uint64_t invariant_failures = 0;
    std::uint64_t verdict_mismatches = 0;
    std::uint64_t verdict_checked_runs = 0;
    std::uint64_t live_monitor_runs = 0;
    std::size_t max_processes = 0;
    std::set<std::string> branches;
    std::vector<std::string> first_failures;
    double seconds = 0;
} campaign;

void run_campaign()
{
    auto t0 = Clock::now();
    for (std::uint64_t seed = 1; seed <= kRandomRuns; ++seed)
    {
        const auto s = random_scenario(seed);
        campaign.max_processes = std::max(campaign.max_processes, s.programs.size());
        const bool compare = seed <= kOracleRuns;
        VerdictProfile oracle;
        if (compare)
            oracle = verdict_profile(inline_run(s, SeedSchedule{seed}));
        for (auto mode : kOutline)
        {
            RunConfig rc;
            rc.mode = mode;
            rc.record_choices = false;
            CheckOptions co;
            co.phi = std::make_shared<const CompiledPhi>(compile_phi(s.phi));
            co.variant = mode == MonitoringMode::OutlineEA ? AnalysisVariant::EA : AnalysisVariant::IA;
            InvariantChecker ck(co);
            ++campaign.runs;
            try
            {
                auto res = run_scenario(s, rc, SeedSchedule{seed}, &ck);
                ck.end_step();
                auto rep = ck.finish(true);
                campaign.branches.insert(ck.branches().begin(), ck.branches().end());
                if (!rep.ok())
                {
                    ++campaign.invariant_failures;
                    if (campaign.first_failures.size() < 3)
                        campaign.first_failures.push_back(s.name + "/" + to_string(mode));
                }
                if (compare)
                {
                    ++campaign.verdict_checked_runs;
                    if (verdict_profile(res.verdicts) != oracle)
                        ++campaign.verdict_mismatches;
                }
                if (res.live[1] != 0 || res.live[2] != 0)
                    ++campaign.live_monitor_runs;
            }
            catch (const std::exception& e)
            {
                ++campaign.invariant_failures;
                if (campaign.first_failures.size() < 3)
                    campaign.first_failures.push_back(s.name + "/" + to_string(mode) + " " + e.what());
            }
        }
    }
    campaign.seconds = seconds_since(t0);
}

void criterion1()
{
    Outcome v;
    double total = 0;
    for (auto mode : kOutline)
    {
        const auto& sum = exhaustive.get("running-example", mode);
        total += exhaustive.seconds[{"running-example", mode}];
        v.require(sum.truncated == 0, std::string(to_string(mode)) + " truncated schedules");
        v.require(sum.terminals > 0 && sum.terminals == sum.passed, std::string(to_string(mode)) + " failing end states");
        v.require(sum.analyses == std::set<std::string>{kExpectedAnalysis},
                  std::string(to_string(mode)) + " unexpected analysis summary");
        v.detail << " " << to_string(mode) << ": " << sum.states << " states, " << sum.terminals << " distinct end states";
    }
    v.require(total < kCriterion1Seconds, "over time budget");
    v.detail << "; every end state analyses " << kExpectedAnalysis << "; " << total << "s";
    report(1, "running-example order correctness", v);
}

void criterion2()
{
    Outcome v;
    const auto s = running_example();
    for (auto mode : kOutline)
    {
        const auto& sum = exhaustive.get("running-example", mode);
        const std::string m = to_string(mode);
        v.require(sum.routed_event_witness.has_value(), m + " late-instrumentation race unseen");
        v.require(sum.ext_before_rcv_witness.has_value(), m + " ext-before-rcv race unseen");
        v.require(sum.routed_event_witness_ok, m + " late-instrumentation witness fails");
        v.require(sum.ext_before_rcv_witness_ok, m + " ext-before-rcv witness fails");
        RunConfig rc;
        rc.mode = mode;
        for (int k = 0; k < 2; ++k)
        {
            const auto& w = k == 0 ? sum.routed_event_witness : sum.ext_before_rcv_witness;
            if (!w)
                continue;
            auto races = detect_races(s, rc, *w);
            v.require(k == 0 ? races.routed_event : races.ext_before_rcv, m + " witness does not realize its race");
            ExecutionLog log;
            run_scenario(s, rc, *w, &log);
            v.require(order_oracle(log).ok(), m + " order oracle fails on witness");
        }
    }
    ExhaustiveOptions mutant;
    mutant.run.mutations = {Mutation::NoPriorityMode};
    mutant.stop_at_first_failure = false;
    auto bad = exhaustive_check(s, mutant);
    v.require(bad.failed_checks.count("order") == 1, "no-priority mutant passes the order oracle");
    v.detail << " both races seen in ea and ia, order oracle passes on both witnesses; no-priority mutant fails order ("
             << bad.failed << " failing paths)";
    report(2, "race reproduction", v);
}

void criterion3()
{
    Outcome v;
    v.require(campaign.invariant_failures == 0, std::to_string(campaign.invariant_failures) + " failing random runs");
    for (const auto& f : campaign.first_failures)
        v.detail << " first failure " << f << ";";
    v.require(campaign.max_processes <= 50, "scenario larger than 50 processes");
    std::set<std::string> branches = campaign.branches;
    std::uint64_t states = 0, ends = 0;
    for (const auto& name : kFixedScenarios)
        for (auto mode : kOutline)
        {
            const auto& sum = exhaustive.get(name, mode);
            v.require(sum.ok() && sum.truncated == 0, name + "/" + to_string(mode) + " exhaustive failure");
            for (const auto& [id, n] : sum.branch_hits)
                branches.insert(id);
            states += sum.states;
            ends += sum.terminals;
        }
    std::size_t missing = 0;
    for (const auto& id : tracer_branch_ids())
        if (!branches.count(id))
        {
            ++missing;
            v.detail << " missing branch " << id << ";";
        }
    v.require(missing == 0, "branch coverage below 100%");
    v.detail << " " << campaign.runs << " random runs (" << kRandomRuns << " seeds x ea/ia, up to " << campaign.max_processes
             << " processes) in " << campaign.seconds << "s; " << ends << " end states / " << states
             << " states over 3 scenarios x 2 variants; branches " << (tracer_branch_ids().size() - missing) << "/"
             << tracer_branch_ids().size();
    report(3, "invariant suite", v);
}

void criterion4()
{
    Outcome v;
    std::size_t schedules = 0;
    for (const auto& name : kFixedScenarios)
    {
        const auto s = scenario_by_name(name);
        std::set<VerdictMap> inline_verdicts;
        RunConfig rc;
        rc.mode = MonitoringMode::Inline;
        enumerate_schedules(s, rc, EnumerationOptions{}, [&](const StepSchedule& sch, bool truncated) {
            v.require(!truncated, name + " inline enumeration truncated");
            inline_verdicts.insert(inline_run(s, sch));
            ++schedules;
            return true;
        });
        for (auto mode : kOutline)
        {
            const auto& sum = exhaustive.get(name, mode);
            v.require(sum.failed_checks.count("verdicts") == 0, name + "/" + to_string(mode) + " verdict check fails");
            v.require(sum.verdicts == inline_verdicts, name + "/" + to_string(mode) + " verdict sets differ");
        }
    }
    v.require(campaign.verdict_mismatches == 0, std::to_string(campaign.verdict_mismatches) + " random mismatches");
    v.detail << " " << schedules << " inline schedules; per-end-state verdict check on every enumerated outline state; "
             << campaign.verdict_checked_runs << " random runs compared, " << campaign.verdict_mismatches << " mismatches";
    report(4, "oracle equivalence", v);
}

void criterion5()
{
    Outcome v;
    std::size_t caught = 0;
    for (auto m : kAllMutations)
    {
        ExhaustiveOptions opts;
        opts.run.mutations = {m};
        opts.stop_at_first_failure = false;
        auto sum = exhaustive_check(running_example(), opts);
        const bool detected = !sum.ok();
        caught += detected;
        v.require(detected, std::string(to_string(m)) + " undetected");
        v.detail << " " << to_string(m) << ":";
        for (const auto& id : sum.failed_checks)
            v.detail << id << (id == *sum.failed_checks.rbegin() ? "" : ",");
        v.detail << ";";
    }
    v.detail << " " << caught << "/" << kAllMutations.size() << " caught";
    report(5, "fault-injection sensitivity", v);
}

void criterion6()
{
    Outcome v;
    for (const auto& name : kFixedScenarios)
        for (auto mode : kOutline)
        {
            const auto& sum = exhaustive.get(name, mode);
            v.require(sum.live_monitors_at_end == 0, name + "/" + to_string(mode) + " live monitors at an end state");
            v.require(sum.failed_checks.count("gc") == 0, name + "/" + to_string(mode) + " gc check fails");
        }
    v.require(campaign.live_monitor_runs == 0, std::to_string(campaign.live_monitor_runs) + " random runs leak monitors");
    v.detail << " 0 live tracers/analysers at every enumerated end state and after " << campaign.runs
             << " random runs; created = collected";
    report(6, "gc completeness", v);
}

void criterion7()
{
    Outcome v;
    auto t0 = Clock::now();
    const double nr = static_cast<double>(kBenchWorkers * kBenchRequests);
    for (auto profile : {LoadProfile::Steady, LoadProfile::Pulse, LoadProfile::Burst})
        for (auto mode : {MonitoringMode::None, MonitoringMode::Inline, MonitoringMode::OutlineEA, MonitoringMode::OutlineIA})
        {
            BenchConfig cfg;
            cfg.workers = kBenchWorkers;
            cfg.requests = kBenchRequests;
            cfg.profile = profile;
            cfg.mode = mode;
            const std::string tag = std::string(to_string(profile)) + "/" + to_string(mode);
            try
            {
                auto m = measure(cfg, 1);
                v.require(m.replies == nr, tag + " replies != n*r");
                if (mode == MonitoringMode::None)
                    v.require(m.messages_total == 2 * nr, tag + " message count");
                else
                    v.require(m.events_total == 2 * nr, tag + " events_total != 2nr");
                if (is_outline(mode))
                    v.require(m.tracers_created == m.tracers_collected, tag + " tracers not collected");
            }
            catch (const std::exception& e)
            {
                v.require(false, tag + " " + e.what());
            }
        }
    const double secs = seconds_since(t0);
    v.require(secs < kBenchSeconds, "over time budget");
    v.detail << " n=" << kBenchWorkers << " r=" << kBenchRequests << ", 3 profiles x 4 modes: replies = " << nr
             << ", events_total = " << 2 * nr << " when monitored; " << secs << "s";
    report(7, "desk-scale benchmark", v);
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (syy == 0)
        return 1.0;
    return sxy * sxy / (sxx * syy);
}

void criterion8()
{
    Outcome v;
    std::vector<double> xs;
    for (std::size_t n = 100; n <= 1000; n += 100)
        xs.push_back(static_cast<double>(n));
    std::map<MonitoringMode, std::vector<double>> messages;
    for (auto mode : {MonitoringMode::None, MonitoringMode::Inline, MonitoringMode::OutlineEA, MonitoringMode::OutlineIA})
    {
        std::vector<double> dur, msg;
        for (double n : xs)
        {
            BenchConfig cfg;
            cfg.workers = static_cast<std::size_t>(n);
            cfg.requests = 10;
            cfg.profile = LoadProfile::Steady;
            cfg.mode = mode;
            auto m = measure(cfg, 1);
            dur.push_back(m.duration);
            msg.push_back(m.messages_total);
        }
        const double rd = r_squared(xs, dur), rm = r_squared(xs, msg);
        v.require(rd >= kMinRSquared, std::string(to_string(mode)) + " duration not linear");
        v.require(rm >= kMinRSquared, std::string(to_string(mode)) + " messages not linear");
        v.detail << " " << to_string(mode) << " R2(duration)=" << rd << " R2(messages)=" << rm << ";";
        messages[mode] = msg;
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        v.require(messages[MonitoringMode::OutlineIA][i] < messages[MonitoringMode::OutlineEA][i],
                  "ia >= ea messages at n=" + std::to_string(static_cast<int>(xs[i])));
    v.detail << " ia < ea messages at all 10 points";
    report(8, "trend check", v);
}

void criterion9()
{
    Outcome v;
    std::size_t identical = 0;
    const std::vector<MonitoringMode> modes{MonitoringMode::OutlineEA, MonitoringMode::OutlineIA, MonitoringMode::Inline,
                                            MonitoringMode::None};
    for (std::size_t k = 0; k < kReplayRuns; ++k)
    {
        const std::uint64_t seed = 7919 * (k + 1);
        const auto s = random_scenario(seed);
        RunConfig rc;
        rc.mode = modes[k % modes.size()];
        ExecutionLog first, second;
        auto res = run_scenario(s, rc, SeedSchedule{seed}, &first);
        run_scenario(s, rc, StepSchedule{res.outcome.realized}, &second);
        const bool same = first.text() == second.text();
        identical += same;
        v.require(same, s.name + " replay differs");
    }
    // Failing cases: every mutant counterexample replays to the same report.
    std::size_t reproduced = 0;
    for (auto m : kAllMutations)
    {
        ExhaustiveOptions opts;
        opts.run.mutations = {m};
        auto sum = exhaustive_check(running_example(), opts);
        if (!sum.counterexample)
            continue;
        CheckOptions co;
        co.phi = std::make_shared<const CompiledPhi>(compile_phi(running_example().phi));
        co.variant = AnalysisVariant::EA;
        InvariantChecker ck(co);
        Runtime rt = build_runtime(running_example(), opts.run, &ck);
        bool threw = false;
        try
        {
            for (const auto& c : sum.counterexample->schedule.steps)
                rt.apply(c);
        }
        catch (const Error&)
        {
            threw = true;
        }
        ck.end_step();
        auto rep = ck.finish(rt.quiescent());
        rt.set_sink(nullptr);
        const bool same = threw == !sum.counterexample->detail.empty() &&
                          (threw || rep.failing() == sum.counterexample->report.failing());
        reproduced += same;
        v.require(same, std::string(to_string(m)) + " counterexample does not reproduce");
    }
    v.detail << " " << identical << "/" << kReplayRuns << " replayed logs byte-identical; " << reproduced << "/"
             << kAllMutations.size() << " mutant counterexamples reproduce";
    report(9, "determinism", v);
}

} // namespace

int main()
{
    std::cout << std::boolalpha;
    const auto t0 = Clock::now();
    criterion1();
    criterion2();
    run_campaign();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << " ("
              << seconds_since(t0) << "s)\n";
    return failures == 0 ? 0 : 1;
}
