#include "choreo/analysis/monitor_file.hpp"
#include "choreo/bench/bench.hpp"
#include "choreo/core/errors.hpp"
#include "choreo/invariants/checker.hpp"
#include "choreo/invariants/exhaustive.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <limits>
#include <iostream>

using namespace choreo;

namespace
{

enum Exit : int
{
    kOk = 0,
    kFailed = 1,
    kUsage = 2,
    kGuard = 3,
};

struct Options
{
    std::string scenario = "running-example";
    std::string mode = "ea";
    std::uint64_t seed = 1;
    std::string schedule;
    std::string phi;
    std::string log;
    std::string out;
    std::vector<std::string> mutants;
    std::size_t reps = 1;
    std::size_t depth_cap = 10'000;
    bool force = false;
    bool no_snapshots = false;
    std::size_t workers = 100;
    std::size_t requests = 10;
    std::string profile = "steady";
    std::size_t loading_steps = 100;
    std::size_t bursts = 5;
    bool monitor_master = false;
};

class UsageError : public Error
{
  public:
    using Error::Error;
};

MonitoringMode mode_of(const Options& o)
{
    auto m = parse_monitoring_mode(o.mode);
    if (!m)
        throw UsageError("unknown mode '" + o.mode + "' (none|inline|ea|ia)");
    return *m;
}

MutationSet mutations_of(const Options& o)
{
    MutationSet set;
    for (const auto& name : o.mutants)
    {
        auto m = parse_mutation(name);
        if (!m)
            throw UsageError("unknown mutation '" + name + "'");
        set.set(*m);
    }
    return set;
}

Phi load_phi(const std::string& path)
{
    Phi phi;
    for (auto& spec : load_monitor_file(path))
    {
        const auto target = spec.target;
        phi[target] = std::make_shared<const MonitorSpec>(std::move(spec));
    }
    return phi;
}

Scenario scenario_of(const Options& o)
{
    Scenario s = scenario_by_name(o.scenario);
    if (!o.phi.empty())
        s.phi = load_phi(o.phi);
    return s;
}

RunConfig run_config(const Options& o)
{
    RunConfig rc;
    rc.mode = mode_of(o);
    rc.mutations = mutations_of(o);
    rc.snapshots = !o.no_snapshots;
    return rc;
}

Schedule schedule_of(const Options& o)
{
    if (!o.schedule.empty())
        return parse_schedule(o.schedule);
    return SeedSchedule{o.seed};
}

void print_verdicts(std::ostream& out, const VerdictMap& v)
{
    for (const auto& [k, verdict] : v)
        out << "verdict " << to_string(k) << " " << to_string(verdict) << "\n";
}

int cmd_run(const Options& o)
{
    const Scenario s = scenario_of(o);
    const RunConfig rc = run_config(o);
    const Schedule sched = schedule_of(o);
    ExecutionLog log;
    describe(log, s, rc, sched);
    if (!o.phi.empty())
        log.header.emplace_back("phi", o.phi);
    const auto res = run_scenario(s, rc, sched, &log);
    if (o.log.empty())
        log.write(std::cout);
    else
    {
        std::ofstream f(o.log);
        if (!f)
            throw UsageError("cannot write " + o.log);
        log.write(f);
        std::cout << "steps " << res.steps << "\n";
        std::cout << "schedule " << to_string(Schedule{StepSchedule{res.outcome.realized}}) << "\n";
        print_verdicts(std::cout, res.verdicts);
    }
    return kOk;
}

bool report_order(std::ostream& out, const OrderReport& order)
{
    for (const auto& d : order.divergences)
    {
        out << "order divergence " << to_string(d.process) << " at " << d.index << ": expected "
            << (d.expected ? to_string(d.expected->act) : "nothing") << " got "
            << (d.got ? to_string(d.got->act) : "nothing") << "\n";
    }
    return order.ok();
}

int check_saved_log(const Options& o)
{
    std::ifstream f(o.log);
    if (!f)
        throw UsageError("cannot read " + o.log);
    const ExecutionLog log = ExecutionLog::read(f);
    CheckOptions co;
    if (!o.phi.empty())
        co.phi = std::make_shared<const CompiledPhi>(compile_phi(load_phi(o.phi)));
    else if (auto path = log.header_value("phi"))
        co.phi = std::make_shared<const CompiledPhi>(compile_phi(load_phi(*path)));
    else if (auto name = log.header_value("scenario"))
    {
        try
        {
            co.phi = std::make_shared<const CompiledPhi>(compile_phi(scenario_by_name(*name).phi));
        }
        catch (const Error&)
        {
        }
    }
    const auto report = check_invariants(log, co);
    std::cout << report.render();
    const bool order_ok = report_order(std::cout, order_oracle(log));
    const bool ok = report.ok() && order_ok;
    std::cout << (ok ? "log passes\n" : "log FAILS\n");
    return ok ? kOk : kFailed;
}

int cmd_check(const Options& o)
{
    if (!o.log.empty())
        return check_saved_log(o);
    const Scenario s = scenario_of(o);
    const RunConfig rc = run_config(o);
    if (!is_outline(rc.mode))
        throw UsageError("check runs outline modes only (ea|ia)");
    const auto compiled = std::make_shared<const CompiledPhi>(compile_phi(s.phi));
    std::size_t failures = 0;
    const std::size_t runs = o.schedule.empty() ? std::max<std::size_t>(o.reps, 1) : 1;
    for (std::size_t k = 0; k < runs; ++k)
    {
        const Schedule sched = o.schedule.empty() ? Schedule{SeedSchedule{o.seed + k}} : parse_schedule(o.schedule);
        ExecutionLog log;
        describe(log, s, rc, sched);
        const auto res = run_scenario(s, rc, sched, &log);
        CheckOptions co;
        co.phi = compiled;
        co.require_snapshots = rc.snapshots;
        auto report = check_invariants(log, co);
        const auto order = order_oracle(log);
        const auto oracle = inline_run(s, sched);
        const bool equal = verdict_profile(oracle) == verdict_profile(res.verdicts);
        const bool ok = report.ok() && order.ok() && equal;
        std::cout << to_string(sched) << " " << (ok ? "PASS" : "FAIL") << "\n";
        if (!ok)
        {
            ++failures;
            report.schedule = Schedule{StepSchedule{res.outcome.realized}};
            std::cout << report.render();
            report_order(std::cout, order);
            if (!equal)
            {
                std::cout << "inline verdicts differ\n";
                print_verdicts(std::cout, oracle);
            }
        }
    }
    std::cout << (failures ? std::to_string(failures) + " failing run(s)\n" : "all runs pass\n");
    return failures ? kFailed : kOk;
}

int cmd_enumerate(const Options& o)
{
    ExhaustiveOptions eo;
    eo.run = run_config(o);
    if (!is_outline(eo.run.mode))
        throw UsageError("enumerate runs outline modes only (ea|ia)");
    eo.depth_cap = o.depth_cap;
    eo.force = o.force;
    const auto sum = exhaustive_check(scenario_of(o), eo);
    std::cout << render(sum);
    if (sum.ok() && sum.truncated == 0)
    {
        std::cout << "all schedules pass\n";
        return kOk;
    }
    if (sum.ok())
    {
        std::cout << "depth cap reached on " << sum.truncated << " path(s)\n";
        return kGuard;
    }
    return kFailed;
}

int cmd_bench(const Options& o)
{
    BenchConfig base;
    base.requests = o.requests;
    auto profile = parse_load_profile(o.profile);
    if (!profile)
        throw UsageError("unknown profile '" + o.profile + "' (steady|pulse|burst)");
    base.profile = *profile;
    base.loading_steps = o.loading_steps;
    base.mode = mode_of(o);
    base.seed = o.seed;
    base.repetitions = o.reps;
    base.bursts = o.bursts;
    base.monitor_master = o.monitor_master;
    if (o.force)
        base.step_cap = std::numeric_limits<std::uint64_t>::max();
    if (!o.phi.empty())
        base.phi = load_phi(o.phi);

    std::ofstream file;
    if (!o.out.empty())
    {
        file.open(o.out);
        if (!file)
            throw UsageError("cannot write " + o.out);
    }
    std::ostream& out = o.out.empty() ? std::cout : file;
    write_csv_header(out);
    for (auto n : load_steps(o.workers))
    {
        BenchRow row{base, {}};
        row.config.workers = n;
        row.metrics = run_bench(row.config);
        write_csv_row(out, row);
        if (!o.out.empty())
            std::cout << "n=" << n << " duration=" << row.metrics.duration
                      << " messages=" << row.metrics.messages_total << " replies=" << row.metrics.replies << "\n";
        if (row.metrics.replies != static_cast<double>(n * o.requests))
        {
            std::cerr << "conservation violated at n=" << n << "\n";
            return kFailed;
        }
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Outline monitoring choreography: runs, checks, exhaustive verification and benchmarks"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--scenario", o.scenario, "running-example | running-example-crash | chain | shared | random:<seed>");
        c->add_option("--mode", o.mode, "none | inline | ea | ia");
        c->add_option("--phi", o.phi, "Monitor file replacing the scenario's instrumentation map");
        c->add_option("--mutant", o.mutants, "Protocol mutation to inject")->group("");
    };

    auto* run = app.add_subcommand("run", "Run one scenario and emit its execution log");
    add_common(run);
    run->add_option("--seed", o.seed, "Seed of the random scheduler");
    run->add_option("--schedule", o.schedule, "Explicit schedule (seed:N or steps:[...])");
    run->add_option("--log", o.log, "Write the log to a file instead of stdout");
    run->add_flag("--no-snapshots", o.no_snapshots, "Omit tracer state snapshots");

    auto* check = app.add_subcommand("check", "Check invariants, analysis order and verdicts");
    add_common(check);
    check->add_option("--seed", o.seed, "First seed");
    check->add_option("--reps", o.reps, "Number of seeded runs");
    check->add_option("--schedule", o.schedule, "Check one explicit schedule");
    check->add_option("--log", o.log, "Check a saved execution log instead of running");

    auto* enumerate = app.add_subcommand("enumerate", "Explore every schedule of a small scenario");
    add_common(enumerate);
    enumerate->add_option("--depth-cap", o.depth_cap, "Maximum schedule length");
    enumerate->add_flag("--force", o.force, "Ignore the state-count guard");

    auto* bench = app.add_subcommand("bench", "Master-worker benchmark over ten load steps, CSV out");
    bench->add_option("--workers", o.workers, "Workers at the last load step")->check(CLI::PositiveNumber);
    bench->add_option("--requests", o.requests, "Requests per worker")->check(CLI::PositiveNumber);
    bench->add_option("--profile", o.profile, "steady | pulse | burst");
    bench->add_option("--mode", o.mode, "none | inline | ea | ia");
    bench->add_option("--seed", o.seed, "Base seed");
    bench->add_option("--reps", o.reps, "Repetitions per load step")->check(CLI::PositiveNumber);
    bench->add_option("--phi", o.phi, "Monitor file replacing the worker monitor");
    bench->add_option("--out", o.out, "CSV file (stdout when absent)");
    bench->add_option("--loading-steps", o.loading_steps, "Ticks over which workers are forked")
        ->check(CLI::PositiveNumber);
    bench->add_flag("--monitor-master", o.monitor_master, "Also monitor the master");
    bench->add_flag("--force", o.force, "Lift the step cap");
    bench->add_option("--bursts", o.bursts, "Spikes of the burst profile")->group("")->check(CLI::PositiveNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try
    {
        if (*run)
            return cmd_run(o);
        if (*check)
            return cmd_check(o);
        if (*enumerate)
            return cmd_enumerate(o);
        return cmd_bench(o);
    }
    catch (const UsageError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    catch (const ParseError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    catch (const ExplosionGuard& e)
    {
        std::cerr << "guard: " << e.what() << "\n";
        return kGuard;
    }
    catch (const StepCapExceeded& e)
    {
        std::cerr << "guard: " << e.what() << "\n";
        return kGuard;
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    }
}
