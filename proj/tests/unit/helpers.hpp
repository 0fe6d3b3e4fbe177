#pragma once

#include "choreo/choreography/scenario.hpp"
#include "choreo/invariants/checker.hpp"

#include <algorithm>
#include <vector>

namespace choreo::test
{

struct LoggedRun
{
    ExecutionLog log;
    RunResult result;
};

inline LoggedRun logged_run(const Scenario& s, MonitoringMode mode, const Schedule& schedule,
                            MutationSet mutations = {})
{
    LoggedRun out;
    RunConfig cfg;
    cfg.mode = mode;
    cfg.mutations = mutations;
    describe(out.log, s, cfg, schedule);
    out.result = run_scenario(s, cfg, schedule, &out.log);
    return out;
}

template <class Pred>
std::vector<Entry> select(const ExecutionLog& log, Pred pred)
{
    std::vector<Entry> out;
    std::copy_if(log.entries().begin(), log.entries().end(), std::back_inserter(out), pred);
    return out;
}

inline std::vector<Action> actions_of(const std::vector<TraceEvent>& events, Pid src)
{
    std::vector<Action> out;
    for (const auto& e : events)
        if (e.src == src)
            out.push_back(e.act);
    return out;
}

inline Pid S(std::uint32_t n) { return Pid{Pid::Kind::System, n}; }
inline Pid T(std::uint32_t n) { return Pid{Pid::Kind::Tracer, n}; }
inline Pid A(std::uint32_t n) { return Pid{Pid::Kind::Analyzer, n}; }

} // namespace choreo::test
