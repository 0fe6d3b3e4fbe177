#pragma once

#include "choreo/choreography/scenario.hpp"
#include "choreo/invariants/checker.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace choreo
{

struct ExhaustiveOptions
{
    RunConfig run;
    /// Paths longer than this are cut and counted as truncated.
    std::size_t depth_cap = 10'000;
    /// Distinct states explored before ExplosionGuard is raised.
    std::uint64_t state_guard = 5'000'000;
    bool force = false;
    bool stop_at_first_failure = true;
    /// Explore a single representative for steps that commute with every
    /// other step (analyser work, deliveries to analysers and to terminated
    /// processes).
    bool reduce = true;
    /// Compare final verdicts with synchronous analysis of the same run.
    bool check_verdicts = true;
};

struct Counterexample
{
    StepSchedule schedule;
    InvariantReport report;
    std::string detail;
};

struct ExhaustiveSummary
{
    std::uint64_t states = 0;
    std::uint64_t transitions = 0;
    /// Quiescent end states, split by outcome.
    std::uint64_t terminals = 0;
    std::uint64_t passed = 0;
    std::uint64_t failed = 0;
    std::uint64_t truncated = 0;
    std::map<std::string, std::uint64_t> branch_hits;
    std::set<std::string> failed_checks;
    /// Distinct final verdict maps over all end states.
    std::set<VerdictMap> verdicts;
    /// Distinct per-tracer analysis summaries over all end states.
    std::set<std::string> analyses;
    /// Largest number of live tracers and analysers at any end state.
    std::size_t live_monitors_at_end = 0;
    /// Complete schedule in which a tracer had to route a collected event to
    /// the tracer instrumented for its source, and whether that run passed.
    std::optional<StepSchedule> routed_event_witness;
    bool routed_event_witness_ok = false;
    /// Complete schedule in which a routed rcv reaches a tracer that already
    /// holds the same process's direct ext, and whether that run passed.
    std::optional<StepSchedule> ext_before_rcv_witness;
    bool ext_before_rcv_witness_ok = false;
    std::optional<Counterexample> counterexample;

    bool ok() const noexcept { return failed == 0 && !counterexample; }
    std::vector<std::string> missing_branches() const;
};

/// Explores every reachable state of the scenario (modulo the reduction),
/// checking invariants on each transition and order, GC and verdict
/// equivalence on each quiescent end state.
ExhaustiveSummary exhaustive_check(const Scenario& s, const ExhaustiveOptions& opts);

struct RaceFlags
{
    bool routed_event = false;
    bool ext_before_rcv = false;
};

/// Replays a (possibly partial) schedule and reports which races it realizes.
RaceFlags detect_races(const Scenario& s, const RunConfig& cfg, const StepSchedule& schedule);

/// Human-readable multi-line summary.
std::string render(const ExhaustiveSummary& s);

} // namespace choreo
