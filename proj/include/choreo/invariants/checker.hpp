#pragma once

#include "choreo/analysis/monitoring.hpp"
#include "choreo/choreography/tracer.hpp"
#include "choreo/runtime/log.hpp"
#include "choreo/runtime/schedule.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace choreo
{

enum class CheckStatus : std::uint8_t
{
    Pass,
    Fail,
    NotApplicable,
};

/// PASS | FAIL | N/A
const char* to_string(CheckStatus s) noexcept;

struct CheckResult
{
    std::string id;
    CheckStatus status = CheckStatus::Pass;
    /// Step of the first violation.
    std::optional<std::uint64_t> at;
    std::string detail;
};

/// l01..l26 followed by the order, gc and verdicts checks. Every id appears
/// exactly once.
struct InvariantReport
{
    std::vector<CheckResult> results;
    std::optional<Schedule> schedule;

    bool ok() const;
    const CheckResult& get(std::string_view id) const;
    std::vector<std::string> failing() const;
    /// One line per check: `l07 PASS`, `l09 FAIL sched=steps:[...] at=12`.
    std::string render() const;
};

/// l01 .. l26
const std::vector<std::string>& invariant_ids();
/// invariant_ids() plus order, gc, verdicts.
const std::vector<std::string>& report_ids();

struct CheckOptions
{
    /// Enables the verdicts check: the log's verdicts must equal those of
    /// synchronous analysis over the logged emission order.
    std::shared_ptr<const CompiledPhi> phi;
    /// Known analysis variant; inferred from analyser spawns when absent.
    std::optional<AnalysisVariant> variant;
    /// Raise LogIncomplete when a monitored log has no state snapshots.
    bool require_snapshots = true;
};

/// Incremental log checker. Entries are grouped by step; a step is closed
/// when an entry with a later step arrives, or by end_step().
class InvariantChecker : public LogSink
{
  public:
    explicit InvariantChecker(CheckOptions opts = {});

    void record(const Entry& e) override;
    void end_step();

    /// End-of-run report. Completion checks (all events analysed, every
    /// tracer collected, verdict equivalence) only apply when `quiescent`.
    InvariantReport finish(bool quiescent) const;

    bool failed() const noexcept { return failed_; }
    bool monitored() const noexcept { return !tracers_.empty(); }
    const std::set<std::string>& branches() const noexcept { return branches_; }
    /// Verdicts logged by tracers and analysers so far.
    const VerdictMap& verdicts() const noexcept { return logged_; }
    /// Entries of the most recently closed step.
    const std::vector<Entry>& last_step() const noexcept { return last_; }

    /// Actions analysed by each tracer, grouped by process signature:
    /// `T1{P:frk,snd,ext} T2{Q:rcv,frk,ext}`.
    std::string analysis_summary() const;

    /// Canonical rendering of everything that influences future verdicts of
    /// the checker, excluding the failures already recorded.
    void fingerprint(std::string& out) const;

  private:
    struct Shadow
    {
        bool root = false;
        bool initialised = false;
        bool alive = true;
        Mode mode = Mode::Direct;
        std::map<Pid, Pid> pi;
        std::map<Pid, Mode> gamma;
        std::set<Pid> detaching;
        std::optional<Pid> router;
        std::size_t dtc_sent = 0;
        std::size_t priority_adds = 0;
        std::size_t analysers = 0;
    };

    struct Monitor
    {
        Signature sig;
        RecognizerAutomaton automaton;
    };

    void close();
    void fail(std::size_t index, std::uint64_t step, const std::string& why);
    void fail(std::string_view id, std::uint64_t step, const std::string& why);
    void system_step(const std::vector<Entry>& es);
    void tracer_step(Pid t, const std::vector<Entry>& es);
    void feed_oracle(const TraceEvent& e);

    CheckOptions opts_;
    std::vector<Entry> buffer_;
    std::vector<Entry> last_;
    std::vector<CheckResult> results_;
    bool failed_ = false;
    bool snapshots_seen_ = false;

    std::map<Pid, Shadow> tracers_;
    std::map<Pid, bool> analysers_; // alive flag
    std::map<Pid, std::uint64_t> emitted_;
    std::map<Pid, std::uint64_t> analysed_;
    std::map<Pid, Pid> group_;
    std::map<Pid, Monitor> oracle_;
    std::map<Pid, Signature> sigs_;
    std::map<Pid, std::map<Pid, std::vector<Action>>> by_tracer_;
    VerdictMap logged_;
    std::set<std::string> branches_;
};

/// Offline check of a complete log. Uses the log header `mode` to decide
/// the analysis variant when options do not fix it.
InvariantReport check_invariants(const ExecutionLog& log, CheckOptions opts = {});

struct OrderDivergence
{
    Pid process;
    /// Position in the analysis sequence.
    std::size_t index = 0;
    std::optional<TraceEvent> expected;
    std::optional<TraceEvent> got;
};

struct OrderReport
{
    std::map<Pid, std::vector<TraceEvent>> emitted;
    std::map<Pid, std::vector<TraceEvent>> analysed;
    std::vector<OrderDivergence> divergences;

    bool ok() const noexcept { return divergences.empty(); }
};

/// Compares, per system process, emission order with analysis order and
/// reports the first divergence of each process.
OrderReport order_oracle(const ExecutionLog& log);

/// Actions analysed by each tracer, in analysis order.
std::map<Pid, std::vector<TraceEvent>> analysed_by_tracer(const std::vector<Entry>& entries);

} // namespace choreo
