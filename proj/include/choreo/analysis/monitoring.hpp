#pragma once

#include "choreo/analysis/automaton.hpp"
#include "choreo/runtime/behavior.hpp"
#include "choreo/runtime/log.hpp"

#include <map>
#include <memory>
#include <string>

namespace choreo
{

/// Identifies one monitor instance: the instrumented process and the
/// signature it was forked with.
struct MonitorKey
{
    Pid pid;
    Signature sig;

    friend bool operator==(const MonitorKey&, const MonitorKey&) = default;
    friend auto operator<=>(const MonitorKey&, const MonitorKey&) = default;
};

std::string to_string(const MonitorKey& k);

using VerdictMap = std::map<MonitorKey, Verdict>;

/// Verdict counts per signature. Pids depend on the interleaving, so runs of
/// one scenario under different schedules or modes are compared this way.
using VerdictProfile = std::map<Signature, std::map<Verdict, std::size_t>>;
VerdictProfile verdict_profile(const VerdictMap& v);

/// Compiled form of Φ shared by every tracer and analyser of a run.
using CompiledPhi = std::map<Signature, std::shared_ptr<const CompiledAutomaton>>;
CompiledPhi compile_phi(const Phi& phi);

/// Log helpers keeping the monitor/verdict entry format in one place.
Entry monitor_entry(const MonitorKey& k);
Entry verdict_entry(const MonitorKey& k, Verdict v);

/// Folds monitor and verdict entries into the final verdict of every monitor.
VerdictMap collect_verdicts(const std::vector<Entry>& entries);

/// Incremental form of collect_verdicts for use as a log sink.
class VerdictCollector : public LogSink
{
  public:
    bool wants(EntryKind k) const override { return k == EntryKind::Monitor || k == EntryKind::Verdict; }
    void record(const Entry& e) override;
    const VerdictMap& verdicts() const noexcept { return verdicts_; }

  private:
    VerdictMap verdicts_;
};

/// EA analyser: steps its automaton on every received event. On the stop
/// signal it first drains whatever is still queued, then records its final
/// verdict and terminates.
class AnalyserBehavior : public Behavior
{
  public:
    AnalyserBehavior(MonitorKey key, RecognizerAutomaton automaton);

    bool ready(const Mailbox& mailbox) const override { return !mailbox.empty(); }
    void step(ProcessContext& ctx) override;
    std::unique_ptr<Behavior> clone() const override { return std::make_unique<AnalyserBehavior>(*this); }
    void fingerprint(std::string& out) const override;

    const RecognizerAutomaton& automaton() const noexcept { return automaton_; }

  private:
    void analyse(ProcessContext& ctx, const Mail& m);

    MonitorKey key_;
    RecognizerAutomaton automaton_;
};

/// Synchronous monitoring at the emission point. A process forked with a
/// signature in Φ gets its own monitor; every other process feeds the
/// monitor of its nearest instrumented ancestor, mirroring which tracer
/// would analyse it under outline monitoring.
class InlineMonitorHook : public InlineHook
{
  public:
    explicit InlineMonitorHook(std::shared_ptr<const CompiledPhi> phi);

    void on_event(const TraceEvent& e, ProcessContext& ctx) override;
    std::unique_ptr<InlineHook> clone() const override { return std::make_unique<InlineMonitorHook>(*this); }
    void fingerprint(std::string& out) const override;

    VerdictMap verdicts() const;

  private:
    std::shared_ptr<const CompiledPhi> phi_;
    std::map<Pid, Pid> group_;
    std::map<Pid, std::pair<Signature, RecognizerAutomaton>> monitors_;
};

} // namespace choreo
