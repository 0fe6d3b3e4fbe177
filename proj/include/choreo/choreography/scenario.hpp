#pragma once

#include "choreo/analysis/monitoring.hpp"
#include "choreo/choreography/mutation.hpp"
#include "choreo/choreography/tracer.hpp"
#include "choreo/runtime/explore.hpp"
#include "choreo/runtime/runtime.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace choreo
{

/// One action of a scripted system process.
struct ScriptOp
{
    enum class Kind : std::uint8_t
    {
        Fork,  // fork SIG as VAR
        Send,  // send VAR | send parent
        Recv,  // recv
        Exit,  // exit
        Crash, // crash
        Tick,  // tick (an internal step with no observable action)
    };

    Kind kind = Kind::Tick;
    Signature sig;
    std::string var;

    friend bool operator==(const ScriptOp&, const ScriptOp&) = default;
};

/// A straight-line process body. An implicit exit follows the last op.
struct Program
{
    std::vector<ScriptOp> ops;

    /// Ops separated by `;` or newlines, e.g. `fork Q as q; send q; exit`.
    static Program parse(std::string_view text);
    std::string render() const;

    /// The actions this program emits when it runs to completion.
    std::vector<Action> actions() const;
};

/// Interprets a Program. Messages carry an increasing counter so each one
/// is distinguishable in logs.
class ScriptBehavior : public Behavior
{
  public:
    ScriptBehavior(std::shared_ptr<const Program> program, std::optional<Pid> parent);

    bool ready(const Mailbox& mailbox) const override;
    void step(ProcessContext& ctx) override;
    std::unique_ptr<Behavior> clone() const override { return std::make_unique<ScriptBehavior>(*this); }
    void fingerprint(std::string& out) const override;

  private:
    Pid resolve(const std::string& var) const;

    std::shared_ptr<const Program> program_;
    std::optional<Pid> parent_;
    std::size_t pc_ = 0;
    std::map<std::string, Pid> vars_;
    std::int64_t sent_ = 0;
};

using BehaviorFactory = std::function<std::unique_ptr<Behavior>(Pid self, std::optional<Pid> parent)>;

/// A system under scrutiny plus its instrumentation map.
struct Scenario
{
    std::string name;
    std::map<Signature, std::shared_ptr<const Program>> programs;
    /// Non-scripted behaviors, consulted before programs.
    std::map<Signature, BehaviorFactory> custom;
    /// Top-level processes, each started with its own root tracer.
    std::vector<Signature> initial;
    Phi phi;
};

enum class MonitoringMode : std::uint8_t
{
    None,
    Inline,
    OutlineEA,
    OutlineIA,
};

/// none | inline | ea | ia
const char* to_string(MonitoringMode m) noexcept;
std::optional<MonitoringMode> parse_monitoring_mode(std::string_view text) noexcept;
inline bool is_outline(MonitoringMode m) noexcept
{
    return m == MonitoringMode::OutlineEA || m == MonitoringMode::OutlineIA;
}

struct RunConfig
{
    MonitoringMode mode = MonitoringMode::OutlineEA;
    MutationSet mutations;
    bool snapshots = true;
    std::uint64_t step_cap = 10'000'000;
    bool record_choices = true;
};

std::shared_ptr<const SystemFactory> make_factory(const Scenario& s);

/// Shared tracer configuration for an outline run.
std::shared_ptr<const TracerConfig> make_tracer_config(const Scenario& s, const RunConfig& cfg);

struct Started
{
    Pid system;
    std::optional<Pid> root;
};

/// Forks the top-level process paused and a root tracer that will trace and
/// resume it.
Started start(Runtime& rt, const Signature& g, std::shared_ptr<const TracerConfig> cfg);

/// A ready-to-run runtime: every initial process is started according to the
/// monitoring mode. No step has been taken yet. The sink, when given, is
/// attached before the start-up spawns so it sees the whole run.
Runtime build_runtime(const Scenario& s, const RunConfig& cfg, LogSink* sink = nullptr,
                      std::vector<Started>* started = nullptr);

/// Header lines identifying a run in a saved log.
void describe(ExecutionLog& log, const Scenario& s, const RunConfig& cfg, const Schedule& schedule);

struct RunResult
{
    RunOutcome outcome;
    VerdictMap verdicts;
    std::size_t steps = 0;
    std::array<std::size_t, 3> live{};
    std::array<std::size_t, 3> created{};
};

/// Builds and runs a scenario. Entries go to `sink` when given.
RunResult run_scenario(const Scenario& s, const RunConfig& cfg, const Schedule& schedule, LogSink* sink = nullptr);

/// Synchronous-analysis baseline: verdicts when every event is analysed at
/// its emission point.
VerdictMap inline_run(const Scenario& s, const Schedule& schedule);

/// Enumerates the maximal schedules of the scenario under `cfg`.
std::uint64_t enumerate_schedules(const Scenario& s, const RunConfig& cfg, const EnumerationOptions& opts,
                                  const std::function<bool(const StepSchedule&, bool truncated)>& visit);

// Built-in scenarios --------------------------------------------------------

/// P forks Q and sends it a message; Q receives, forks R; Φ covers Q and R.
Scenario running_example();
/// As running_example, but Q crashes instead of exiting.
Scenario running_example_crash();
/// Four levels where the deepest events travel two routing hops.
Scenario chain_scenario();
/// A priority-mode tracer that shares its tracer with a child.
Scenario shared_scenario();

/// running-example, running-example-crash, chain, shared, random:<seed>.
Scenario scenario_by_name(std::string_view name);
std::vector<std::string> builtin_scenario_names();

struct RandomScenarioOptions
{
    std::size_t max_processes = 50;
    double phi_probability = 0.4;
    double message_probability = 0.5;
    double reply_probability = 0.3;
    double crash_probability = 0.1;
};

/// Random fork tree with parent-to-child messages, optional replies,
/// occasional crashes, and order monitors on a random subset of signatures.
Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& opts = {});

} // namespace choreo
