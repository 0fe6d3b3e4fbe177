#pragma once

#include "choreo/analysis/monitoring.hpp"
#include "choreo/choreography/mutation.hpp"
#include "choreo/core/tracer_state.hpp"
#include "choreo/runtime/behavior.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace choreo
{

/// Where analysis happens: a separate analyser process per tracer (EA) or
/// inside the tracer itself (IA).
enum class AnalysisVariant : std::uint8_t
{
    EA,
    IA,
};

const char* to_string(AnalysisVariant v) noexcept;

/// Configuration shared by all tracers of one choreography.
struct TracerConfig
{
    Phi phi;
    CompiledPhi compiled;
    AnalysisVariant variant = AnalysisVariant::EA;
    MutationSet mutations;
    /// Emit a (mode, Π, Γ) snapshot after every step.
    bool snapshots = true;
};

/// Identifiers of every handler branch a tracer can log.
const std::vector<std::string>& tracer_branch_ids();

/// A tracer process. The root variant runs ROOT (trace the paused top-level
/// process, resume it, start in direct mode without an analyser); the
/// instrumented variant runs TRACER (take over its process through the
/// detach handshake and start in priority mode).
class TracerBehavior : public Behavior
{
  public:
    static std::unique_ptr<TracerBehavior> root(std::shared_ptr<const TracerConfig> cfg, Pid top_level);
    static std::unique_ptr<TracerBehavior> instrumented(std::shared_ptr<const TracerConfig> cfg, MonitorKey key,
                                                        Pid router);

    bool ready(const Mailbox& mailbox) const override;
    void step(ProcessContext& ctx) override;
    std::unique_ptr<Behavior> clone() const override { return std::make_unique<TracerBehavior>(*this); }
    void fingerprint(std::string& out) const override;

    const TracerState& state() const noexcept { return sigma_; }
    bool is_root() const noexcept { return root_; }

    TracerBehavior(const TracerBehavior&) = default;

  private:
    TracerBehavior(std::shared_ptr<const TracerConfig> cfg, bool root, Pid process, Pid router,
                   std::optional<MonitorKey> key);

    struct Step;

    void init_root(Step& s);
    void init_instrumented(Step& s);

    void handle_event_direct(Step& s, const TraceEvent& e);
    void route_dtc(Step& s, const DetachCommand& c);
    void forwd_rtd(Step& s, const RoutedMessage& r);
    void handle_event_priority(Step& s, const RoutedMessage& r);
    void handle_dtc(Step& s, const RoutedMessage& r);
    void own_dtc(Step& s, const DetachCommand& c);
    void instrument(Step& s, Mode mode, const TraceEvent& e, Pid router);

    void route(Step& s, const Message& m, Pid pt);
    void forwd(Step& s, const RoutedMessage& r, Pid pt);
    void detach(Step& s, Pid ps, Pid router);
    void analyse(Step& s, const TraceEvent& e);
    void try_gc(Step& s);

    std::optional<Pid> route_of(Pid ps) const;
    void pi_add(Step& s, Pid ps, Pid pt);
    void pi_del(Step& s, Pid ps);
    void gamma_add(Step& s, Pid ps, Mode mark);
    void gamma_del(Step& s, Pid ps);
    void gamma_mark(Step& s, Pid ps, Mode mark);
    void branch(Step& s, const char* id);
    void set_mode(Step& s, Mode m);
    bool mutated(Mutation m) const noexcept { return cfg_->mutations.has(m); }

    std::shared_ptr<const TracerConfig> cfg_;
    TracerState sigma_;
    bool root_ = false;
    bool initialised_ = false;
    Pid process_; // top-level process (root) or the instrumented process
    Pid router_;
    std::optional<MonitorKey> key_;
    std::optional<RecognizerAutomaton> automaton_; // IA only
};

} // namespace choreo
