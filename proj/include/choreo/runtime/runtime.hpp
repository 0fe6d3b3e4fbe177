#pragma once

#include "choreo/runtime/behavior.hpp"
#include "choreo/runtime/schedule.hpp"
#include "choreo/tracing/bindings.hpp"

#include <array>
#include <bitset>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace choreo
{

enum class Status : std::uint8_t
{
    Paused,
    Runnable,
    Blocked,
    Terminated,
};

const char* to_string(Status s) noexcept;

struct ProcessRecord
{
    Pid pid;
    Status status = Status::Blocked;
    Mailbox mailbox;
    std::unique_ptr<Behavior> behavior;
    std::optional<Signature> sig;
    std::optional<Pid> parent;
};

struct RuntimeOptions
{
    std::uint64_t step_cap = 10'000'000;
    /// Disabling the flush in CLEAR exists only for fault injection.
    bool flush_on_clear = true;
    /// Keep the realized choice list of seeded runs.
    bool record_choices = true;
};

/// Insertion-ordered set of choices with O(1) add, remove, and indexing.
class EnabledSet
{
  public:
    void add(const Choice& c);
    void remove(const Choice& c);
    bool contains(const Choice& c) const { return index_.count(c) != 0; }
    const std::vector<Choice>& items() const noexcept { return items_; }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t size() const noexcept { return items_.size(); }

  private:
    std::vector<Choice> items_;
    std::unordered_map<Choice, std::size_t> index_;
};

/// Deterministic single-threaded actor runtime. Copying a runtime clones
/// every behavior, which gives independent snapshots for state exploration.
class Runtime
{
  public:
    explicit Runtime(std::shared_ptr<const SystemFactory> factory, RuntimeOptions opts = {});
    Runtime(const Runtime& other);
    Runtime& operator=(const Runtime& other);
    Runtime(Runtime&&) noexcept = default;
    Runtime& operator=(Runtime&&) noexcept = default;
    ~Runtime();

    /// Non-owning; the sink must outlive the runtime or be reset.
    void set_sink(LogSink* sink);
    void set_inline_hook(std::unique_ptr<InlineHook> hook);
    InlineHook* inline_hook() const noexcept { return hook_.get(); }

    /// Harness-level creation of a top-level system process.
    Pid spawn_system(const Signature& sig, bool paused);
    /// Harness-level creation of a monitor-side process.
    Pid spawn(std::unique_ptr<Behavior> behavior, Pid::Kind kind, std::string role, bool paused = false);

    /// Harness-level fault injection: stops a monitor-side process as if it
    /// had failed. Mail addressed to it is dropped from then on.
    void halt(Pid p);

    const std::vector<Choice>& enabled() const noexcept { return enabled_.items(); }
    bool is_enabled(const Choice& c) const { return enabled_.contains(c); }
    bool quiescent() const noexcept { return enabled_.empty(); }

    /// Executes one scheduler step. Throws InvalidChoice for a disabled choice.
    void apply(Choice c);

    std::uint64_t steps() const noexcept { return step_; }
    const RuntimeOptions& options() const noexcept { return opts_; }

    const ProcessRecord* process(Pid p) const;
    std::size_t process_count() const noexcept { return procs_.size() - 1; }
    std::size_t created(Pid::Kind k) const noexcept { return created_[static_cast<std::size_t>(k)]; }
    std::size_t live(Pid::Kind k) const noexcept { return live_[static_cast<std::size_t>(k)]; }
    std::size_t live_peak(Pid::Kind k) const noexcept { return live_peak_[static_cast<std::size_t>(k)]; }
    std::size_t mailbox_peak() const noexcept { return mailbox_peak_; }
    const TraceBindings& tracing() const noexcept { return tracing_; }
    std::size_t in_flight() const;

    void fingerprint(std::string& out) const;

  private:
    friend class ProcessContext;

    ProcessRecord& rec(Pid p);
    std::size_t slot(Pid p) const noexcept;
    Pid allocate(Pid::Kind kind);
    void refresh(Pid p);
    void push_mail(Pid to, Mail m);
    void terminate(Pid p, EntryKind kind);
    void emit(ProcessContext& ctx, Action act, std::optional<Pid> tgt, std::optional<Signature> sig);
    void flush_into(Pid pt, Pid ps, std::vector<TraceEvent> flushed);
    bool logging(EntryKind k) const noexcept { return sink_ && mask_[static_cast<std::size_t>(k)]; }
    void record(Entry e);

    std::shared_ptr<const SystemFactory> factory_;
    RuntimeOptions opts_;
    std::vector<ProcessRecord> procs_;
    std::map<std::pair<Pid, Pid>, std::deque<Mail>> channels_;
    TraceBindings tracing_;
    EnabledSet enabled_;
    /// Per-kind serial to index into procs_; serials count from 1 per kind.
    std::array<std::vector<std::uint32_t>, 3> slots_;
    std::unique_ptr<InlineHook> hook_;
    LogSink* sink_ = nullptr;
    std::bitset<kEntryKindCount> mask_;
    std::uint64_t step_ = 0;
    std::optional<Pid> acting_;
    std::array<std::size_t, 3> created_{};
    std::array<std::size_t, 3> live_{};
    std::array<std::size_t, 3> live_peak_{};
    std::size_t mailbox_peak_ = 0;
};

struct RunOutcome
{
    std::vector<Choice> realized;
    bool quiescent = false;
};

/// Drives the runtime to quiescence under a schedule. Seeded schedules pick
/// uniformly among enabled choices with a 64-bit Mersenne Twister; explicit
/// schedules must reach quiescence exactly (ScheduleExhausted otherwise).
RunOutcome run(Runtime& rt, const Schedule& schedule);

} // namespace choreo
