#pragma once

#include "choreo/choreography/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace choreo
{

enum class LoadProfile : std::uint8_t
{
    Steady,
    Pulse,
    Burst,
};

/// steady | pulse | burst
const char* to_string(LoadProfile p) noexcept;
std::optional<LoadProfile> parse_load_profile(std::string_view text) noexcept;

inline const Signature kMasterSig{"Master"};
inline const Signature kWorkerSig{"Worker"};
inline const Signature kBootSig{"Boot"};

struct BenchConfig
{
    std::size_t workers = 100;
    std::size_t requests = 10;
    LoadProfile profile = LoadProfile::Steady;
    /// Logical-time horizon over which workers are forked.
    std::size_t loading_steps = 100;
    MonitoringMode mode = MonitoringMode::OutlineEA;
    std::uint64_t seed = 1;
    std::size_t repetitions = 1;
    /// Number of spikes of the Burst profile.
    std::size_t bursts = 5;
    /// Also give the master a dedicated monitor. The master is then forked
    /// by a bootstrap process so that it receives its own tracer.
    bool monitor_master = false;
    /// Replaces the default worker (and master) monitors when non-empty.
    Phi phi;
    std::uint64_t step_cap = 50'000'000;
};

/// Worker spawn times in master ticks.
struct LoadSchedule
{
    std::vector<std::uint64_t> spawn_step;
};

/// Steady: floor(i*t/n). Pulse: quantiles of a symmetric triangular density
/// on [0,t) peaking at t/2. Burst: `bursts` equal spikes at floor(k*t/bursts).
/// The shapes are deterministic; `seed` is accepted for interface symmetry.
LoadSchedule gen_load(LoadProfile profile, std::size_t n, std::size_t t, std::uint64_t seed, std::size_t bursts = 5);

/// Master forks workers per the load schedule, keeps one outstanding request
/// per worker, and exits after n*r replies. Workers answer each request and
/// exit after the r-th reply. Φ maps the worker signature to the order
/// recognizer `(rcv snd)^r ext`.
Scenario gen_master_worker(const BenchConfig& cfg);

struct MetricsReport
{
    double duration = 0;
    double messages_total = 0;
    /// snd/rcv events of processes that carry a monitor.
    double events_total = 0;
    /// snd/rcv events of every system process that emitted any.
    double system_events = 0;
    double routed_hops = 0;
    double tracers_created = 0;
    double tracers_peak = 0;
    double tracers_collected = 0;
    double analysers_created = 0;
    double analysers_collected = 0;
    double rt_mean = 0;
    double rt_max = 0;
    double mailbox_peak = 0;
    double replies = 0;
    double overhead_duration_pct = 0;
    double overhead_messages_pct = 0;
    double overhead_rt_pct = 0;
};

/// Runs the scenario `repetitions` times with derived seeds, averages the
/// metrics, and computes overheads against None-mode runs on the same seeds.
MetricsReport run_bench(const BenchConfig& cfg);

/// One run with the given seed; no overheads.
MetricsReport measure(const BenchConfig& cfg, std::uint64_t seed);

/// Seed of repetition k.
std::uint64_t repetition_seed(std::uint64_t base, std::size_t k) noexcept;

struct BenchRow
{
    BenchConfig config;
    MetricsReport metrics;
};

/// n, profile, mode, rep, duration, messages_total, ... overhead_rt_pct
const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const BenchRow& row);

/// Ten load steps: n = k*workers/10 for k = 1..10 (at least 1 each).
std::vector<std::size_t> load_steps(std::size_t workers);

} // namespace choreo
