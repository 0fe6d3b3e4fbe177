#pragma once

#include "choreo/core/monitor_spec.hpp"
#include "choreo/core/pid.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace choreo
{

/// Tracer mode, and equally the mark of an entry in the traced-processes map.
/// Direct renders as `o`, Priority as `p`.
enum class Mode : std::uint8_t
{
    Direct,
    Priority,
};

char mode_symbol(Mode m) noexcept;
std::optional<Mode> parse_mode(std::string_view text) noexcept;

/// σ = (Π, Φ, Γ) plus the current loop mode.
struct TracerState
{
    std::map<Pid, Pid> routing;  // Π
    Phi instrumentation;         // Φ
    std::map<Pid, Mode> traced;  // Γ
    /// Processes whose dtc has not returned yet. Usually mirrors the
    /// priority marks of Γ, but outlives them when a process exits first.
    std::set<Pid> detaching;
    Mode mode = Mode::Direct;
    Pid self_pid;
    std::optional<Pid> analyzer;

    bool has_priority_entries() const noexcept;
    bool maps_disjoint() const noexcept;
    bool mode_consistent() const noexcept { return mode == Mode::Priority || !has_priority_entries(); }
    bool collectable() const noexcept { return routing.empty() && traced.empty() && detaching.empty(); }
};

/// The (mode, Π, Γ) projection written to the execution log after each
/// tracer step.
struct TracerSnapshot
{
    Mode mode = Mode::Direct;
    std::vector<std::pair<Pid, Pid>> routing;
    std::vector<std::pair<Pid, Mode>> traced;

    static TracerSnapshot of(const TracerState& s);

    friend bool operator==(const TracerSnapshot&, const TracerSnapshot&) = default;
};

/// `mode=o pi={S4:T2,S5:T2} gamma={S1:o}`
std::string render(const TracerSnapshot& s);
TracerSnapshot parse_snapshot(std::string_view text);

} // namespace choreo
