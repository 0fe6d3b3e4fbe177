#pragma once

#include <array>
#include <bitset>
#include <optional>
#include <string>
#include <string_view>

namespace choreo
{

/// Deliberate single-point protocol faults used to show that the checks
/// actually detect broken choreographies.
enum class Mutation : std::uint8_t
{
    SkipRouteAdd,          // routing a frk in direct mode forgets the child route
    SkipRouteDeletion,     // routing a dtc keeps the route
    ForwardInsteadOfRoute, // direct-mode routing sends the bare event
    WrongRouterPid,        // priority-mode instrumentation uses self as router
    NoPriorityMode,        // new tracers consume messages in arrival order
    NoDetach,              // tracers take over processes without preempt/dtc
    NoFlushInClear,        // CLEAR leaves in-transit events behind
    NoGc,                  // tracers never terminate
    AnalyseRoutedInDirect, // direct mode analyses routed events
    DropDtc,               // a router discards direct dtc commands
};

inline constexpr std::size_t kMutationCount = 10;

inline constexpr std::array<Mutation, kMutationCount> kAllMutations = {
    Mutation::SkipRouteAdd,   Mutation::SkipRouteDeletion, Mutation::ForwardInsteadOfRoute,
    Mutation::WrongRouterPid, Mutation::NoPriorityMode,    Mutation::NoDetach,
    Mutation::NoFlushInClear, Mutation::NoGc,              Mutation::AnalyseRoutedInDirect,
    Mutation::DropDtc,
};

/// Kebab-case name, e.g. skip-route-add.
const char* to_string(Mutation m) noexcept;
std::optional<Mutation> parse_mutation(std::string_view text) noexcept;

class MutationSet
{
  public:
    MutationSet() = default;
    MutationSet(std::initializer_list<Mutation> ms)
    {
        for (auto m : ms)
            set(m);
    }

    bool has(Mutation m) const noexcept { return bits_[static_cast<std::size_t>(m)]; }
    void set(Mutation m) noexcept { bits_[static_cast<std::size_t>(m)] = true; }
    bool any() const noexcept { return bits_.any(); }
    std::string render() const;

    friend bool operator==(const MutationSet&, const MutationSet&) = default;

  private:
    std::bitset<kMutationCount> bits_;
};

} // namespace choreo
