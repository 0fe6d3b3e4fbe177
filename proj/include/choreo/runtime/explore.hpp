#pragma once

#include "choreo/runtime/runtime.hpp"

#include <cstdint>
#include <functional>

namespace choreo
{

struct EnumerationOptions
{
    /// Schedules are cut at this many steps; a cut prefix is still yielded.
    std::size_t depth_cap = 100'000;
    /// Maximum estimated schedule count accepted without force.
    double guard = 1e6;
    bool force = false;
    /// Random probes used by the size estimator.
    std::size_t probes = 64;
};

/// Unbiased estimate of the number of maximal schedules (Knuth's random
/// probing of the choice tree).
double estimate_schedule_count(const Runtime& initial, std::size_t probes, std::uint64_t seed,
                               std::size_t depth_cap);

/// Visits every maximal schedule of the choice tree rooted at `initial`,
/// in depth-first order. The visitor returns false to stop early. Returns
/// the number of schedules visited. Throws ExplosionGuard when the estimate
/// exceeds the guard and force is not set.
std::uint64_t enumerate_schedules(const Runtime& initial, const EnumerationOptions& opts,
                                  const std::function<bool(const StepSchedule&, bool truncated)>& visit);

} // namespace choreo
