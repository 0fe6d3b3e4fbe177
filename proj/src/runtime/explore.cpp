#include "choreo/runtime/explore.hpp"

#include "choreo/core/errors.hpp"

#include <random>
#include <sstream>

namespace choreo
{

double estimate_schedule_count(const Runtime& initial, std::size_t probes, std::uint64_t seed, std::size_t depth_cap)
{
    if (probes == 0)
        return 0.0;
    std::mt19937_64 rng(seed);
    double total = 0.0;
    for (std::size_t i = 0; i < probes; ++i)
    {
        Runtime rt(initial);
        rt.set_sink(nullptr);
        double weight = 1.0;
        std::size_t depth = 0;
        while (!rt.quiescent() && depth < depth_cap)
        {
            const auto& en = rt.enabled();
            weight *= static_cast<double>(en.size());
            rt.apply(en[rng() % en.size()]);
            ++depth;
        }
        total += weight;
    }
    return total / static_cast<double>(probes);
}

namespace
{

struct Enumerator
{
    const EnumerationOptions& opts;
    const std::function<bool(const StepSchedule&, bool)>& visit;
    StepSchedule path;
    std::uint64_t count = 0;
    bool stopped = false;

    void dfs(const Runtime& rt)
    {
        if (stopped)
            return;
        if (rt.quiescent() || path.steps.size() >= opts.depth_cap)
        {
            ++count;
            if (!visit(path, !rt.quiescent()))
                stopped = true;
            return;
        }
        // Copy the choice list: applying a choice mutates the set.
        auto choices = rt.enabled();
        for (const auto& c : choices)
        {
            Runtime next(rt);
            next.apply(c);
            path.steps.push_back(c);
            dfs(next);
            path.steps.pop_back();
            if (stopped)
                return;
        }
    }
};

} // namespace

std::uint64_t enumerate_schedules(const Runtime& initial, const EnumerationOptions& opts,
                                  const std::function<bool(const StepSchedule&, bool truncated)>& visit)
{
    Runtime root(initial);
    root.set_sink(nullptr);
    if (!opts.force)
    {
        double est = estimate_schedule_count(root, opts.probes, 0x5eed, opts.depth_cap);
        if (est > opts.guard)
        {
            std::ostringstream msg;
            msg << "estimated " << est << " schedules exceeds the guard of " << opts.guard;
            throw ExplosionGuard(msg.str());
        }
    }
    Enumerator e{opts, visit, {}, 0, false};
    e.dfs(root);
    return e.count;
}

} // namespace choreo
