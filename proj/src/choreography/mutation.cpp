#include "choreo/choreography/mutation.hpp"

namespace choreo
{

const char* to_string(Mutation m) noexcept
{
    switch (m)
    {
    case Mutation::SkipRouteAdd: return "skip-route-add";
    case Mutation::SkipRouteDeletion: return "skip-route-deletion";
    case Mutation::ForwardInsteadOfRoute: return "forward-instead-of-route";
    case Mutation::WrongRouterPid: return "wrong-router-pid";
    case Mutation::NoPriorityMode: return "no-priority-mode";
    case Mutation::NoDetach: return "no-detach";
    case Mutation::NoFlushInClear: return "no-flush-in-clear";
    case Mutation::NoGc: return "no-gc";
    case Mutation::AnalyseRoutedInDirect: return "analyse-routed-in-direct";
    case Mutation::DropDtc: return "drop-dtc";
    }
    return "?";
}

std::optional<Mutation> parse_mutation(std::string_view text) noexcept
{
    for (auto m : kAllMutations)
        if (text == to_string(m))
            return m;
    return std::nullopt;
}

std::string MutationSet::render() const
{
    std::string out;
    for (auto m : kAllMutations)
        if (has(m))
        {
            if (!out.empty())
                out += ',';
            out += to_string(m);
        }
    return out.empty() ? "none" : out;
}

} // namespace choreo
