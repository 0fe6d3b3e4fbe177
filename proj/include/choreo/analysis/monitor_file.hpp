#pragma once

#include "choreo/core/monitor_spec.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace choreo
{

/// Builds the chain recognizer for `order a1 a2 ... an`: states q0..qn with
/// qn accepting, plus a rejecting `sink`. From qi, ai advances; any other
/// action of the chain's alphabet falls into the sink; actions outside the
/// alphabet self-loop. Every pattern constrains src to the monitored pid.
MonitorSpec order_monitor(std::string name, Signature target, const std::vector<Action>& chain);

/// Parses one or more monitor blocks:
///
///     monitor <name> for <signature>
///       states a b c          (optional)
///       initial a
///       accept c              (zero or more names)
///       reject b
///       a --rcv(self,_,_)--> b
///       order rcv frk ext     (shorthand, replaces the lines above)
///     end
///
/// Pattern arguments are positional (src, tgt, sig); omitted ones default to
/// self, _, _. `#` starts a comment. Throws ParseError with a line number.
std::vector<MonitorSpec> parse_monitor_file(std::string_view text);
std::vector<MonitorSpec> load_monitor_file(const std::string& path);

/// Inverse of parse_monitor_file for a single block.
std::string render_monitor(const MonitorSpec& spec);

} // namespace choreo
