#pragma once

#include <string>

namespace swarmlink::tools {

/// Fixed-input wire samples (data packets and control messages) as pretty
/// JSON. Any change in output means the wire format changed.
std::string golden_wire_samples();

}  // namespace swarmlink::tools
