#pragma once

namespace ctxgate::app {

/// Sets the stderr log level from CONTEXT_GATE_LOG (error, info, debug).
/// Unset or unrecognized values fall back to info.
void init_logging();

}  // namespace ctxgate::app
