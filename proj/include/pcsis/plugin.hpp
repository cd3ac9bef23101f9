#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcsis/system.hpp"

namespace pcsis {

/// Describes an external executable that implements the step map.
///
/// The process is spawned once and kept alive for the lifetime of the
/// returned SystemModel.  Each step writes one line "x_1 ... x_n u_1 ... u_s"
/// to its stdin and reads one line "y_1 ... y_n" from its stdout; numbers are
/// decimal text with 17 significant digits.
struct PluginSpec {
    std::vector<std::string> argv;
    int dimension = 0;
    SafeSet safe_set;
    std::optional<ControlSet> control_set;
};

SystemModel plugin_system(const PluginSpec& spec);

/// Formats one request line (without the trailing newline).
std::string format_plugin_request(const StateVector& x, const ControlVector& u);

/// Parses one response line; throws SimulationError on malformed input.
StateVector parse_plugin_response(const std::string& line, int dimension);

}  // namespace pcsis
