#pragma once

// Versioned JSON scenario format. Channel entries are stored as
// [re, im] pairs of C99 hex-float strings so a dumped scenario reloads
// bit-exactly on any machine. When "channels" is omitted the channels are
// redrawn from "seed".

#include "hwigs/network.hpp"

#include <string>
#include <string_view>

namespace hwigs {

inline constexpr int kScenarioFormatVersion = 1;

std::string dump_scenario(const NetworkScenario& s, bool include_channels = true);

/// Throws InvalidArgument with the offending field name on malformed input.
NetworkScenario parse_scenario(std::string_view text);

std::string to_hex_float(double x);
double from_hex_float(const std::string& text);

}  // namespace hwigs
