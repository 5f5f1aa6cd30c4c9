#pragma once

// Structured key-value configuration: one `key = value` pair per line,
// '#' comments, SI units, decimal or scientific notation. Keys are exactly
// the CircuitSpec field names plus the PWM duties and the sweep load list.
// Unknown keys are an error.

#include <map>
#include <string>
#include <vector>

#include "dicsim/params.hpp"
#include "dicsim/pwm.hpp"

namespace dicsim {

/// Everything a run needs from one config file.
struct RunConfig {
    CircuitSpec spec;
    double d_st = 0.0;
    double d_boost = 0.0;
    std::vector<double> loads;  // watts, for `sweep`
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses a config file. Unknown keys, malformed values, or duplicate load
/// forms raise ConfigError with file/line context.
RunConfig load_config(const std::string& path);

/// Parses config text (same rules; `origin` used in error messages).
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Applies one `key=value` override on top of a parsed config.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// The set of keys accepted by the parser (for help/errors).
const std::vector<std::string>& known_keys();

}  // namespace dicsim
