#pragma once

// Synchronized dual-channel PWM: one shared sawtooth carrier (master-slave
// style), leading-edge-aligned comparators, and the four-mode classification.

#include <cstdint>
#include <vector>

namespace dicsim {

struct PwmConfig {
    double fsw = 20e3;  // hertz
    double d1 = 0.0;    // quasi Y-source channel duty, in [0,1]
    double d2 = 0.0;    // boost channel duty, in [0,1]
};

struct GatePair {
    bool sw1 = false;  // quasi Y-source switch
    bool sw2 = false;  // boost switch

    bool operator==(const GatePair&) const = default;
};

/// The four switch-combination operating modes.
enum class OperatingMode : std::uint8_t {
    Mode1 = 1,  // sw1 on,  sw2 off: only source 1 feeds the load
    Mode2 = 2,  // both on:          both sources active
    Mode3 = 3,  // sw1 off, sw2 on:  only source 2 feeds the load
    Mode4 = 4,  // both off:         load disconnected from the sources
};

/// Shared sawtooth carrier, fraction of the period in [0,1).
/// Both channels always sample the same carrier value at the same t.
double carrier(double t, double fsw);

/// Comparator gates: sw_i = carrier(t) < d_i (strict, leading-edge aligned,
/// so d = 0 is always-off and d = 1 always-on).
GatePair gates_at(double t, const PwmConfig& cfg);

/// Gate pair -> operating mode (total bijection over the four pairs).
OperatingMode mode_of(const GatePair& g);

/// Sorted, deduplicated switching instants within one period:
/// {0, d1/fsw, d2/fsw, 1/fsw}, exact to the arithmetic of the inputs.
std::vector<double> edges_in_period(const PwmConfig& cfg);

}  // namespace dicsim
