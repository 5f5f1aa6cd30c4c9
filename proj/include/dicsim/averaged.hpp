#pragma once

// Closed-form steady-state (averaged) models of both converters: ideal
// lossless gains, duty solving, and operating-point design.

#include "dicsim/params.hpp"

namespace dicsim {

/// Duty pair targeting one output voltage with both converters.
struct OperatingPoint {
    double d_st = 0.0;     // quasi Y-source shoot-through duty, in [0,1)
    double d_boost = 0.0;  // boost duty, in [0,1)
    double vo_target = 0.0;
};

/// Quasi Y-source ideal gain 1 / (1 - delta * d_st).
/// Throws std::domain_error ("gain pole") when delta * d_st >= 1.
double ysource_gain(double d_st, double delta);

/// Boost ideal gain 1 / (1 - d). Throws std::domain_error when d >= 1 or d < 0.
double boost_gain(double d);

/// Inverts the Y-source gain: duty producing vo from vin given delta.
/// Throws std::domain_error when vo < vin (cannot buck) or inputs invalid.
double solve_duty_ysource(double vin, double vo, double delta);

/// Inverts the boost gain: duty producing vo from vin.
double solve_duty_boost(double vin, double vo);

/// Duties so that both converters individually target vo_target.
OperatingPoint design_operating_point(const CircuitSpec& spec, double vo_target);

}  // namespace dicsim
