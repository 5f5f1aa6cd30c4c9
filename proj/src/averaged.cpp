#include "dicsim/averaged.hpp"

#include <cmath>

namespace dicsim {

double ysource_gain(double d_st, double delta) {
    if (d_st < 0.0) throw std::domain_error("duty must be >= 0");
    if (delta < 1.0) throw std::domain_error("winding factor must be >= 1");
    if (delta * d_st >= 1.0) throw std::domain_error("gain pole: delta * d_st >= 1");
    return 1.0 / (1.0 - delta * d_st);
}

double boost_gain(double d) {
    if (d < 0.0) throw std::domain_error("duty must be >= 0");
    if (d >= 1.0) throw std::domain_error("gain pole: duty >= 1");
    return 1.0 / (1.0 - d);
}

double solve_duty_ysource(double vin, double vo, double delta) {
    if (!(vin > 0.0)) throw std::domain_error("vin must be positive");
    if (delta < 1.0) throw std::domain_error("winding factor must be >= 1");
    if (vo < vin) throw std::domain_error("cannot buck: vo < vin");
    return (1.0 - vin / vo) / delta;
}

double solve_duty_boost(double vin, double vo) {
    if (!(vin > 0.0)) throw std::domain_error("vin must be positive");
    if (vo < vin) throw std::domain_error("cannot buck: vo < vin");
    return 1.0 - vin / vo;
}

OperatingPoint design_operating_point(const CircuitSpec& spec, double vo_target) {
    OperatingPoint op;
    op.vo_target = vo_target;
    op.d_st = solve_duty_ysource(spec.vin1, vo_target, delta_from_turns(spec.turns));
    op.d_boost = solve_duty_boost(spec.vin2, vo_target);
    return op;
}

}  // namespace dicsim
