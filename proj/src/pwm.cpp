#include "dicsim/pwm.hpp"

#include <algorithm>
#include <cmath>

namespace dicsim {

double carrier(double t, double fsw) {
    double phase = t * fsw;
    return phase - std::floor(phase);
}

GatePair gates_at(double t, const PwmConfig& cfg) {
    const double c = carrier(t, cfg.fsw);
    return {c < cfg.d1, c < cfg.d2};
}

OperatingMode mode_of(const GatePair& g) {
    if (g.sw1 && !g.sw2) return OperatingMode::Mode1;
    if (g.sw1 && g.sw2) return OperatingMode::Mode2;
    if (!g.sw1 && g.sw2) return OperatingMode::Mode3;
    return OperatingMode::Mode4;
}

std::vector<double> edges_in_period(const PwmConfig& cfg) {
    const double period = 1.0 / cfg.fsw;
    std::vector<double> edges{0.0, cfg.d1 * period, cfg.d2 * period, period};
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

}  // namespace dicsim
