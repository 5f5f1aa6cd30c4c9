#pragma once

// Time-domain piecewise-linear state-space simulation of the double-input
// converter. Per switch/diode configuration the circuit is linear; the
// configuration models (A_k, B_k) are assembled once from the netlist by
// nodal analysis and cached. Integration is fixed-step RK4 with the grid
// split exactly at PWM edges; diode conduction is resolved at sample
// boundaries.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicsim/params.hpp"
#include "dicsim/pwm.hpp"

namespace dicsim {

/// Inductor currents and capacitor voltages of the combined circuit.
struct StateVector {
    double i_l1 = 0.0;  // Y-source input inductor
    double i_lm = 0.0;  // magnetizing current, winding-1 referred
    double i_l2 = 0.0;  // boost inductor
    double v_c1 = 0.0;
    double v_c2 = 0.0;
    double v_co = 0.0;

    using Vec6 = Eigen::Matrix<double, 6, 1>;
    Vec6 to_vec() const { return (Vec6() << i_l1, i_lm, i_l2, v_c1, v_c2, v_co).finished(); }
    static StateVector from_vec(const Vec6& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5]};
    }
};

/// Diode conduction flags: D1 (Y network input), Do1 (Y output), D2 (boost).
struct DiodeStates {
    bool d1 = false;
    bool do1 = false;
    bool d2 = false;

    bool operator==(const DiodeStates&) const = default;
};

/// One switch/diode configuration of the piecewise-linear model.
struct ConfigKey {
    GatePair gates;
    DiodeStates diodes;
    bool l2_frozen = false;  // boost inductor blocked and clamped at zero
    bool lm_frozen = false;  // de-energized core with every Y path blocked

    bool operator==(const ConfigKey&) const = default;
    bool operator<(const ConfigKey& o) const;
};

/// Continuous dynamics of one configuration: dx/dt = A x + B u with
/// u = (vin1, vin2), plus the linear output map y = C x + D u used for
/// diode checks, source/load currents, and loss bookkeeping.
struct PiecewiseModel {
    static constexpr int kOutputs = 21;
    Eigen::Matrix<double, 6, 6> A;
    Eigen::Matrix<double, 6, 2> B;
    Eigen::Matrix<double, 6, 1> c;   // affine part from diode forward drops
    Eigen::Matrix<double, kOutputs, 6> C;
    Eigen::Matrix<double, kOutputs, 2> D;
    Eigen::Matrix<double, kOutputs, 1> y0;
    ConfigKey key;
};

/// Output channel indices of PiecewiseModel::C/D.
namespace out {
inline constexpr int i_src1 = 0;
inline constexpr int i_src2 = 1;
inline constexpr int i_load = 2;
inline constexpr int q_d1 = 3;   // diode quantity: current if on, fwd voltage margin if off
inline constexpr int q_do1 = 4;
inline constexpr int q_d2 = 5;
inline constexpr int i_c1 = 6;
inline constexpr int i_c2 = 7;
inline constexpr int i_co = 8;
inline constexpr int i_w1 = 9;
inline constexpr int i_w2 = 10;
inline constexpr int i_w3 = 11;
inline constexpr int v_a = 12;
inline constexpr int v_b = 13;
inline constexpr int v_p = 14;
inline constexpr int v_f = 15;
inline constexpr int v_s = 16;
inline constexpr int v_out = 17;
inline constexpr int v_x2 = 18;
inline constexpr int i_sw1 = 19;
inline constexpr int i_sw2 = 20;
}  // namespace out

/// Sampled run: event-aligned time grid with per-sample state, gates, mode,
/// terminal currents, and the conduction-dissipation channel used by the
/// loss model. Every PWM edge in the horizon is a grid point.
struct Waveforms {
    std::vector<double> t;
    std::vector<StateVector> x;
    std::vector<GatePair> gates;
    std::vector<OperatingMode> mode;
    std::vector<double> i_src1;
    std::vector<double> i_src2;
    std::vector<double> i_load;
    std::vector<double> v_load;   // output node voltage (differs from v_co by ESR drop)
    std::vector<double> p_cond;   // instantaneous resistive + diode dissipation
    std::vector<DiodeStates> diodes;

    double fsw = 0.0;
    std::size_t samples_per_period = 0;

    std::size_t size() const { return t.size(); }
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double t, const StateVector& x)
        : std::runtime_error(what), time(t), state(x) {}
    double time;
    StateVector state;
};

class NoConsistentConfigError : public std::runtime_error {
public:
    NoConsistentConfigError(const std::string& what, const StateVector& x)
        : std::runtime_error(what), state(x) {}
    StateVector state;
};

/// Which parts of the double-input circuit are built and which sources are
/// connected. A disconnected source freezes its input inductor at zero; the
/// converter hardware stays in place.
struct SimOptions {
    bool include_ysource = true;
    bool include_boost = true;
    bool connect_src1 = true;
    bool connect_src2 = true;
    int samples_per_period = 500;
    StateVector initial_state{};       // default: cold start, all zero
    double divergence_limit = 1e6;     // SI units, max-norm abort threshold
};

/// Result of the steady-state driver.
struct SteadyResult {
    Waveforms window;        // the final recorded periods (integral count)
    StateVector x_end;
    int periods_run = 0;
    double residual = 0.0;   // last relative period-boundary difference
    bool converged = false;
    bool dcm_ysource = false;
    bool dcm_boost = false;
    int forced_config_samples = 0;  // samples resolved via least-violation
};

class Simulator {
public:
    Simulator(const CircuitSpec& spec, SimOptions opt = {});

    /// Linear dynamics for one switch/diode configuration (cached).
    const PiecewiseModel& assemble_model(const GatePair& gates,
                                         const DiodeStates& diodes,
                                         bool l2_frozen = false,
                                         bool lm_frozen = false);

    /// Advances dx/dt = A x + B u by dt with classic RK4. No PWM edge may
    /// lie strictly inside the step.
    StateVector step(const PiecewiseModel& model, const StateVector& x,
                     double dt) const;

    /// Consistent diode conduction flags for the given state and gates:
    /// a conducting diode must carry non-negative forward current, a
    /// blocking one must see non-positive forward bias.
    ConfigKey resolve_diodes(const StateVector& x, const GatePair& gates);

    /// Integrates over [0, t_end] from opt.initial_state, splitting every
    /// switching period at the PWM edges and sub-sampling uniformly between
    /// them. samples_per_period must be >= 200.
    Waveforms simulate(const PwmConfig& pwm, double t_end);

    /// Runs period-by-period until the state at consecutive period
    /// boundaries differs by < 1e-4 relative (max-norm, 5 consecutive hits),
    /// then records a 10-period measurement window. Hard cap 20000 periods.
    SteadyResult run_to_steady(const PwmConfig& pwm, int max_periods = 20000);

    /// Averaged-model operating-point prediction used to seed run_to_steady.
    static StateVector steady_seed(const CircuitSpec& spec, const PwmConfig& pwm,
                                   const SimOptions& opt);

    const CircuitSpec& spec() const { return spec_; }
    const SimOptions& options() const { return opt_; }

    /// Solver regularization constants (documented, booked as conduction
    /// loss): diode on-resistance, winding series resistance, capacitor ESR
    /// floors, node anchor leak.
    static constexpr double kDiodeRon = 0.005;
    static constexpr double kWindingRes = 0.001;
    static constexpr double kEsrC1 = 0.002;
    static constexpr double kEsrC2 = 0.30;
    static constexpr double kEsrCo = 0.01;
    static constexpr double kLeakG = 1e-9;
    static constexpr double kCoreLossRes = 2500.0;  // across the magnetizing branch
    static constexpr double kL2ClampAmps = 0.05;
    static constexpr double kLmClampAmps = 0.05;

private:
    struct Mna;  // netlist assembly detail

    void simulate_period(const PwmConfig& pwm, double t0, StateVector& x,
                         Waveforms* record);
    void record_sample(Waveforms& w, double t, const StateVector& x,
                       const GatePair& g, const ConfigKey& cfg,
                       const Eigen::Matrix<double, PiecewiseModel::kOutputs, 1>& y);
    Eigen::Matrix<double, PiecewiseModel::kOutputs, 1> outputs(
        const PiecewiseModel& m, const StateVector& x) const;
    double conduction_power(const ConfigKey& cfg,
                            const StateVector& x,
                            const Eigen::Matrix<double, PiecewiseModel::kOutputs, 1>& y) const;

    CircuitSpec spec_;
    SimOptions opt_;
    double delta_ = 0.0;
    Eigen::Vector2d u_;
    std::map<ConfigKey, PiecewiseModel> cache_;
    ConfigKey current_{};
    int forced_samples_ = 0;
};

}  // namespace dicsim
