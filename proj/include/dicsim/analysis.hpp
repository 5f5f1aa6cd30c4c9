#pragma once

// Steady-state metrics, the loss model, efficiency, load sharing, and load
// sweeps over a requested output-power grid.

#include <optional>
#include <string>
#include <vector>

#include "dicsim/params.hpp"
#include "dicsim/pwm.hpp"
#include "dicsim/simulator.hpp"

namespace dicsim {

/// Steady-state summary of one run.
struct RunReport {
    double vo_avg = 0.0;
    double vo_ripple_pp = 0.0;
    double p_in1 = 0.0;       // mean(vin1 * i_src1)
    double p_in2 = 0.0;
    double p_out = 0.0;
    double p_loss_conduction = 0.0;  // measured resistive + diode dissipation
    double p_loss_overlap = 0.0;     // modeled V-I overlap switching loss
    double p_loss_gate = 0.0;        // modeled gate-drive loss (2 channels)
    double efficiency = 0.0;  // p_out / (p_in1 + p_in2 + overlap + gate)
    double share1 = 0.0;      // p_in1 / (p_in1 + p_in2)
    double share2 = 0.0;
    bool dcm_ysource = false;
    bool dcm_boost = false;
    bool sharing_indeterminate = false;  // lossless converters tuned to the same target
};

/// Loss decomposition of loss_model().
struct LossBreakdown {
    double conduction = 0.0;
    double overlap = 0.0;
    double gate = 0.0;
    double total() const { return conduction + overlap + gate; }
};

struct SteadyStateError : std::runtime_error {
    SteadyStateError(const std::string& what, double residual)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};

/// Normalization of the overlap-loss term: p_ovl = k_ovl * sum_i(vin_i *
/// i_load_share_i * fsw * kOverlapTNorm). kOverlapTNorm plays the role of a
/// fixed commutation-time constant.
inline constexpr double kOverlapTNorm = 1e-6;  // seconds

/// Modeled switching/gate losses from the measured waveforms.
LossBreakdown loss_model(const Waveforms& w, const CircuitSpec& spec);

/// True when both converters are lossless and tuned to exactly the same
/// target, which leaves the open-loop load split mathematically
/// indeterminate; reported instead of pretending the emitted shares are
/// physically meaningful.
bool sharing_is_indeterminate(const CircuitSpec& spec, const PwmConfig& pwm);

/// Averages over the (integral-period) measurement window of a steady run.
/// Throws SteadyStateError when the run did not reach steady state.
RunReport metrics(const SteadyResult& run, const CircuitSpec& spec);

/// One row of a load sweep.
struct SweepRow {
    double p_out_requested = 0.0;
    std::optional<RunReport> report;  // empty when the row failed
    std::string error;                // failure reason when report is empty
};

struct SweepTable {
    std::vector<SweepRow> rows;
    bool all_ok() const {
        for (const auto& r : rows)
            if (!r.report) return false;
        return true;
    }
};

/// One steady-state run per requested load power; the load resistance for a
/// row is vo_target^2 / p_out. Row failures are recorded without aborting
/// the remaining rows. `loads` must be non-empty, positive, strictly
/// increasing.
SweepTable sweep(const CircuitSpec& spec, const PwmConfig& pwm,
                 const std::vector<double>& loads, double vo_target,
                 int samples_per_period = 500);

/// Convenience: steady run + metrics for a resolved-resistance spec.
RunReport run_steady_report(const CircuitSpec& spec, const PwmConfig& pwm,
                            const SimOptions& opt);

/// Periodic-steady-state conservation checks over the measurement window.
struct ConservationReport {
    double energy_rel_err = 0.0;  // |E_in - E_out - E_loss - dE_stored| / E_in
    double voltsec_l1 = 0.0;      // |mean inductor voltage| / vin2
    double voltsec_lm = 0.0;
    double voltsec_l2 = 0.0;
    double charge_c1 = 0.0;       // |mean capacitor current| / mean load current
    double charge_c2 = 0.0;
    double charge_co = 0.0;

    double worst_voltsec() const {
        return std::max({voltsec_l1, voltsec_lm, voltsec_l2});
    }
    double worst_charge() const { return std::max({charge_c1, charge_c2, charge_co}); }
};

ConservationReport conservation(const SteadyResult& run, const CircuitSpec& spec);

}  // namespace dicsim
