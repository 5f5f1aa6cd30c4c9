#include "dicsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dicsim {

namespace {

double trapz_mean(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() < 2) return v.empty() ? 0.0 : v.front();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        acc += 0.5 * (v[i] + v[i + 1]) * (t[i + 1] - t[i]);
    return acc / (t.back() - t.front());
}

double trapz_mean_product(const std::vector<double>& t, const std::vector<double>& a,
                          const std::vector<double>& b) {
    if (t.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        acc += 0.5 * (a[i] * b[i] + a[i + 1] * b[i + 1]) * (t[i + 1] - t[i]);
    return acc / (t.back() - t.front());
}

}  // namespace

LossBreakdown loss_model(const Waveforms& w, const CircuitSpec& spec) {
    LossBreakdown lb;
    lb.conduction = trapz_mean(w.t, w.p_cond);
    lb.gate = 2.0 * spec.p_gate;

    const double i_load_avg = trapz_mean(w.t, w.i_load);
    std::vector<double> p1(w.size()), p2(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        p1[i] = spec.vin1 * w.i_src1[i];
        p2[i] = spec.vin2 * w.i_src2[i];
    }
    const double pin1 = trapz_mean(w.t, p1);
    const double pin2 = trapz_mean(w.t, p2);
    const double ptot = pin1 + pin2;
    const double s1 = ptot > 0.0 ? pin1 / ptot : 0.0;
    const double s2 = ptot > 0.0 ? pin2 / ptot : 0.0;
    lb.overlap = spec.k_ovl * spec.fsw * kOverlapTNorm *
                 (spec.vin1 * s1 * i_load_avg + spec.vin2 * s2 * i_load_avg);
    return lb;
}

RunReport metrics(const SteadyResult& run, const CircuitSpec& spec) {
    if (!run.converged) {
        std::ostringstream os;
        os << "steady state not reached (residual " << run.residual << ")";
        throw SteadyStateError(os.str(), run.residual);
    }
    const Waveforms& w = run.window;
    if (w.size() < 2) throw SteadyStateError("empty measurement window", run.residual);

    RunReport r;
    std::vector<double> vco(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) vco[i] = w.x[i].v_co;
    r.vo_avg = trapz_mean(w.t, vco);

    // ripple over the final full period
    const double period = 1.0 / w.fsw;
    const double t_last = w.t.back() - period;
    double vmin = vco.back(), vmax = vco.back();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.t[i] >= t_last - 1e-12) {
            vmin = std::min(vmin, vco[i]);
            vmax = std::max(vmax, vco[i]);
        }
    }
    r.vo_ripple_pp = vmax - vmin;

    std::vector<double> vin1i(w.size()), vin2i(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        vin1i[i] = spec.vin1 * w.i_src1[i];
        vin2i[i] = spec.vin2 * w.i_src2[i];
    }
    r.p_in1 = trapz_mean(w.t, vin1i);
    r.p_in2 = trapz_mean(w.t, vin2i);
    r.p_out = trapz_mean_product(w.t, w.v_load, w.i_load);

    const LossBreakdown lb = loss_model(w, spec);
    r.p_loss_conduction = lb.conduction;
    r.p_loss_overlap = lb.overlap;
    r.p_loss_gate = lb.gate;

    const double ptot = r.p_in1 + r.p_in2;
    if (ptot > 0.0) {
        r.share1 = r.p_in1 / ptot;
        r.share2 = 1.0 - r.share1;  // exact partition
        r.efficiency = r.p_out / (ptot + lb.overlap + lb.gate);
    }
    r.dcm_ysource = run.dcm_ysource;
    r.dcm_boost = run.dcm_boost;
    return r;
}

RunReport run_steady_report(const CircuitSpec& spec, const PwmConfig& pwm,
                            const SimOptions& opt_in) {
    SimOptions opt = opt_in;
    opt.initial_state = Simulator::steady_seed(spec, pwm, opt);
    Simulator sim(spec, opt);
    SteadyResult run = sim.run_to_steady(pwm);
    RunReport r = metrics(run, spec);

    if (opt.include_ysource && opt.include_boost && opt.connect_src1 &&
        opt.connect_src2)
        r.sharing_indeterminate = sharing_is_indeterminate(spec, pwm);
    return r;
}

bool sharing_is_indeterminate(const CircuitSpec& spec, const PwmConfig& pwm) {
    const bool lossless = spec.r_src1 == 0.0 && spec.r_src2 == 0.0 &&
                          spec.esr_l1 == 0.0 && spec.esr_l2 == 0.0 &&
                          spec.v_diode == 0.0;
    if (!lossless) return false;
    const double delta = delta_from_turns(spec.turns);
    if (delta * pwm.d1 >= 1.0 || pwm.d2 >= 1.0) return false;
    const double v1 = spec.vin1 / (1.0 - delta * pwm.d1);
    const double v2 = spec.vin2 / (1.0 - pwm.d2);
    return std::abs(v1 - v2) < 1e-9 * std::max(v1, v2);
}

ConservationReport conservation(const SteadyResult& run, const CircuitSpec& spec) {
    const Waveforms& w = run.window;
    if (w.size() < 2) throw std::invalid_argument("conservation: empty window");
    const double t_win = w.t.back() - w.t.front();

    std::vector<double> pin(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        pin[i] = spec.vin1 * w.i_src1[i] + spec.vin2 * w.i_src2[i];
    const double e_in = trapz_mean(w.t, pin) * t_win;
    const double e_out = trapz_mean_product(w.t, w.v_load, w.i_load) * t_win;
    const double e_loss = trapz_mean(w.t, w.p_cond) * t_win;

    auto stored = [&](const StateVector& x) {
        return 0.5 * (spec.l1 * x.i_l1 * x.i_l1 + spec.lm * x.i_lm * x.i_lm +
                      spec.l2 * x.i_l2 * x.i_l2 + spec.c1 * x.v_c1 * x.v_c1 +
                      spec.c2 * x.v_c2 * x.v_c2 + spec.co * x.v_co * x.v_co);
    };
    const double de = stored(w.x.back()) - stored(w.x.front());

    ConservationReport c;
    const double denom = std::max({std::abs(e_in), std::abs(e_out), 1e-12});
    c.energy_rel_err = std::abs(e_in - e_out - e_loss - de) / denom;

    // mean inductor voltage over the window is L * di / T
    const StateVector& x0 = w.x.front();
    const StateVector& x1 = w.x.back();
    c.voltsec_l1 = std::abs(spec.l1 * (x1.i_l1 - x0.i_l1) / t_win) / spec.vin2;
    c.voltsec_lm = std::abs(spec.lm * (x1.i_lm - x0.i_lm) / t_win) / spec.vin2;
    c.voltsec_l2 = std::abs(spec.l2 * (x1.i_l2 - x0.i_l2) / t_win) / spec.vin2;

    const double i_load_avg = std::max(std::abs(trapz_mean(w.t, w.i_load)), 1e-12);
    c.charge_c1 = std::abs(spec.c1 * (x1.v_c1 - x0.v_c1) / t_win) / i_load_avg;
    c.charge_c2 = std::abs(spec.c2 * (x1.v_c2 - x0.v_c2) / t_win) / i_load_avg;
    c.charge_co = std::abs(spec.co * (x1.v_co - x0.v_co) / t_win) / i_load_avg;
    return c;
}

SweepTable sweep(const CircuitSpec& spec, const PwmConfig& pwm,
                 const std::vector<double>& loads, double vo_target,
                 int samples_per_period) {
    if (loads.empty()) throw std::invalid_argument("sweep: empty load list");
    for (std::size_t i = 0; i < loads.size(); ++i) {
        if (!(loads[i] > 0.0)) throw std::invalid_argument("sweep: loads must be positive");
        if (i > 0 && loads[i] <= loads[i - 1])
            throw std::invalid_argument("sweep: loads must be strictly increasing");
    }
    SweepTable table;
    table.rows.reserve(loads.size());
    for (double p : loads) {
        SweepRow row;
        row.p_out_requested = p;
        try {
            CircuitSpec s = spec;
            s.load = LoadSpec::resistance(vo_target * vo_target / p);
            SimOptions opt;
            opt.samples_per_period = samples_per_period;
            row.report = run_steady_report(s, pwm, opt);
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace dicsim
