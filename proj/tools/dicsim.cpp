// dicsim: double-input DC-DC converter simulator (quasi Y-source + boost).
//
// Subcommands:
//   steady   - analytical operating point from the averaged models
//   simulate - time-domain run, waveform CSV + steady-state report
//   sweep    - steady-state runs over a load-power grid, sweep CSV
//   design   - enumerate transformer turns ratios for a target gain
//
// Exit codes: 0 success, 1 configuration/validation error, 2 numerical
// failure (divergence or no steady state).

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dicsim/analysis.hpp"
#include "dicsim/averaged.hpp"
#include "dicsim/config.hpp"
#include "dicsim/csv.hpp"
#include "dicsim/params.hpp"
#include "dicsim/simulator.hpp"

namespace {

using namespace dicsim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

RunConfig load_with_overrides(const std::string& path,
                              const std::vector<std::string>& sets) {
    RunConfig cfg = load_config(path);
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

/// Common intended output voltage of a duty pair (the larger of the two
/// ideal per-converter targets).
double design_target(const CircuitSpec& spec, double d_st, double d_boost) {
    const double delta = delta_from_turns(spec.turns);
    double v = 0.0;
    if (delta * d_st < 1.0) v = std::max(v, spec.vin1 / (1.0 - delta * d_st));
    if (d_boost < 1.0) v = std::max(v, spec.vin2 / (1.0 - d_boost));
    if (v <= 0.0) throw ConfigError("duty pair has no finite voltage target");
    return v;
}

void resolve_load(CircuitSpec& spec, double vo_target) {
    if (spec.load.kind == LoadSpec::Kind::Power)
        spec.load = LoadSpec::resistance(vo_target * vo_target / spec.load.value);
}

void print_report(const RunReport& r) {
    std::printf("vo_avg        %10.4f V\n", r.vo_avg);
    std::printf("vo_ripple_pp  %10.4f V\n", r.vo_ripple_pp);
    std::printf("p_in1         %10.4f W\n", r.p_in1);
    std::printf("p_in2         %10.4f W\n", r.p_in2);
    std::printf("p_out         %10.4f W\n", r.p_out);
    std::printf("p_loss_cond   %10.4f W\n", r.p_loss_conduction);
    std::printf("p_loss_ovl    %10.4f W\n", r.p_loss_overlap);
    std::printf("p_loss_gate   %10.4f W\n", r.p_loss_gate);
    std::printf("efficiency    %10.2f %%\n", 100.0 * r.efficiency);
    std::printf("share1/share2 %10.4f / %.4f\n", r.share1, r.share2);
    std::printf("dcm ysource/boost    %d / %d\n", int(r.dcm_ysource), int(r.dcm_boost));
    if (r.sharing_indeterminate)
        std::printf("note: both converters lossless and tuned to the same target; "
                    "open-loop load sharing is indeterminate\n");
}

int cmd_steady(const std::string& config_path, const std::vector<std::string>& sets,
               double target) {
    RunConfig cfg = load_with_overrides(config_path, sets);
    std::vector<std::string> warnings;
    validate(cfg.spec, &warnings);
    print_warnings(warnings);

    const double delta = delta_from_turns(cfg.spec.turns);
    const OperatingPoint op = design_operating_point(cfg.spec, target);
    std::printf("delta           %8.4f   (turns %d:%d:%d)\n", delta, cfg.spec.turns.n1,
                cfg.spec.turns.n2, cfg.spec.turns.n3);
    std::printf("d_st            %8.4f   (%.2f %%)\n", op.d_st, 100.0 * op.d_st);
    std::printf("d_boost         %8.4f   (%.2f %%)\n", op.d_boost, 100.0 * op.d_boost);
    std::printf("ysource gain    %8.4f   -> %.3f V from %.3f V\n",
                ysource_gain(op.d_st, delta), ysource_gain(op.d_st, delta) * cfg.spec.vin1,
                cfg.spec.vin1);
    std::printf("boost gain      %8.4f   -> %.3f V from %.3f V\n",
                boost_gain(op.d_boost), boost_gain(op.d_boost) * cfg.spec.vin2,
                cfg.spec.vin2);
    std::printf("ideal vo        %8.4f V\n", target);
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& sets,
                 const std::string& out_path, double t_end, int spp,
                 const std::string& circuit) {
    RunConfig cfg = load_with_overrides(config_path, sets);
    std::vector<std::string> warnings;
    validate(cfg.spec, &warnings);
    print_warnings(warnings);

    SimOptions opt;
    opt.samples_per_period = spp;
    if (circuit == "ysource")
        opt.include_boost = false;
    else if (circuit == "boost")
        opt.include_ysource = false;
    else if (circuit != "both")
        throw ConfigError("--circuit must be both, ysource, or boost");

    const double vo_t = design_target(cfg.spec, cfg.d_st, cfg.d_boost);
    resolve_load(cfg.spec, vo_t);
    PwmConfig pwm{cfg.spec.fsw, cfg.d_st, cfg.d_boost};
    if (pwm.d1 < 0.0 || pwm.d1 > 1.0 || pwm.d2 < 0.0 || pwm.d2 > 1.0)
        throw ConfigError("duties must lie in [0, 1]");

    SteadyResult run;
    if (t_end > 0.0) {
        // literal horizon from the cold (all-zero) start, then continue to
        // steady state for the summary report
        Simulator sim(cfg.spec, opt);
        Waveforms w = sim.simulate(pwm, t_end);
        write_waveforms_csv(out_path, w);
        std::printf("waveforms: %s (%zu samples, %.4f s)\n", out_path.c_str(), w.size(),
                    w.t.back());
        SimOptions opt2 = opt;
        opt2.initial_state = w.x.back();
        Simulator sim2(cfg.spec, opt2);
        run = sim2.run_to_steady(pwm);
    } else {
        opt.initial_state = Simulator::steady_seed(cfg.spec, pwm, opt);
        Simulator sim(cfg.spec, opt);
        run = sim.run_to_steady(pwm);
        write_waveforms_csv(out_path, run.window);
        std::printf("waveforms: %s (%zu samples, final %d periods)\n", out_path.c_str(),
                    run.window.size(), 10);
    }
    RunReport rep = metrics(run, cfg.spec);  // throws if not converged
    if (opt.include_ysource && opt.include_boost)
        rep.sharing_indeterminate = sharing_is_indeterminate(cfg.spec, pwm);
    std::printf("steady after %d periods (residual %.3g)\n", run.periods_run,
                run.residual);
    print_report(rep);
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& sets,
              const std::string& out_path, int spp) {
    RunConfig cfg = load_with_overrides(config_path, sets);
    std::vector<std::string> warnings;
    validate(cfg.spec, &warnings);
    print_warnings(warnings);
    if (cfg.loads.empty())
        throw ConfigError("sweep needs a 'loads = p1, p2, ...' list in the config");

    const double vo_t = design_target(cfg.spec, cfg.d_st, cfg.d_boost);
    PwmConfig pwm{cfg.spec.fsw, cfg.d_st, cfg.d_boost};
    SweepTable table = sweep(cfg.spec, pwm, cfg.loads, vo_t, spp);
    write_sweep_csv(out_path, table);
    std::printf("sweep: %s (%zu rows, target %.2f V)\n", out_path.c_str(),
                table.rows.size(), vo_t);
    for (const auto& row : table.rows) {
        if (row.report)
            std::printf("  %6.2f W: vo=%7.3f V eta=%5.1f%% share2=%.3f\n",
                        row.p_out_requested, row.report->vo_avg,
                        100.0 * row.report->efficiency, row.report->share2);
        else
            std::printf("  %6.2f W: FAILED: %s\n", row.p_out_requested, row.error.c_str());
    }
    return table.all_ok() ? kExitOk : kExitNumerical;
}

int cmd_design(double vin1, double vin2, double target, double duty_max) {
    if (target < vin1 || target < vin2)
        throw ConfigError("cannot buck: target below an input voltage");
    const double d_boost = solve_duty_boost(vin2, target);
    std::printf("boost duty for %.2f V -> %.2f V: %.4f\n", vin2, target, d_boost);

    struct Row {
        TurnsRatio t;
        double d_st;
        int equivalents;
    };
    std::map<double, Row> by_delta;  // the fewest-turn triple represents each delta
    for (int n1 = 1; n1 <= 12; ++n1)
        for (int n2 = 1; n2 <= 12; ++n2)
            for (int n3 = 1; n3 <= 12; ++n3) {
                if (n2 <= n3) continue;
                TurnsRatio t{n1, n2, n3};
                const double delta = delta_from_turns(t);
                const double d_st = solve_duty_ysource(vin1, target, delta);
                if (d_st > duty_max) continue;
                auto [it, fresh] = by_delta.emplace(delta, Row{t, d_st, 1});
                if (!fresh) {
                    ++it->second.equivalents;
                    const auto total = [](const TurnsRatio& x) {
                        return x.n1 + x.n2 + x.n3;
                    };
                    if (total(t) < total(it->second.t)) it->second.t = t;
                }
            }
    if (by_delta.empty()) {
        std::fprintf(stderr,
                     "no feasible turns ratio with n <= 12 for duty <= %.4f\n", duty_max);
        return kExitConfig;
    }
    std::printf("%-10s %-8s %-8s %s\n", "n1:n2:n3", "delta", "d_st", "equivalents");
    for (const auto& [delta, r] : by_delta)
        std::printf("%2d:%d:%d     %-8.3f %-8.4f %d\n", r.t.n1, r.t.n2, r.t.n3, delta,
                    r.d_st, r.equivalents);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"double-input DC-DC converter simulator (quasi Y-source + boost)"};
    app.require_subcommand(1);

    std::string config_path, out_path, circuit = "both";
    std::vector<std::string> sets;
    double target = 48.0, t_end = 0.0, duty_max = 1.0;
    double vin1 = 12.0, vin2 = 24.0;
    int spp = 500;

    auto* steady = app.add_subcommand("steady", "analytical operating point");
    steady->add_option("--config", config_path, "config file")->required();
    steady->add_option("--target", target, "target output voltage [V]")->required();
    steady->add_option("--set", sets, "override key=value");

    auto* simulate = app.add_subcommand("simulate", "time-domain simulation");
    simulate->add_option("--config", config_path, "config file")->required();
    simulate->add_option("--out", out_path, "waveform CSV path")->required();
    simulate->add_option("--t-end", t_end,
                         "horizon [s] from a cold start (default: run to steady state)");
    simulate->add_option("--spp", spp, "samples per switching period (>= 200)");
    simulate->add_option("--set", sets, "override key=value");
    simulate->add_option("--circuit", circuit, "both | ysource | boost");

    auto* sweep_cmd = app.add_subcommand("sweep", "steady-state load sweep");
    sweep_cmd->add_option("--config", config_path, "config file")->required();
    sweep_cmd->add_option("--out", out_path, "sweep CSV path")->required();
    sweep_cmd->add_option("--spp", spp, "samples per switching period (>= 200)");
    sweep_cmd->add_option("--set", sets, "override key=value");

    auto* design = app.add_subcommand("design", "turns-ratio enumeration");
    design->add_option("--vin1", vin1, "Y-source input voltage [V]")->required();
    design->add_option("--vin2", vin2, "boost input voltage [V]")->required();
    design->add_option("--target", target, "target output voltage [V]")->required();
    design->add_option("--duty-max", duty_max, "max shoot-through duty");

    CLI11_PARSE(app, argc, argv);

    try {
        if (steady->parsed()) return cmd_steady(config_path, sets, target);
        if (simulate->parsed())
            return cmd_simulate(config_path, sets, out_path, t_end, spp, circuit);
        if (sweep_cmd->parsed()) return cmd_sweep(config_path, sets, out_path, spp);
        if (design->parsed()) return cmd_design(vin1, vin2, target, duty_max);
    } catch (const ConfigError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const NoConsistentConfigError& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const SteadyStateError& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
