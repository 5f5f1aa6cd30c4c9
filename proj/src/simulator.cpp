#include "dicsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dicsim/averaged.hpp"

namespace dicsim {

namespace {
constexpr double kDiodeTolI = 1e-6;   // amps of reverse current tolerated on an on-diode
constexpr double kDiodeTolV = 1e-6;   // volts of forward bias tolerated on an off-diode
constexpr double kSaneVolts = 1e5;    // reject configurations beyond this node voltage
}  // namespace

bool ConfigKey::operator<(const ConfigKey& o) const {
    auto pack = [](const ConfigKey& k) {
        return (k.gates.sw1 << 6) | (k.gates.sw2 << 5) | (k.diodes.d1 << 4) |
               (k.diodes.do1 << 3) | (k.diodes.d2 << 2) | (int(k.l2_frozen) << 1) |
               int(k.lm_frozen);
    };
    return pack(*this) < pack(o);
}

// ---------------------------------------------------------------------------
// Netlist assembly.
//
// Quasi Y-source half:  vin1 -- r_src1+esr_l1 -- L1 -- A
//   C2: A->0.  D1: A->B.  Three-winding transformer, star point P:
//     N1: B->P (dot at B), magnetizing branch Lm across B-P;
//     N2: P->S (dot at P); N3: P->F (dot at P).
//   C1: F->0.  SW1: S->0.  Do1: S->VO.
// Boost half:           vin2 -- r_src2+esr_l2 -- L2 -- X2
//   SW2: X2->0.  D2: X2->VO.
// Shared output:        Co: VO->0, load resistor VO->0.
//
// In periodic steady state the winding relations pin the per-turn EMF e to
// v_c1/(n2-n3) while SW1 conducts and to (v_c1-v_co)/(n2-n3) otherwise;
// together with the input-loop average this yields the ideal gain
// vo = vin1 / (1 - delta*d_st) with delta = (n1+n2)/(n2-n3).
// ---------------------------------------------------------------------------

struct Simulator::Mna {
    // unknown layout: node voltages, then cap currents, winding currents, e,
    // then closed-switch branch currents
    enum Node { A, B, P, F, S, VO, X2, kNodeCount };

    std::array<int, kNodeCount> node_idx;  // -1 when absent
    int idx_c1 = -1, idx_c2 = -1, idx_co = -1;
    int idx_w1 = -1, idx_w2 = -1, idx_w3 = -1, idx_e = -1;
    int idx_sw1 = -1, idx_sw2 = -1;
    int m = 0;

    Eigen::MatrixXd M;
    // rhs = Rx * x + Ru * u + r0
    Eigen::MatrixXd Rx;
    Eigen::MatrixXd r0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;

    int nidx(Node n) const { return node_idx[n]; }
};

Simulator::Simulator(const CircuitSpec& spec, SimOptions opt)
    : spec_(validate(spec)), opt_(opt) {
    if (opt_.samples_per_period < 200)
        throw std::invalid_argument("samples_per_period must be >= 200");
    if (spec_.load.kind != LoadSpec::Kind::Resistance)
        throw std::invalid_argument(
            "simulator needs a resolved load resistance; convert a power "
            "target via vo_target^2 / p_out first");
    delta_ = delta_from_turns(spec_.turns);
    u_ << spec_.vin1, spec_.vin2;
    current_ = ConfigKey{};
    current_.l2_frozen = !opt_.include_boost || !opt_.connect_src2;
}

const PiecewiseModel& Simulator::assemble_model(const GatePair& gates,
                                                const DiodeStates& diodes,
                                                bool l2_frozen, bool lm_frozen) {
    ConfigKey key{gates, diodes, l2_frozen, lm_frozen};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (lm_frozen && (gates.sw1 || diodes.d1 || diodes.do1))
        throw std::invalid_argument(
            "unknown configuration: frozen core with an active Y path");

    if (!opt_.include_ysource && (diodes.d1 || diodes.do1 || gates.sw1))
        throw std::invalid_argument("unknown configuration: Y-source half not built");
    if (!opt_.include_boost && (diodes.d2 || gates.sw2))
        throw std::invalid_argument("unknown configuration: boost half not built");
    if (diodes.d2 && l2_frozen)
        throw std::invalid_argument("unknown configuration: frozen inductor with conducting diode");

    Mna net;
    net.node_idx.fill(-1);
    int m = 0;
    if (opt_.include_ysource)
        for (Mna::Node n : {Mna::A, Mna::B, Mna::P, Mna::F, Mna::S}) net.node_idx[n] = m++;
    net.node_idx[Mna::VO] = m++;
    if (opt_.include_boost) net.node_idx[Mna::X2] = m++;
    if (opt_.include_ysource) {
        net.idx_c1 = m++;
        net.idx_c2 = m++;
    }
    net.idx_co = m++;
    if (opt_.include_ysource) {
        net.idx_w1 = m++;
        net.idx_w2 = m++;
        net.idx_w3 = m++;
        net.idx_e = m++;
    }
    if (gates.sw1) net.idx_sw1 = m++;
    if (gates.sw2) net.idx_sw2 = m++;
    net.m = m;

    Eigen::MatrixXd& M = net.M;
    M = Eigen::MatrixXd::Zero(m, m);
    net.Rx = Eigen::MatrixXd::Zero(m, 6);
    net.r0 = Eigen::MatrixXd::Zero(m, 1);

    auto stampG = [&](int a, int b, double g) {
        if (a >= 0) M(a, a) += g;
        if (b >= 0) M(b, b) += g;
        if (a >= 0 && b >= 0) {
            M(a, b) -= g;
            M(b, a) -= g;
        }
    };
    // branch current unknown `br` flowing a -> b enters the KCLs
    auto stampBranchCurrent = [&](int a, int b, int br) {
        if (a >= 0) M(a, br) += 1.0;
        if (b >= 0) M(b, br) -= 1.0;
    };

    const int nA = net.nidx(Mna::A), nB = net.nidx(Mna::B), nP = net.nidx(Mna::P);
    const int nF = net.nidx(Mna::F), nS = net.nidx(Mna::S);
    const int nVO = net.nidx(Mna::VO), nX2 = net.nidx(Mna::X2);

    const double n1 = spec_.turns.n1, n2 = spec_.turns.n2, n3 = spec_.turns.n3;
    const double rl = spec_.load.value;
    stampG(nVO, -1, 1.0 / rl);

    // node anchors against floating islands
    for (int n : {nA, nB, nF, nS, nX2})
        if (n >= 0) stampG(n, -1, kLeakG);

    if (opt_.include_ysource) {
        // caps as voltage-source branches with ESR: v(a) - esr*i = v_C
        M(net.idx_c1, nF) = 1.0;
        M(net.idx_c1, net.idx_c1) = -kEsrC1;
        net.Rx(net.idx_c1, 3) = 1.0;  // v_c1
        stampBranchCurrent(nF, -1, net.idx_c1);

        M(net.idx_c2, nA) = 1.0;
        M(net.idx_c2, net.idx_c2) = -kEsrC2;
        net.Rx(net.idx_c2, 4) = 1.0;  // v_c2
        stampBranchCurrent(nA, -1, net.idx_c2);

        // windings (current into the dotted end):
        //   w1: B->P, v(B)-v(P) - rw i - n1 e = 0
        //   w2: P->S, v(P)-v(S) - rw i - n2 e = 0
        //   w3: P->F, v(P)-v(F) - rw i - n3 e = 0
        M(net.idx_w1, nB) = 1.0;
        M(net.idx_w1, nP) = -1.0;
        M(net.idx_w1, net.idx_w1) = -kWindingRes;
        M(net.idx_w1, net.idx_e) = -n1;
        stampBranchCurrent(nB, nP, net.idx_w1);

        M(net.idx_w2, nP) = 1.0;
        M(net.idx_w2, nS) = -1.0;
        M(net.idx_w2, net.idx_w2) = -kWindingRes;
        M(net.idx_w2, net.idx_e) = -n2;
        stampBranchCurrent(nP, nS, net.idx_w2);

        M(net.idx_w3, nP) = 1.0;
        M(net.idx_w3, nF) = -1.0;
        M(net.idx_w3, net.idx_w3) = -kWindingRes;
        M(net.idx_w3, net.idx_e) = -n3;
        stampBranchCurrent(nP, nF, net.idx_w3);

        // ideal-transformer ampere-turn balance; a de-energized (frozen)
        // core produces no EMF, which replaces the degenerate balance row
        if (lm_frozen) {
            M(net.idx_e, net.idx_e) = 1.0;
        } else {
            M(net.idx_e, net.idx_w1) = n1;
            M(net.idx_e, net.idx_w2) = n2;
            M(net.idx_e, net.idx_w3) = n3;
        }

        // magnetizing current (state) as injection B->P, with the core-loss
        // resistance in parallel
        if (!lm_frozen) {
            net.Rx(nB, 1) -= 1.0;
            net.Rx(nP, 1) += 1.0;
        }
        stampG(nB, nP, 1.0 / kCoreLossRes);
        // input inductor current (state) injected into A
        net.Rx(nA, 0) += 1.0;

        // D1: A->B
        if (diodes.d1) {
            const double g = 1.0 / kDiodeRon;
            stampG(nA, nB, g);
            net.r0(nA, 0) += spec_.v_diode * g;
            net.r0(nB, 0) -= spec_.v_diode * g;
        }
        // Do1: S->VO
        if (diodes.do1) {
            const double g = 1.0 / kDiodeRon;
            stampG(nS, nVO, g);
            net.r0(nS, 0) += spec_.v_diode * g;
            net.r0(nVO, 0) -= spec_.v_diode * g;
        }
        if (gates.sw1) {
            M(net.idx_sw1, nS) = 1.0;  // v(S) = 0
            stampBranchCurrent(nS, -1, net.idx_sw1);
        }
    }

    // output capacitor
    M(net.idx_co, nVO) = 1.0;
    M(net.idx_co, net.idx_co) = -kEsrCo;
    net.Rx(net.idx_co, 5) = 1.0;  // v_co
    stampBranchCurrent(nVO, -1, net.idx_co);

    if (opt_.include_boost) {
        if (!l2_frozen) net.Rx(nX2, 2) += 1.0;  // i_l2 injection
        if (diodes.d2) {
            const double g = 1.0 / kDiodeRon;
            stampG(nX2, nVO, g);
            net.r0(nX2, 0) += spec_.v_diode * g;
            net.r0(nVO, 0) -= spec_.v_diode * g;
        }
        if (gates.sw2) {
            M(net.idx_sw2, nX2) = 1.0;
            stampBranchCurrent(nX2, -1, net.idx_sw2);
        }
    }

    net.lu.compute(net.M);
    if (!net.lu.isInvertible()) {
        std::ostringstream os;
        os << "unknown configuration: singular network (sw1=" << gates.sw1
           << " sw2=" << gates.sw2 << " d1=" << diodes.d1 << " do1=" << diodes.do1
           << " d2=" << diodes.d2 << " frozen=" << l2_frozen << ")";
        throw std::invalid_argument(os.str());
    }

    // ---- reduce to dx = A x + B u + c,  y = C x + D u + y0 ----------------
    PiecewiseModel pm;
    pm.key = key;
    pm.B.setZero();
    pm.D.setZero();

    const double r1 = spec_.r_src1 + spec_.esr_l1;
    const double r2 = spec_.r_src2 + spec_.esr_l2;
    const bool l1_active = opt_.include_ysource && opt_.connect_src1;
    const bool l2_active = opt_.include_boost && opt_.connect_src2 && !l2_frozen;

    auto eval = [&](const Eigen::Matrix<double, 6, 1>& x, bool with_const) {
        // with_const=false probes the pure linear response: every constant
        // term (diode drops) must be excluded from outputs as well
        const double vf = with_const ? spec_.v_diode : 0.0;
        Eigen::VectorXd rhs = net.Rx * x;
        if (with_const) rhs += net.r0;
        Eigen::VectorXd z = net.lu.solve(rhs);

        auto nodev = [&](int n) { return n >= 0 ? z[n] : 0.0; };
        Eigen::Matrix<double, 6, 1> dx = Eigen::Matrix<double, 6, 1>::Zero();
        if (l1_active) dx[0] = (-r1 * x[0] - nodev(nA)) / spec_.l1;  // + vin1/l1 via B
        if (opt_.include_ysource && !lm_frozen)
            dx[1] = (nodev(nB) - nodev(nP) - spec_.esr_lm * x[1]) / spec_.lm;
        if (l2_active) dx[2] = (-r2 * x[2] - nodev(nX2)) / spec_.l2;  // + vin2/l2 via B
        if (opt_.include_ysource) {
            dx[3] = z[net.idx_c1] / spec_.c1;
            dx[4] = z[net.idx_c2] / spec_.c2;
        }
        dx[5] = z[net.idx_co] / spec_.co;

        Eigen::Matrix<double, PiecewiseModel::kOutputs, 1> y;
        y.setZero();
        y[out::i_src1] = l1_active ? x[0] : 0.0;
        y[out::i_src2] = l2_active ? x[2] : 0.0;
        y[out::i_load] = nodev(nVO) / rl;
        // diode quantities: current when on, forward-bias margin when off
        auto dio_q = [&](bool on, int na, int nb) {
            const double v = nodev(na) - nodev(nb);
            return on ? (v - vf) / kDiodeRon : v - vf;
        };
        if (opt_.include_ysource) {
            y[out::q_d1] = dio_q(diodes.d1, nA, nB);
            y[out::q_do1] = dio_q(diodes.do1, nS, nVO);
            y[out::i_c1] = z[net.idx_c1];
            y[out::i_c2] = z[net.idx_c2];
            y[out::i_w1] = z[net.idx_w1];
            y[out::i_w2] = z[net.idx_w2];
            y[out::i_w3] = z[net.idx_w3];
            y[out::v_a] = nodev(nA);
            y[out::v_b] = nodev(nB);
            y[out::v_p] = nodev(nP);
            y[out::v_f] = nodev(nF);
            y[out::v_s] = nodev(nS);
            if (gates.sw1) y[out::i_sw1] = z[net.idx_sw1];
        }
        if (opt_.include_boost) {
            y[out::q_d2] = dio_q(diodes.d2, nX2, nVO);
            y[out::v_x2] = nodev(nX2);
            if (gates.sw2) y[out::i_sw2] = z[net.idx_sw2];
        }
        y[out::i_co] = z[net.idx_co];
        y[out::v_out] = nodev(nVO);
        return std::make_pair(dx, y);
    };

    const auto [dx0, y00] = eval(Eigen::Matrix<double, 6, 1>::Zero(), true);
    pm.c = dx0;
    pm.y0 = y00;
    for (int j = 0; j < 6; ++j) {
        Eigen::Matrix<double, 6, 1> e = Eigen::Matrix<double, 6, 1>::Zero();
        e[j] = 1.0;
        const auto [dxj, yj] = eval(e, false);
        pm.A.col(j) = dxj;
        pm.C.col(j) = yj;
    }
    // sources enter only through the input-inductor equations
    if (l1_active) pm.B(0, 0) = 1.0 / spec_.l1;
    if (l2_active) pm.B(2, 1) = 1.0 / spec_.l2;

    auto [it, inserted] = cache_.emplace(key, std::move(pm));
    return it->second;
}

StateVector Simulator::step(const PiecewiseModel& model, const StateVector& x,
                            double dt) const {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    using Vec6 = Eigen::Matrix<double, 6, 1>;
    const Vec6 bu = model.B * u_ + model.c;
    auto f = [&](const Vec6& v) -> Vec6 { return model.A * v + bu; };
    const Vec6 x0 = x.to_vec();
    const Vec6 k1 = f(x0);
    const Vec6 k2 = f(x0 + 0.5 * dt * k1);
    const Vec6 k3 = f(x0 + 0.5 * dt * k2);
    const Vec6 k4 = f(x0 + dt * k3);
    Vec6 xn = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!xn.allFinite()) {
        std::ostringstream os;
        os << "non-finite state after step in configuration (sw1=" << model.key.gates.sw1
           << " sw2=" << model.key.gates.sw2 << " d1=" << model.key.diodes.d1
           << " do1=" << model.key.diodes.do1 << " d2=" << model.key.diodes.d2 << ")";
        throw DivergenceError(os.str(), 0.0, x);
    }
    return StateVector::from_vec(xn);
}

Eigen::Matrix<double, PiecewiseModel::kOutputs, 1> Simulator::outputs(
    const PiecewiseModel& m, const StateVector& x) const {
    return m.C * x.to_vec() + m.D * u_ + m.y0;
}

ConfigKey Simulator::resolve_diodes(const StateVector& x, const GatePair& gates) {
    struct Candidate {
        DiodeStates d;
        bool frozen;
        bool lm_frozen;
    };
    std::vector<Candidate> cands;
    const bool y_on = opt_.include_ysource;
    const bool b_on = opt_.include_boost;
    const bool l2_forced_frozen = !b_on || !opt_.connect_src2;

    for (int bit = 0; bit < 8; ++bit) {
        DiodeStates d{bool(bit & 1), bool(bit & 2), bool(bit & 4)};
        if (!y_on && (d.d1 || d.do1)) continue;
        if (!b_on && d.d2) continue;
        if (d.do1 && gates.sw1) continue;  // switch clamps the diode reverse
        if (d.d2 && gates.sw2) continue;
        // a fully blocked branch cannot carry inductor current: only the
        // clamped (frozen) variant of such configurations exists
        const bool boost_blocked = b_on && !d.d2 && !gates.sw2;
        const bool core_blocked = y_on && !d.d1 && !d.do1 && !gates.sw1;
        cands.push_back({d, boost_blocked, core_blocked});
    }

    // deterministic order: current configuration first, then by flag distance
    auto dist = [&](const Candidate& c) {
        int h = 0;
        h += c.d.d1 != current_.diodes.d1;
        h += c.d.do1 != current_.diodes.do1;
        h += c.d.d2 != current_.diodes.d2;
        h += c.frozen != current_.l2_frozen;
        h += c.lm_frozen != current_.lm_frozen;
        return h;
    };
    std::stable_sort(cands.begin(), cands.end(),
                     [&](const Candidate& a, const Candidate& b) { return dist(a) < dist(b); });

    double best_score = std::numeric_limits<double>::infinity();
    std::optional<ConfigKey> best;

    // a frozen boost branch is only physical while the source cannot
    // forward-bias the blocked diode through the idle inductor
    const bool l2_can_wake = b_on && opt_.connect_src2 &&
                             spec_.vin2 > x.v_co + spec_.v_diode - 1e-9;
    for (const auto& c : cands) {
        if (c.frozen && !l2_forced_frozen &&
            (std::abs(x.i_l2) > kL2ClampAmps || l2_can_wake))
            continue;
        if (c.lm_frozen && std::abs(x.i_lm) > kLmClampAmps) continue;
        const PiecewiseModel& m = assemble_model(gates, c.d, c.frozen, c.lm_frozen);
        const auto y = outputs(m, x);
        double vmax = 0.0;
        for (int ch : {out::v_a, out::v_b, out::v_p, out::v_f, out::v_s, out::v_out, out::v_x2})
            vmax = std::max(vmax, std::abs(y[ch]));
        if (vmax > kSaneVolts) continue;

        double viol = 0.0;
        auto check = [&](bool on, int ch) {
            if (on)
                viol = std::max(viol, std::max(0.0, -y[ch] - kDiodeTolI));
            else
                viol = std::max(viol, std::max(0.0, y[ch] - kDiodeTolV));
        };
        if (y_on) {
            check(c.d.d1, out::q_d1);
            check(c.d.do1, out::q_do1);
        }
        if (b_on) check(c.d.d2, out::q_d2);

        if (viol == 0.0) {
            current_ = ConfigKey{gates, c.d, c.frozen, c.lm_frozen};
            return current_;
        }
        if (viol < best_score) {
            best_score = viol;
            best = ConfigKey{gates, c.d, c.frozen, c.lm_frozen};
        }
    }

    if (!best) {
        std::ostringstream os;
        os << "no consistent diode configuration at state i_l1=" << x.i_l1
           << " i_lm=" << x.i_lm << " i_l2=" << x.i_l2 << " v_c1=" << x.v_c1
           << " v_c2=" << x.v_c2 << " v_co=" << x.v_co;
        throw NoConsistentConfigError(os.str(), x);
    }
    ++forced_samples_;
    current_ = *best;
    return current_;
}

double Simulator::conduction_power(
    const ConfigKey& cfg, const StateVector& x,
    const Eigen::Matrix<double, PiecewiseModel::kOutputs, 1>& y) const {
    double p = 0.0;
    const double r1 = spec_.r_src1 + spec_.esr_l1;
    const double r2 = spec_.r_src2 + spec_.esr_l2;
    if (opt_.include_ysource && opt_.connect_src1) p += r1 * x.i_l1 * x.i_l1;
    if (opt_.include_boost && opt_.connect_src2) p += r2 * x.i_l2 * x.i_l2;
    if (opt_.include_ysource) {
        p += spec_.esr_lm * x.i_lm * x.i_lm;
        const double v_lm = y[out::v_b] - y[out::v_p];
        p += v_lm * v_lm / kCoreLossRes;
        p += kWindingRes * (y[out::i_w1] * y[out::i_w1] + y[out::i_w2] * y[out::i_w2] +
                            y[out::i_w3] * y[out::i_w3]);
        p += kEsrC1 * y[out::i_c1] * y[out::i_c1];
        p += kEsrC2 * y[out::i_c2] * y[out::i_c2];
        if (cfg.diodes.d1)
            p += spec_.v_diode * y[out::q_d1] + kDiodeRon * y[out::q_d1] * y[out::q_d1];
        if (cfg.diodes.do1)
            p += spec_.v_diode * y[out::q_do1] + kDiodeRon * y[out::q_do1] * y[out::q_do1];
    }
    if (opt_.include_boost && cfg.diodes.d2)
        p += spec_.v_diode * y[out::q_d2] + kDiodeRon * y[out::q_d2] * y[out::q_d2];
    p += kEsrCo * y[out::i_co] * y[out::i_co];
    return p;
}

void Simulator::record_sample(Waveforms& w, double t, const StateVector& x,
                              const GatePair& g, const ConfigKey& cfg,
                              const Eigen::Matrix<double, PiecewiseModel::kOutputs, 1>& y) {
    w.t.push_back(t);
    w.x.push_back(x);
    w.gates.push_back(g);
    w.mode.push_back(mode_of(g));
    w.i_src1.push_back(y[out::i_src1]);
    w.i_src2.push_back(y[out::i_src2]);
    w.i_load.push_back(y[out::i_load]);
    w.v_load.push_back(y[out::v_out]);
    w.p_cond.push_back(conduction_power(cfg, x, y));
    w.diodes.push_back(cfg.diodes);
}

void Simulator::simulate_period(const PwmConfig& pwm, double t0, StateVector& x,
                                Waveforms* record) {
    const double period = 1.0 / pwm.fsw;
    const auto edges = edges_in_period(pwm);
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        const double seg = edges[j + 1] - edges[j];
        // gates are piecewise-constant between edges; classify the segment
        // by its midpoint in period-local time (immune to global-t rounding)
        const double mid = 0.5 * (edges[j] + edges[j + 1]);
        GatePair g{mid < pwm.d1 * period, mid < pwm.d2 * period};
        g.sw1 = g.sw1 && opt_.include_ysource;
        g.sw2 = g.sw2 && opt_.include_boost;
        const int nsub = std::max(
            1, static_cast<int>(std::llround(opt_.samples_per_period * seg / period)));
        const double h = seg / nsub;
        for (int k = 0; k < nsub; ++k) {
            const double t = t0 + edges[j] + k * h;
            ConfigKey cfg = resolve_diodes(x, g);
            if (cfg.l2_frozen) x.i_l2 = 0.0;
            if (cfg.lm_frozen) x.i_lm = 0.0;
            const PiecewiseModel& m =
                assemble_model(g, cfg.diodes, cfg.l2_frozen, cfg.lm_frozen);
            if (record) record_sample(*record, t, x, g, cfg, outputs(m, x));
            x = step(m, x, h);
            const double norm = x.to_vec().cwiseAbs().maxCoeff();
            if (norm > opt_.divergence_limit) {
                std::ostringstream os;
                os << "state diverged (|x|max = " << norm << " at t = " << t + h << " s)";
                throw DivergenceError(os.str(), t + h, x);
            }
        }
    }
}

Waveforms Simulator::simulate(const PwmConfig& pwm, double t_end) {
    if (pwm.fsw != spec_.fsw)
        throw std::invalid_argument("pwm.fsw must match the circuit switching frequency");
    Waveforms w;
    w.fsw = pwm.fsw;
    w.samples_per_period = opt_.samples_per_period;
    StateVector x = opt_.initial_state;
    const double period = 1.0 / pwm.fsw;
    const int nper = std::max(1, static_cast<int>(std::ceil(t_end / period - 1e-9)));
    for (int p = 0; p < nper; ++p) simulate_period(pwm, p * period, x, &w);
    // closing sample at the horizon end (period start: both leading edges)
    GatePair g{pwm.d1 > 0.0, pwm.d2 > 0.0};
    g.sw1 = g.sw1 && opt_.include_ysource;
    g.sw2 = g.sw2 && opt_.include_boost;
    ConfigKey cfg = resolve_diodes(x, g);
    if (cfg.l2_frozen) x.i_l2 = 0.0;
    if (cfg.lm_frozen) x.i_lm = 0.0;
    const PiecewiseModel& m =
        assemble_model(g, cfg.diodes, cfg.l2_frozen, cfg.lm_frozen);
    record_sample(w, nper * period, x, g, cfg, outputs(m, x));
    return w;
}

StateVector Simulator::steady_seed(const CircuitSpec& spec, const PwmConfig& pwm,
                                   const SimOptions& opt) {
    const double delta = delta_from_turns(spec.turns);
    double g1 = 0.0, g2 = 0.0;
    if (opt.include_ysource && opt.connect_src1 && delta * pwm.d1 < 0.95)
        g1 = 1.0 / (1.0 - delta * pwm.d1);
    if (opt.include_boost && opt.connect_src2 && pwm.d2 < 0.95)
        g2 = 1.0 / (1.0 - pwm.d2);
    double vo = std::max(g1 * spec.vin1, g2 * spec.vin2);
    if (vo <= 0.0) vo = std::max(spec.vin1, spec.vin2);
    const double rl = spec.load.resistance_at(vo);
    const double p_out = vo * vo / rl;

    // open-loop droop split: output-referred source resistances
    double w1 = 0.0, w2 = 0.0;
    if (g1 > 0.0) {
        const double r_eff = (spec.r_src1 + spec.esr_l1 + 0.1) * g1 * g1 + 0.5;
        w1 = 1.0 / r_eff;
    }
    if (g2 > 0.0) {
        const double r_eff = (spec.r_src2 + spec.esr_l2 + 0.05) * g2 * g2 + 0.1;
        w2 = 1.0 / r_eff;
    }
    const double wsum = w1 + w2 > 0.0 ? w1 + w2 : 1.0;
    const double p1 = p_out * w1 / wsum;
    const double p2 = p_out * w2 / wsum;

    StateVector x;
    x.v_co = vo;
    const double i_load = vo / rl;
    if (opt.include_ysource) {
        x.i_l1 = opt.connect_src1 ? p1 / spec.vin1 : 0.0;
        // magnetizing DC from the ampere-turn averages of this topology:
        // <i_w1> = i_l1 - i_m together with the MMF and output-side means
        x.i_lm = opt.connect_src1 && g1 > 0.0
                     ? 1.43 * x.i_l1 + 0.95 * i_load * (w1 / wsum)
                     : 0.0;
        x.v_c1 = (1.0 - pwm.d1) * vo;
        x.v_c2 = spec.vin1;
    }
    if (opt.include_boost && opt.connect_src2) x.i_l2 = p2 / spec.vin2;
    return x;
}

SteadyResult Simulator::run_to_steady(const PwmConfig& pwm, int max_periods) {
    if (pwm.fsw != spec_.fsw)
        throw std::invalid_argument("pwm.fsw must match the circuit switching frequency");
    const double period = 1.0 / pwm.fsw;
    StateVector x = opt_.initial_state;

    SteadyResult res;
    forced_samples_ = 0;

    // Steady needs the spec's consecutive-boundary test (< 1e-4 relative)
    // plus an envelope guard over the last kLag boundaries: a lag-1 test
    // alone false-triggers at the turning points of slow settling
    // envelopes, where the state is momentarily stationary.
    constexpr int kLag = 32;
    std::vector<Eigen::Matrix<double, 6, 1>> ring;
    ring.reserve(kLag);
    int p = 0;
    bool steady = false;
    for (; p < max_periods; ++p) {
        simulate_period(pwm, p * period, x, nullptr);
        const Eigen::Matrix<double, 6, 1> cur = x.to_vec();
        const double scale = std::max(cur.cwiseAbs().maxCoeff(), 1e-6);
        double lag1 = 1.0, envelope = 1.0;
        if (!ring.empty()) {
            lag1 = (cur - ring.back()).cwiseAbs().maxCoeff() / scale;
            envelope = 0.0;
            for (const auto& past : ring)
                envelope = std::max(
                    envelope, (cur - past).cwiseAbs().maxCoeff() / scale);
        }
        res.residual = lag1;
        if (ring.size() == kLag) ring.erase(ring.begin());
        ring.push_back(cur);
        if (ring.size() > kLag / 2 && lag1 < 1e-4 && envelope < 1e-3) {
            steady = true;
            break;
        }
    }
    res.converged = steady;
    res.periods_run = p + 1;

    // The detected point must also pass an energy audit: a window whose
    // input, output, dissipation, and stored-energy change do not balance
    // is still settling no matter how quiet the boundary states look.
    auto window_balanced = [&](const Waveforms& w, const StateVector& x0,
                               const StateVector& x1) {
        if (w.size() < 2) return false;
        double e_in = 0.0, e_out = 0.0, e_loss = 0.0;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            const double dt = w.t[i + 1] - w.t[i];
            e_in += 0.5 * dt *
                    (spec_.vin1 * (w.i_src1[i] + w.i_src1[i + 1]) +
                     spec_.vin2 * (w.i_src2[i] + w.i_src2[i + 1]));
            e_out += 0.5 * dt *
                     (w.v_load[i] * w.i_load[i] + w.v_load[i + 1] * w.i_load[i + 1]);
            e_loss += 0.5 * dt * (w.p_cond[i] + w.p_cond[i + 1]);
        }
        auto stored = [&](const StateVector& s) {
            return 0.5 * (spec_.l1 * s.i_l1 * s.i_l1 + spec_.lm * s.i_lm * s.i_lm +
                          spec_.l2 * s.i_l2 * s.i_l2 + spec_.c1 * s.v_c1 * s.v_c1 +
                          spec_.c2 * s.v_c2 * s.v_c2 + spec_.co * s.v_co * s.v_co);
        };
        const double de = stored(x1) - stored(x0);
        const double denom = std::max({std::abs(e_in), std::abs(e_out), 1e-12});
        // periodicity in energy terms: the stored energy must not drift
        // across the window (the in/out/loss books balance identically)
        return std::abs(de) / denom < 2e-3;
    };

    // fixed 10-period measurement window
    res.window.fsw = pwm.fsw;
    res.window.samples_per_period = opt_.samples_per_period;
    double t_base = res.periods_run * period;
    for (int attempt = 0; attempt < 50; ++attempt) {
        Waveforms trial;
        trial.fsw = pwm.fsw;
        trial.samples_per_period = opt_.samples_per_period;
        const StateVector x0 = x;
        for (int k = 0; k < 10; ++k)
            simulate_period(pwm, t_base + k * period, x, &trial);
        t_base += 10 * period;
        res.periods_run += 10;
        if (!res.converged || window_balanced(trial, x0, x) ||
            res.periods_run + 510 > max_periods) {
            res.window = std::move(trial);
            break;
        }
        // still settling: run on before re-recording
        for (int k = 0; k < 500 && res.periods_run < max_periods; ++k) {
            simulate_period(pwm, t_base, x, nullptr);
            t_base += period;
            ++res.periods_run;
        }
    }
    {
        GatePair g{pwm.d1 > 0.0, pwm.d2 > 0.0};
        g.sw1 = g.sw1 && opt_.include_ysource;
        g.sw2 = g.sw2 && opt_.include_boost;
        ConfigKey cfg = resolve_diodes(x, g);
        if (cfg.l2_frozen) x.i_l2 = 0.0;
        if (cfg.lm_frozen) x.i_lm = 0.0;
        const PiecewiseModel& m =
            assemble_model(g, cfg.diodes, cfg.l2_frozen, cfg.lm_frozen);
        record_sample(res.window, t_base, x, g, cfg, outputs(m, x));
    }
    res.x_end = x;
    // DCM: an inductor current fails to stay positive across the period
    double min_l1 = 1e30, min_lm = 1e30, min_l2 = 1e30;
    for (const StateVector& s : res.window.x) {
        min_l1 = std::min(min_l1, s.i_l1);
        min_lm = std::min(min_lm, s.i_lm);
        min_l2 = std::min(min_l2, s.i_l2);
    }
    res.dcm_ysource = opt_.include_ysource && opt_.connect_src1 && pwm.d1 > 0.0 &&
                      (min_l1 <= 1e-9 || min_lm <= 1e-9);
    res.dcm_boost = opt_.include_boost && opt_.connect_src2 &&
                    (min_l2 <= 1e-9 && pwm.d2 > 0.0);
    res.forced_config_samples = forced_samples_;
    return res;
}

}  // namespace dicsim
