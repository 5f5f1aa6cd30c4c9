#include "dicsim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dicsim {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    return f;
}

}  // namespace

void write_waveforms_csv(std::ostream& os, const Waveforms& w) {
    os << "t,i_l1,i_lm,i_l2,v_c1,v_c2,v_co,i_src1,i_src2,i_load,sw1,sw2,mode\n";
    for (std::size_t i = 0; i < w.size(); ++i) {
        const StateVector& x = w.x[i];
        os << fmt(w.t[i]) << ',' << fmt(x.i_l1) << ',' << fmt(x.i_lm) << ','
           << fmt(x.i_l2) << ',' << fmt(x.v_c1) << ',' << fmt(x.v_c2) << ','
           << fmt(x.v_co) << ',' << fmt(w.i_src1[i]) << ',' << fmt(w.i_src2[i])
           << ',' << fmt(w.i_load[i]) << ',' << int(w.gates[i].sw1) << ','
           << int(w.gates[i].sw2) << ',' << int(w.mode[i]) << '\n';
    }
}

void write_waveforms_csv(const std::string& path, const Waveforms& w) {
    auto f = open_or_throw(path);
    write_waveforms_csv(f, w);
}

void write_sweep_csv(std::ostream& os, const SweepTable& table) {
    os << "p_out_req,vo_avg,vo_ripple_pp,p_in1,p_in2,p_out,eta,share1,share2,"
          "p_loss_cond,p_loss_ovl,p_loss_gate,dcm1,dcm2\n";
    for (const auto& row : table.rows) {
        os << fmt(row.p_out_requested);
        if (row.report) {
            const RunReport& r = *row.report;
            os << ',' << fmt(r.vo_avg) << ',' << fmt(r.vo_ripple_pp) << ','
               << fmt(r.p_in1) << ',' << fmt(r.p_in2) << ',' << fmt(r.p_out) << ','
               << fmt(r.efficiency) << ',' << fmt(r.share1) << ',' << fmt(r.share2)
               << ',' << fmt(r.p_loss_conduction) << ',' << fmt(r.p_loss_overlap)
               << ',' << fmt(r.p_loss_gate) << ',' << int(r.dcm_ysource) << ','
               << int(r.dcm_boost) << '\n';
        } else {
            os << ",nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,0,0\n";
        }
    }
}

void write_sweep_csv(const std::string& path, const SweepTable& table) {
    auto f = open_or_throw(path);
    write_sweep_csv(f, table);
}

}  // namespace dicsim
