#pragma once

// CSV emission for waveforms and sweep tables. Fixed formatting (10
// significant digits) so identical runs produce byte-identical files.

#include <ostream>
#include <string>

#include "dicsim/analysis.hpp"
#include "dicsim/simulator.hpp"

namespace dicsim {

/// Header: t,i_l1,i_lm,i_l2,v_c1,v_c2,v_co,i_src1,i_src2,i_load,sw1,sw2,mode
void write_waveforms_csv(std::ostream& os, const Waveforms& w);
void write_waveforms_csv(const std::string& path, const Waveforms& w);

/// Header: p_out_req,vo_avg,vo_ripple_pp,p_in1,p_in2,p_out,eta,share1,
///         share2,p_loss_cond,p_loss_ovl,p_loss_gate,dcm1,dcm2
/// Failed rows carry NaN in every numeric column.
void write_sweep_csv(std::ostream& os, const SweepTable& table);
void write_sweep_csv(const std::string& path, const SweepTable& table);

}  // namespace dicsim
