#pragma once

// Parameter model of the double-input converter: physical values for the
// quasi Y-source half, the boost half, the shared output, and the load.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dicsim {

/// Turns counts of the three-winding transformer. Physical winding counts,
/// so integers; the winding factor delta may still be fractional.
struct TurnsRatio {
    int n1 = 3;
    int n2 = 2;
    int n3 = 1;
};

/// Winding factor delta = (n1 + n2) / (n2 - n3).
/// Throws std::domain_error ("degenerate winding factor") when n2 <= n3.
double delta_from_turns(const TurnsRatio& turns);

/// Load given either as a resistance or as a target output power.
struct LoadSpec {
    enum class Kind { Resistance, Power };
    Kind kind = Kind::Resistance;
    double value = 92.16;  // ohms or watts depending on kind

    static LoadSpec resistance(double ohms) { return {Kind::Resistance, ohms}; }
    static LoadSpec power(double watts) { return {Kind::Power, watts}; }

    /// Load resistance for a given target output voltage.
    double resistance_at(double vo_target) const {
        return kind == Kind::Resistance ? value : vo_target * vo_target / value;
    }
};

/// All physical parameters of both converters, their sources, and the load.
///
/// Defaults are the paper-style bench values: 12 V / 24 V sources, 1 mH
/// input inductors, 470 uF / 150 uF / 470 uF capacitors, 3:2:1 turns,
/// 20 kHz switching. Parasitics (lm, esr_*, v_diode, r_src*) and the loss
/// coefficients (k_ovl, p_gate) are engineering defaults, not bench data.
struct CircuitSpec {
    double vin1 = 12.0;   // quasi Y-source input, the lower-voltage source
    double vin2 = 24.0;   // boost input
    double l1 = 1e-3;     // Y-source input inductor
    double l2 = 1e-3;     // boost input inductor
    double lm = 1e-3;     // magnetizing inductance, winding-1 referred
    double c1 = 470e-6;   // DC blocking capacitor C1
    double c2 = 150e-6;   // DC blocking capacitor C2
    double co = 470e-6;   // output capacitor
    TurnsRatio turns;
    double fsw = 20e3;    // switching frequency

    double r_src1 = 0.1;  // source internal resistances
    double r_src2 = 0.05;
    double esr_l1 = 0.05; // inductor / winding series resistances
    double esr_l2 = 0.05;
    double esr_lm = 0.05;
    double v_diode = 0.7; // diode forward drop
    double k_ovl = 1.0;   // V-I overlap loss coefficient (dimensionless)
    double p_gate = 0.6;  // fixed gate-drive loss per channel, watts

    LoadSpec load = LoadSpec::resistance(92.16);

    /// Copy with every loss parameter zeroed (esr_*, r_src*, v_diode,
    /// k_ovl, p_gate). Inductances, capacitances and turns are untouched.
    CircuitSpec ideal() const;
};

/// One invariant violation found by validate().
struct Violation {
    std::string field;
    std::string message;
};

/// Raised by validate() when the spec breaks an invariant; carries the
/// complete list of violations, not just the first.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Checks every CircuitSpec invariant and returns the spec unchanged when
/// all hold. Collects all violations before throwing. vin1 >= vin2 is a
/// warning only (returned via `warnings` when non-null).
CircuitSpec validate(const CircuitSpec& spec,
                     std::vector<std::string>* warnings = nullptr);

}  // namespace dicsim
