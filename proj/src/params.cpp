#include "dicsim/params.hpp"

#include <cmath>
#include <sstream>

namespace dicsim {

double delta_from_turns(const TurnsRatio& turns) {
    if (turns.n1 <= 0 || turns.n2 <= 0 || turns.n3 <= 0)
        throw std::domain_error("turns counts must be positive");
    if (turns.n2 <= turns.n3)
        throw std::domain_error("degenerate winding factor: n2 must exceed n3");
    return static_cast<double>(turns.n1 + turns.n2) /
           static_cast<double>(turns.n2 - turns.n3);
}

CircuitSpec CircuitSpec::ideal() const {
    CircuitSpec s = *this;
    s.r_src1 = s.r_src2 = 0.0;
    s.esr_l1 = s.esr_l2 = s.esr_lm = 0.0;
    s.v_diode = 0.0;
    s.k_ovl = 0.0;
    s.p_gate = 0.0;
    return s;
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error([&violations] {
          std::ostringstream os;
          os << "invalid circuit spec (" << violations.size() << " violation"
             << (violations.size() == 1 ? "" : "s") << "):";
          for (const auto& v : violations) os << "\n  " << v.field << ": " << v.message;
          return os.str();
      }()),
      violations_(std::move(violations)) {}

CircuitSpec validate(const CircuitSpec& spec, std::vector<std::string>* warnings) {
    std::vector<Violation> v;
    auto positive = [&v](double x, const char* name, const char* what) {
        if (!(x > 0.0) || !std::isfinite(x)) v.push_back({name, what});
    };
    auto nonnegative = [&v](double x, const char* name) {
        if (!(x >= 0.0) || !std::isfinite(x)) v.push_back({name, "must be >= 0 and finite"});
    };

    positive(spec.vin1, "vin1", "non-positive source voltage");
    positive(spec.vin2, "vin2", "non-positive source voltage");
    positive(spec.l1, "l1", "non-positive inductance");
    positive(spec.l2, "l2", "non-positive inductance");
    positive(spec.lm, "lm", "non-positive inductance");
    positive(spec.c1, "c1", "non-positive capacitance");
    positive(spec.c2, "c2", "non-positive capacitance");
    positive(spec.co, "co", "non-positive capacitance");
    positive(spec.fsw, "fsw", "non-positive frequency");

    if (spec.turns.n1 <= 0 || spec.turns.n2 <= 0 || spec.turns.n3 <= 0)
        v.push_back({"turns", "turns counts must be positive"});
    else if (spec.turns.n2 <= spec.turns.n3)
        v.push_back({"turns", "degenerate winding factor: n2 must exceed n3"});

    nonnegative(spec.r_src1, "r_src1");
    nonnegative(spec.r_src2, "r_src2");
    nonnegative(spec.esr_l1, "esr_l1");
    nonnegative(spec.esr_l2, "esr_l2");
    nonnegative(spec.esr_lm, "esr_lm");
    nonnegative(spec.v_diode, "v_diode");
    nonnegative(spec.k_ovl, "k_ovl");
    nonnegative(spec.p_gate, "p_gate");

    if (!(spec.load.value > 0.0) || !std::isfinite(spec.load.value))
        v.push_back({"load", "load resistance/power must be positive"});

    if (!v.empty()) throw ValidationError(std::move(v));

    if (warnings && spec.vin1 >= spec.vin2)
        warnings->push_back(
            "vin1 >= vin2: the quasi Y-source is meant for the lower-voltage "
            "source (higher gain); results remain well-defined");
    return spec;
}

}  // namespace dicsim
