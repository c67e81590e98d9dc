#pragma once

#include "pfsl/errors.hpp"

namespace pfsl {

// Graded-junction varactor: C(u) = c_pkg + c_j0/(1 + u/v_j)^gamma for reverse
// bias u, plus exponential junction conduction once the RF swing drives the
// junction into forward conduction.
struct VaractorModel {
    double c_j0 = 4.14333e-12;   // zero-bias junction capacitance, F
    double v_j = 0.8;            // junction potential, V
    double gamma = 1.1;          // grading exponent
    double q_v = 15.0;           // quality factor at the design frequency
    double v_bi = 0.7;           // built-in voltage, V
    double i_s = 1e-14;          // saturation current, A
    double n_ideality = 1.05;
    double c_pkg = 0.4e-12;      // package parasitic capacitance, F
    double v_breakdown = 15.0;   // usable reverse-bias range, V

    void validate() const;
};

// Varactor linearized about a DC bias point.
struct BiasedVaractor {
    VaractorModel model;
    double v_dc = 0.0;   // reverse bias, V
    double c_v = 0.0;    // total linearized capacitance at bias (incl. package), F
    double delta = 0.0;  // |dC/dV| * 1V / c_v, dimensionless per-volt slope
};

// Total capacitance at reverse bias u (can go negative during RF swing).
// Below -0.5*v_j the power law is continued linearly and floored.
double varactor_capacitance(const VaractorModel& m, double u);

// Charge relative to u = 0: integral of varactor_capacitance from 0 to u.
double varactor_charge(const VaractorModel& m, double u);

// Junction conduction current through the element (positive from the reverse-
// biased terminal toward the grounded one) at total reverse bias u.
double varactor_conduction_current(const VaractorModel& m, double u);

// d(conduction current)/du.
double varactor_conduction_conductance(const VaractorModel& m, double u);

// Linearize the C-V law about v_dc. Throws DomainError for bias outside
// [0, v_breakdown].
BiasedVaractor capacitance_at_bias(const VaractorModel& m, double v_dc);

// Series loss resistance of a finite-Q inductor or capacitor at f_ref.
enum class ReactiveKind { Inductor, Capacitor };
double component_series_resistance(ReactiveKind kind, double value, double q, double f_ref);

}  // namespace pfsl
