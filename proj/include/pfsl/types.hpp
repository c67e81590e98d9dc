#pragma once

#include <cmath>

#include "pfsl/errors.hpp"
#include "pfsl/units.hpp"

namespace pfsl {

// Operating point shared by design and simulation: port impedance, the
// frequency where the threshold is minimized, and the passive-component Q.
struct DesignPoint {
    double z0 = 50.0;        // port termination, ohms
    double f_in_opt = 2.1e9; // input frequency of minimum threshold, Hz
    double q_l = 2000.0;     // passive-component quality factor at f_in_opt

    double omega_in() const { return omega_from_hz(f_in_opt); }
    double omega_d() const { return omega_in() / 2.0; }
    double f_d() const { return f_in_opt / 2.0; }

    void validate() const {
        if (z0 <= 0 || f_in_opt <= 0 || q_l <= 0) {
            throw DomainError("design point requires z0 > 0, f_in_opt > 0, q_l > 0");
        }
    }
};

// Quarter-wave transformation stage, lumped C-L-C realization.
struct TransformerSpec {
    double z_tx = 0.0;  // characteristic impedance, ohms
    double l_t = 0.0;   // series inductance, H
    double c_t = 0.0;   // shunt capacitance (each side), F

    void validate() const {
        if (z_tx <= 0 || l_t <= 0 || c_t <= 0) {
            throw DomainError("transformer values must be positive");
        }
        const double z = std::sqrt(l_t / c_t);
        if (std::abs(z - z_tx) > 1e-9 * z_tx) {
            throw DomainError("transformer z_tx inconsistent with sqrt(l_t/c_t)");
        }
    }
};

// The six branch impedances seen from the T-junction node toward each branch,
// at the input frequency and its subharmonic, plus the shunt-branch input
// impedance seen from the port node.
struct ImpedanceSet {
    cplx z1_in, z2_in, z3_in;  // at omega_in
    cplx z1_d, z2_d, z3_d;     // at omega_d
    cplx z_in;                 // at omega_in, seen from the port node into the branch
};

// Series loss resistances entering the resonant-condition threshold form.
struct AnalyticLosses {
    double r_s = 0.0;  // series loss of the input-frequency loop (diode + passives)
    double r_d = 0.0;  // series loss of the subharmonic loop
    double r_p = 0.0;  // r_s plus the transformed port resistance
};

}  // namespace pfsl
