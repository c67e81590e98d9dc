#include "pfsl/varactor.hpp"

#include <cmath>
#include <string>

#include "pfsl/units.hpp"

namespace pfsl {

namespace {

// Forward-bias continuation point for the junction power law, as a fraction
// of v_j (SPICE-style FC).
constexpr double kFc = 0.5;
// Junction capacitance ceiling (multiple of c_j0) deep into forward swing,
// far past where conduction clamps the voltage.
constexpr double kCapCeilFrac = 50.0;
// Exponent limit beyond which the conduction exponential is linearized.
constexpr double kExpArgLimit = 45.0;

double junction_cap_power_law(const VaractorModel& m, double u) {
    return m.c_j0 * std::pow(1.0 + u / m.v_j, -m.gamma);
}

// Antiderivative of the power-law junction capacitance, zero at u = 0.
double junction_charge_power_law(const VaractorModel& m, double u) {
    if (std::abs(m.gamma - 1.0) < 1e-12) {
        return m.c_j0 * m.v_j * std::log1p(u / m.v_j);
    }
    const double e = 1.0 - m.gamma;
    return m.c_j0 * m.v_j / e * (std::pow(1.0 + u / m.v_j, e) - 1.0);
}

struct LinearRegion {
    double u_lin;   // continuation point (negative)
    double c_lin;   // C at u_lin
    double slope;   // dC/du at u_lin (negative; C grows into forward swing)
    double u_cap;   // where the continuation reaches the ceiling (< u_lin)
    double c_cap;
};

LinearRegion linear_region(const VaractorModel& m) {
    LinearRegion r;
    r.u_lin = -kFc * m.v_j;
    r.c_lin = junction_cap_power_law(m, r.u_lin);
    r.slope = -m.gamma / m.v_j * m.c_j0 * std::pow(1.0 - kFc, -m.gamma - 1.0);
    r.c_cap = kCapCeilFrac * m.c_j0;
    r.u_cap = r.u_lin + (r.c_cap - r.c_lin) / r.slope;
    return r;
}

}  // namespace

void VaractorModel::validate() const {
    if (c_j0 <= 0 || v_j <= 0 || gamma <= 0 || q_v <= 0 || v_bi <= 0 || i_s <= 0 ||
        n_ideality <= 0 || c_pkg < 0 || v_breakdown <= 0) {
        throw DomainError("varactor model parameters must be positive (c_pkg may be zero)");
    }
}

double varactor_capacitance(const VaractorModel& m, double u) {
    const LinearRegion r = linear_region(m);
    double cj;
    if (u >= r.u_lin) {
        cj = junction_cap_power_law(m, u);
    } else if (u >= r.u_cap) {
        cj = r.c_lin + r.slope * (u - r.u_lin);
    } else {
        cj = r.c_cap;
    }
    return m.c_pkg + cj;
}

double varactor_charge(const VaractorModel& m, double u) {
    const LinearRegion r = linear_region(m);
    double qj;
    if (u >= r.u_lin) {
        qj = junction_charge_power_law(m, u);
    } else {
        const double q_at_lin = junction_charge_power_law(m, r.u_lin);
        if (u >= r.u_cap) {
            const double d = u - r.u_lin;
            qj = q_at_lin + r.c_lin * d + 0.5 * r.slope * d * d;
        } else {
            const double dl = r.u_cap - r.u_lin;
            const double q_at_cap = q_at_lin + r.c_lin * dl + 0.5 * r.slope * dl * dl;
            qj = q_at_cap + r.c_cap * (u - r.u_cap);
        }
    }
    return m.c_pkg * u + qj;
}

double varactor_conduction_current(const VaractorModel& m, double u) {
    const double a = -u / (m.n_ideality * kThermalVoltage);
    if (a <= kExpArgLimit) {
        return -m.i_s * std::expm1(a);
    }
    const double e = std::exp(kExpArgLimit);
    return -m.i_s * (e * (1.0 + (a - kExpArgLimit)) - 1.0);
}

double varactor_conduction_conductance(const VaractorModel& m, double u) {
    const double vt = m.n_ideality * kThermalVoltage;
    const double a = -u / vt;
    if (a <= kExpArgLimit) {
        return m.i_s / vt * std::exp(a);
    }
    return m.i_s / vt * std::exp(kExpArgLimit);
}

BiasedVaractor capacitance_at_bias(const VaractorModel& m, double v_dc) {
    m.validate();
    if (v_dc < 0.0 || v_dc >= m.v_breakdown) {
        throw DomainError("varactor bias " + std::to_string(v_dc) +
                          " V outside [0, " + std::to_string(m.v_breakdown) + ") V");
    }
    BiasedVaractor dv;
    dv.model = m;
    dv.v_dc = v_dc;
    dv.c_v = varactor_capacitance(m, v_dc);
    const double dcdv = -m.gamma / (m.v_j + v_dc) * junction_cap_power_law(m, v_dc);
    dv.delta = std::abs(dcdv) * 1.0 / dv.c_v;
    return dv;
}

double component_series_resistance(ReactiveKind kind, double value, double q, double f_ref) {
    if (value <= 0 || q <= 0 || f_ref <= 0) {
        throw DomainError("component_series_resistance requires positive value, q, f_ref");
    }
    if (std::isinf(q)) return 0.0;
    const double w = omega_from_hz(f_ref);
    return kind == ReactiveKind::Inductor ? w * value / q : 1.0 / (w * value * q);
}

}  // namespace pfsl
