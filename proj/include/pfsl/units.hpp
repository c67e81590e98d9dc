#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace pfsl {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

// Thermal voltage kT/q at 300 K.
inline constexpr double kThermalVoltage = 0.025852;

inline double omega_from_hz(double f_hz) { return 2.0 * kPi * f_hz; }

// Power conversions. Stored quantities are SI (watts); dBm is presentation only.
inline double dbm_from_watts(double p_w) { return 10.0 * std::log10(p_w / 1e-3); }
inline double watts_from_dbm(double p_dbm) { return 1e-3 * std::pow(10.0, p_dbm / 10.0); }

inline double db_from_power_ratio(double ratio) { return 10.0 * std::log10(ratio); }
inline double db_from_mag(double mag) { return 20.0 * std::log10(mag); }

// Peak EMF of a generator with source resistance z0 and available power p_w.
inline double emf_from_available_power(double p_w, double z0) {
    return std::sqrt(8.0 * z0 * p_w);
}

inline double available_power_from_emf(double emf_peak, double z0) {
    return emf_peak * emf_peak / (8.0 * z0);
}

}  // namespace pfsl
