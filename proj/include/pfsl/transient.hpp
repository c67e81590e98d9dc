#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pfsl/hb.hpp"
#include "pfsl/netlist.hpp"

namespace pfsl {

struct TransientOptions {
    double newton_tol = 1e-12;  // relative per-step tolerance
    int max_newton = 60;
};

struct Waveform {
    double dt = 0.0;
    double duration = 0.0;
    ElaboratedNetlist elab;
    Eigen::MatrixXd v;  // (steps + 1) x compact nodes, v.row(0) = t = 0
    std::vector<double> p_source;      // instantaneous EMF power per step
    std::vector<double> p_dissipated;  // resistive + conduction power per step

    size_t steps() const { return v.rows() ? static_cast<size_t>(v.rows() - 1) : 0; }
    double node_at(int original_node, size_t step) const;
    // Voltage across the named varactor's junction per step.
    std::vector<double> junction_voltage(const std::string& element_name) const;
};

// Trapezoidal integration with a charge-based varactor model and per-step
// Newton. Sources start from zero phase (sine).
Waveform transient_solve(const Netlist& net, double duration_s, double dt_s,
                         const TransientOptions& opts = {});

// Rectangular DFT over the final n_periods of 1/f0 at exact multiples of f0.
// Requires dt to divide the period and the analysis window to fit after an
// 80% settling discard.
HarmonicSpectrum steady_state_spectrum(const Waveform& w, int original_node, double f0,
                                       int n_periods = 64);

// Same windowed DFT on an arbitrary per-step signal (e.g. a junction voltage).
HarmonicSpectrum spectrum_of_signal(const Waveform& w, const std::vector<double>& signal,
                                    double f0, int n_periods = 64);

// Mean source and dissipated power over the final whole cycle of 1/f0.
struct EnergyAudit {
    double p_source_w = 0.0;
    double p_dissipated_w = 0.0;
};
EnergyAudit energy_audit(const Waveform& w, double f0);

}  // namespace pfsl
