#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pfsl/analytic.hpp"
#include "pfsl/netlist.hpp"
#include "pfsl/types.hpp"

namespace pfsl {

struct SParameters {
    double frequency = 0.0;
    cplx s11, s21, s12, s22;
};

// Node voltages from a single-frequency phasor solve. Sources whose frequency
// matches the analysis frequency drive the network; every source impedance is
// stamped as a passive branch.
struct AcSolution {
    ElaboratedNetlist elab;
    Eigen::VectorXcd x;

    cplx at_node(int original_node) const;
};

AcSolution ac_solve(const Netlist& net, double f);

// Two-port (or one-port) scattering parameters at one frequency. Ports are the
// netlist's effective ports; a source element sitting on a port provides its
// termination.
SParameters sparams_at(const Netlist& net, double f);

struct FrequencySweep {
    std::vector<SParameters> points;
    double f_peak = 0.0;      // frequency of maximum |s21|
    double il_min_db = 0.0;   // insertion loss at f_peak
    double bw_frac = 0.0;     // 3-dB fractional bandwidth around f_peak (0 if open-ended)
};

FrequencySweep sweep_sparams(const Netlist& net, double f_start, double f_stop, int n_points);

// Impedance seen from `node` into the network with the named elements removed.
// Returns +inf (complex) when the remaining subnetwork does not connect the
// node to ground.
cplx driving_point_impedance(const Netlist& net, int node,
                             const std::vector<std::string>& exclude, double f);

// Wave cascade of two two-port responses on identical frequency grids.
std::vector<SParameters> cascade(const std::vector<SParameters>& a,
                                 const std::vector<SParameters>& b);

// Branch impedances of a canonical limiter netlist via driving-point
// extraction, feeding the full threshold expression.
ImpedanceSet extract_impedance_set(const Netlist& net, const PfslNetlistMap& map,
                                   const DesignPoint& dp);

}  // namespace pfsl
