#pragma once

#include <vector>

#include "pfsl/netlist.hpp"
#include "pfsl/types.hpp"
#include "pfsl/varactor.hpp"

namespace pfsl {

// T-network realization: two parallel tanks, the series inductor in front of
// the diode, the DC block and the lumped C-L-C transformation stage.
struct SynthesizedNetwork {
    double l_a = 0.0, c_a = 0.0;  // tank resonant at f_in_opt/2
    double l_b = 0.0, c_b = 0.0;  // tank resonant at f_in_opt
    double l_c = 0.0;             // series inductor of the diode branch
    double c_blk = 12e-12;        // DC block in series with l_b
    TransformerSpec transformer;
    double c_tx = 0.0, c_in = 0.0;  // transformer shunt capacitors
    double residual_omega_in = 0.0;  // achieved series-resonance residuals, ohms
    double residual_omega_d = 0.0;
};

struct PerformanceMetrics {
    double p_th_w = 0.0;      // threshold power
    double il_ss_ratio = 1.0; // small-signal insertion loss as a power ratio >= 1
    double p_max_w = 0.0;     // diode forward-conduction onset power
    double v_th_v = 0.0;      // generator peak voltage at threshold
};

struct ThresholdResult {
    double p_th_w = 0.0;
    double v_th_v = 0.0;
};

struct InsertionLoss {
    double ratio = 1.0;  // power ratio >= 1
    double db = 0.0;
};

// Both loss evaluations: the exact form using the passive-component Q and the
// diode-only approximation.
struct LossPair {
    AnalyticLosses exact;
    AnalyticLosses approx;
};

// z2*z3 + z1*(z2 + z3).
cplx geq(cplx z1, cplx z2, cplx z3);

// Threshold from the full branch-impedance expression.
ThresholdResult pth_full(const ImpedanceSet& imps, const BiasedVaractor& dv,
                         const DesignPoint& dp);

// Threshold under the four resonant conditions.
double pth_resonant(const AnalyticLosses& losses, const BiasedVaractor& dv,
                    const DesignPoint& dp);

double rp_from_ztx(double r_s, double z_tx, double z0);

LossPair rs_rd(const BiasedVaractor& dv, const DesignPoint& dp, double z_tx);

// Closed-form minimum threshold for a chosen diode and transformer impedance.
double pth_approx(const BiasedVaractor& dv, const DesignPoint& dp, double z_tx);

// Resonant-condition input impedance; +inf when r_s -> 0 (open circuit).
double zin_resonant(const AnalyticLosses& losses, double z_tx);

InsertionLoss il_ss(cplx z_in, double z0);
InsertionLoss il_ss_from_rs(double r_s, double z_tx, double z0);
InsertionLoss il_ss_closed_form(const BiasedVaractor& dv, const DesignPoint& dp,
                                double z_tx);

double pmax_approx(const BiasedVaractor& dv, const DesignPoint& dp, double z_tx);

PerformanceMetrics performance_of(const BiasedVaractor& dv, const DesignPoint& dp,
                                  double z_tx);

// Solve (l_b, l_c) so both series loops resonate; l_a is the free seed.
SynthesizedNetwork synthesize_network(const BiasedVaractor& dv, const DesignPoint& dp,
                                      double z_tx, double l_a_seed);

// Closed-form branch impedances of a synthesized network, loss model included.
// Exposed for cross-checks against the nodal engine.
ImpedanceSet branch_impedances(const SynthesizedNetwork& net, const BiasedVaractor& dv,
                               const DesignPoint& dp);

// Canonical netlist emission with the branch names needed to extract the
// ImpedanceSet through the nodal engine.
struct PfslNetlistMap {
    int node_port1 = 1;     // through node carrying both terminations
    int node_port2 = 2;
    int node_junction = 4;  // T-junction the branch impedances are seen from
    int node_diode = 6;
    std::vector<std::string> branch_a, branch_b, branch_c, source_names;
    std::string link_name;
};

struct PfslCircuit {
    Netlist netlist;
    PfslNetlistMap map;
};

PfslCircuit to_netlist(const SynthesizedNetwork& syn, const BiasedVaractor& dv,
                       const DesignPoint& dp, double p_in_w = 1e-3,
                       double p_pag_w = 1e-12);

// Contour grids over design parameters (analytic figures).
enum class GridMetric { Pth, IlSs, Pmax };
enum class GridAxis { Cv, Ztx, Vdc, Fin };

struct AxisSpec {
    GridAxis axis = GridAxis::Cv;
    double lo = 0.0, hi = 0.0;
    int steps = 2;
};

struct ContourGrid {
    GridMetric metric = GridMetric::Pth;
    AxisSpec x, y;
    std::vector<double> xs, ys;
    std::vector<double> values;  // SI (W or power ratio), row-major over x
    int nan_count = 0;

    double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * xs.size() + ix]; }
};

ContourGrid contour_grid(GridMetric metric, const AxisSpec& x, const AxisSpec& y,
                         const BiasedVaractor& dv, const DesignPoint& dp, double z_tx);

}  // namespace pfsl
