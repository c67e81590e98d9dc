#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pfsl/netlist.hpp"
#include "pfsl/types.hpp"
#include "pfsl/varactor.hpp"

namespace pfsl {

struct HbOptions {
    int k_harmonics = 7;           // harmonics of f_d kept (k = 0..K)
    int max_iterations = 100;
    double tol_rel = 1e-9;         // residual max-norm relative to drive current
    double pag_power_w = -1.0;     // override; < 0 uses the netlist value
    double p_sub_floor_w = 1e-9;   // bifurcation detection floor (-60 dBm)
};

// Phasors (peak amplitude) at k * f0 for one node.
struct HarmonicSpectrum {
    double f0 = 0.0;
    std::vector<cplx> phasors;  // k = 0..K; k = 0 is real
};

struct HBSolution {
    double p_in_w = 0.0;
    double f_in = 0.0;
    int k_harmonics = 0;
    std::map<int, HarmonicSpectrum> spectra;  // by original node id
    double diode_v_peak = 0.0;  // max |v(t)| across any varactor junction
    double p_sub_w = 0.0;       // outgoing wave power at f_d at the output port
    cplx s21_ls, s11_ls;        // large-signal scattering at f_in
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    double p_source_w = 0.0;      // total power delivered by the EMFs
    double p_dissipated_w = 0.0;  // resistive plus junction-conduction dissipation
    Eigen::VectorXd state;        // raw harmonic unknowns, reusable as warm start
};

// Steady state of a driven netlist with a pAG at f_in/2. Throws
// ConvergenceError (with the residual history) if Newton stalls.
HBSolution hb_solve(const Netlist& net, double f_in, double p_in_w,
                    const HbOptions& opts = {},
                    const Eigen::VectorXd* init = nullptr);

struct SweepRecord {
    double p_in_w = 0.0;
    double p_sub_w = 0.0;
    cplx s21_ls, s11_ls;
    double diode_v_peak = 0.0;
    bool converged = false;
};

struct SweepTrace {
    Netlist net;  // the swept netlist, kept for refinement passes
    double f_in = 0.0;
    int k_harmonics = 0;
    double tol_rel = 0.0;
    std::uint64_t netlist_hash = 0;
    std::string direction = "up";
    HbOptions opts;
    std::vector<SweepRecord> records;
    std::vector<Eigen::VectorXd> states;  // converged state per record
};

// Ascending power sweep with warm starts; steps are halved down to
// step_db/16 on non-convergence before a record is flagged.
SweepTrace power_sweep(const Netlist& net, double f_in, double p_start_w,
                       double p_stop_w, double step_db, const HbOptions& opts = {});

// Smallest drive power whose subharmonic output exceeds the floor, refined by
// bisection between the bracketing sweep points to 0.1 dB.
double extract_pth(const SweepTrace& trace, double floor_w = 1e-9);

struct PmaxEstimate {
    double p_by_vpeak_w = 0.0;  // first record with diode peak >= v_dc + v_bi
    bool vpeak_found = false;
    double max_vpeak_observed = 0.0;
    double p_by_s21_w = 0.0;    // local |s21| maximum above threshold
    bool s21_found = false;
};

PmaxEstimate extract_pmax(const SweepTrace& trace, const BiasedVaractor& dv);

struct IsReport {
    double p_th_w = 0.0;
    double p_max_w = 0.0;
    double is_max_below_pmax_db = 0.0;
    double il_ss_db = 0.0;
    std::vector<std::pair<double, double>> table;  // (p_in_w, is_db)

    double is_at(double p_w) const;
};

IsReport is_report(const SweepTrace& trace, const BiasedVaractor& dv);

// Large-signal transmission versus frequency at fixed drive power. Each
// frequency point is reached by its own warm-started power ramp.
std::vector<std::pair<double, cplx>> sweep_frequency_at_power(
    const Netlist& net, double f_start, double f_stop, int n_points, double p_in_w,
    const HbOptions& opts = {});

// Chain m copies of a two-port netlist, port 2 into port 1, keeping a single
// cw drive at the first input and a single pAG at the final output.
Netlist cascade_stages(const Netlist& net, int m);

std::uint64_t structural_hash(const Netlist& net);

}  // namespace pfsl
