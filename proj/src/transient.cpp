#include "pfsl/transient.hpp"

#include <algorithm>
#include <cmath>

#include "pfsl/units.hpp"

namespace pfsl {

namespace {

struct BranchState {
    double i_prev = 0.0;  // companion history current (L, C)
    double q_prev = 0.0;  // junction charge
    double iq_prev = 0.0; // junction capacitive current
};

double branch_voltage(const Eigen::VectorXd& v, const ElabBranch& br) {
    const double va = br.a >= 0 ? v(br.a) : 0.0;
    const double vb = br.b >= 0 ? v(br.b) : 0.0;
    return va - vb;
}

}  // namespace

double Waveform::node_at(int original_node, size_t step) const {
    const int c = elab.compact(original_node);
    return c >= 0 ? v(static_cast<Eigen::Index>(step), c) : 0.0;
}

std::vector<double> Waveform::junction_voltage(const std::string& element_name) const {
    for (const auto& br : elab.branches) {
        if (br.kind == BranchKind::Junction && br.name == element_name) {
            std::vector<double> out(v.rows());
            for (Eigen::Index s = 0; s < v.rows(); ++s) {
                const double va = br.a >= 0 ? v(s, br.a) : 0.0;
                const double vb = br.b >= 0 ? v(s, br.b) : 0.0;
                out[static_cast<size_t>(s)] = va - vb;
            }
            return out;
        }
    }
    throw DomainError("junction_voltage: no varactor named " + element_name);
}

Waveform transient_solve(const Netlist& net, double duration_s, double dt_s,
                         const TransientOptions& opts) {
    if (duration_s <= 0 || dt_s <= 0) {
        throw DomainError("transient_solve requires positive duration and dt");
    }
    Waveform w;
    w.elab = elaborate(net);
    w.dt = dt_s;
    w.duration = duration_s;
    const int n = w.elab.n_nodes;
    const size_t steps = static_cast<size_t>(std::llround(duration_s / dt_s));
    w.v.setZero(static_cast<Eigen::Index>(steps) + 1, n);
    w.p_source.assign(steps + 1, 0.0);
    w.p_dissipated.assign(steps + 1, 0.0);

    const double h = dt_s;
    std::vector<BranchState> st(w.elab.branches.size());

    // Constant part of the companion conductance matrix.
    Eigen::MatrixXd g0 = Eigen::MatrixXd::Zero(n, n);
    auto add_g = [&](int a, int b, double g) {
        if (a >= 0) g0(a, a) += g;
        if (b >= 0) g0(b, b) += g;
        if (a >= 0 && b >= 0) {
            g0(a, b) -= g;
            g0(b, a) -= g;
        }
    };
    for (const auto& br : w.elab.branches) {
        switch (br.kind) {
            case BranchKind::Res: add_g(br.a, br.b, 1.0 / br.value); break;
            case BranchKind::Cap: add_g(br.a, br.b, 2.0 * br.value / h); break;
            case BranchKind::Ind: add_g(br.a, br.b, h / (2.0 * br.value)); break;
            case BranchKind::Source: add_g(br.a, br.b, 1.0 / br.source.z_s); break;
            case BranchKind::Junction: break;
        }
    }

    // Initialize junction histories at the quiescent point (v = 0).
    for (size_t bi = 0; bi < w.elab.branches.size(); ++bi) {
        const auto& br = w.elab.branches[bi];
        if (br.kind == BranchKind::Junction) {
            st[bi].q_prev = varactor_charge(br.dv.model, br.dv.v_dc);
        }
    }

    Eigen::VectorXd v_now = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd rhs(n), f(n), dv(n);
    Eigen::MatrixXd jac(n, n);

    for (size_t s = 1; s <= steps; ++s) {
        const double t_new = s * h;

        rhs.setZero();
        for (size_t bi = 0; bi < w.elab.branches.size(); ++bi) {
            const auto& br = w.elab.branches[bi];
            const double vb_prev = branch_voltage(v_now, br);
            double i_hist = 0.0;
            switch (br.kind) {
                case BranchKind::Cap:
                    i_hist = 2.0 * br.value / h * vb_prev + st[bi].i_prev;
                    break;
                case BranchKind::Ind:
                    i_hist = -(st[bi].i_prev + h / (2.0 * br.value) * vb_prev);
                    break;
                case BranchKind::Source: {
                    const double e = emf_from_available_power(br.source.p_avail_w,
                                                              br.source.z_s) *
                                     std::sin(omega_from_hz(br.source.f_hz) * t_new);
                    i_hist = e / br.source.z_s;
                    break;
                }
                default: break;
            }
            if (i_hist != 0.0) {
                if (br.a >= 0) rhs(br.a) += i_hist;
                if (br.b >= 0) rhs(br.b) -= i_hist;
            }
        }

        // Newton on the new node voltages.
        Eigen::VectorXd v_new = v_now;
        bool done = false;
        for (int it = 0; it < opts.max_newton; ++it) {
            f = g0 * v_new - rhs;
            jac = g0;
            for (size_t bi = 0; bi < w.elab.branches.size(); ++bi) {
                const auto& br = w.elab.branches[bi];
                if (br.kind != BranchKind::Junction) continue;
                const double vb = branch_voltage(v_new, br);
                const double u = br.dv.v_dc + vb;
                const double q = varactor_charge(br.dv.model, u);
                const double iq = 2.0 * (q - st[bi].q_prev) / h - st[bi].iq_prev;
                const double ic = varactor_conduction_current(br.dv.model, u);
                const double gj = 2.0 * varactor_capacitance(br.dv.model, u) / h +
                                  varactor_conduction_conductance(br.dv.model, u);
                const double i_tot = iq + ic;
                if (br.a >= 0) {
                    f(br.a) += i_tot;
                    jac(br.a, br.a) += gj;
                }
                if (br.b >= 0) {
                    f(br.b) -= i_tot;
                    jac(br.b, br.b) += gj;
                }
                if (br.a >= 0 && br.b >= 0) {
                    jac(br.a, br.b) -= gj;
                    jac(br.b, br.a) -= gj;
                }
            }
            dv = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(-f);
            v_new += dv;
            const double scale = std::max(1.0, v_new.lpNorm<Eigen::Infinity>());
            if (dv.lpNorm<Eigen::Infinity>() <= opts.newton_tol * scale) {
                done = true;
                break;
            }
        }
        if (!done) {
            throw ConvergenceError("transient_solve: Newton failed at t = " +
                                       std::to_string(t_new),
                                   {});
        }

        // Update companion histories and power accumulators.
        double p_src = 0.0, p_diss = 0.0;
        for (size_t bi = 0; bi < w.elab.branches.size(); ++bi) {
            const auto& br = w.elab.branches[bi];
            const double vb_new = branch_voltage(v_new, br);
            const double vb_prev = branch_voltage(v_now, br);
            switch (br.kind) {
                case BranchKind::Cap:
                    st[bi].i_prev = 2.0 * br.value / h * (vb_new - vb_prev) - st[bi].i_prev;
                    break;
                case BranchKind::Ind:
                    st[bi].i_prev += h / (2.0 * br.value) * (vb_new + vb_prev);
                    break;
                case BranchKind::Junction: {
                    const double u = br.dv.v_dc + vb_new;
                    const double q = varactor_charge(br.dv.model, u);
                    const double iq = 2.0 * (q - st[bi].q_prev) / h - st[bi].iq_prev;
                    st[bi].q_prev = q;
                    st[bi].iq_prev = iq;
                    p_diss += varactor_conduction_current(br.dv.model, u) * vb_new;
                    break;
                }
                case BranchKind::Res:
                    p_diss += vb_new * vb_new / br.value;
                    break;
                case BranchKind::Source: {
                    const double e = emf_from_available_power(br.source.p_avail_w,
                                                              br.source.z_s) *
                                     std::sin(omega_from_hz(br.source.f_hz) * t_new);
                    const double i_into = (e - vb_new) / br.source.z_s;
                    p_src += e * i_into;
                    p_diss += i_into * i_into * br.source.z_s;
                    break;
                }
                default: break;
            }
        }
        w.p_source[s] = p_src;
        w.p_dissipated[s] = p_diss;

        v_now = v_new;
        w.v.row(static_cast<Eigen::Index>(s)) = v_new.transpose();
    }
    return w;
}

HarmonicSpectrum spectrum_of_signal(const Waveform& w, const std::vector<double>& signal,
                                    double f0, int n_periods) {
    if (f0 <= 0 || n_periods < 1) throw DomainError("spectrum: bad f0 or n_periods");
    const double spp_real = 1.0 / (f0 * w.dt);
    const long spp = std::lround(spp_real);
    if (spp < 4 || std::abs(spp_real - spp) > 1e-6 * spp) {
        throw DomainError("spectrum: dt does not divide the period of f0");
    }
    const long n = spp * n_periods;
    const long total = static_cast<long>(signal.size()) - 1;
    if (n > total - static_cast<long>(0.8 * total) + 1) {
        throw DomainError("spectrum: insufficient duration after the settling discard");
    }
    const long start = static_cast<long>(signal.size()) - n;

    const int k_max = static_cast<int>(std::min<long>(32, spp / 2 - 1));
    HarmonicSpectrum sp;
    sp.f0 = f0;
    sp.phasors.resize(k_max + 1);
    for (int k = 0; k <= k_max; ++k) {
        cplx acc{0.0, 0.0};
        for (long j = 0; j < n; ++j) {
            const double th = 2.0 * kPi * k * static_cast<double>(j % spp) / spp;
            acc += signal[start + j] * cplx{std::cos(th), -std::sin(th)};
        }
        sp.phasors[k] = acc * ((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    }
    sp.phasors[0] = cplx{sp.phasors[0].real(), 0.0};
    return sp;
}

HarmonicSpectrum steady_state_spectrum(const Waveform& w, int original_node, double f0,
                                       int n_periods) {
    const int c = w.elab.compact(original_node);
    std::vector<double> sig(w.v.rows());
    for (Eigen::Index s = 0; s < w.v.rows(); ++s) {
        sig[static_cast<size_t>(s)] = c >= 0 ? w.v(s, c) : 0.0;
    }
    return spectrum_of_signal(w, sig, f0, n_periods);
}

EnergyAudit energy_audit(const Waveform& w, double f0) {
    const long spp = std::lround(1.0 / (f0 * w.dt));
    if (spp < 4 || spp > static_cast<long>(w.steps())) {
        throw DomainError("energy_audit: waveform shorter than one cycle");
    }
    const long start = static_cast<long>(w.steps()) - spp + 1;
    EnergyAudit a;
    for (long s = start; s <= static_cast<long>(w.steps()); ++s) {
        a.p_source_w += w.p_source[static_cast<size_t>(s)];
        a.p_dissipated_w += w.p_dissipated[static_cast<size_t>(s)];
    }
    a.p_source_w /= spp;
    a.p_dissipated_w /= spp;
    return a;
}

}  // namespace pfsl
