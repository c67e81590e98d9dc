#include "pfsl/hb.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <set>

#include "pfsl/units.hpp"

namespace pfsl {

namespace {

// Harmonic-balance engine over the real unknown vector
//   x[u * (2K+1) + c], c = 0 (DC), 2k-1 (Re k), 2k (Im k),
// with u running over compact nodes then inductor branch currents. The linear
// subnetwork is a constant matrix; varactors are evaluated in the time domain
// on an oversampled grid and folded back per harmonic.
class HbEngine {
public:
    HbEngine(const Netlist& net, double f_in, double p_in_w, const HbOptions& opts)
        : net_(&net), opts_(opts), elab_(elaborate(net)) {
        if (opts.k_harmonics < 4) throw DomainError("hb_solve requires k_harmonics >= 4");
        const auto* cw = net.first_of(ElementKind::CwSource);
        const auto* pag = net.first_of(ElementKind::PagSource);
        if (!cw || !pag) {
            throw DomainError("hb_solve needs one cw source and one pAG source");
        }
        if (std::abs(pag->source.f_hz - cw->source.f_hz / 2.0) >
            1e-9 * pag->source.f_hz) {
            throw DomainError("pAG frequency is not half the cw frequency");
        }
        f_in_ = f_in;
        p_in_ = p_in_w;
        f0_ = f_in / 2.0;
        k_ = opts.k_harmonics;
        nh_ = 2 * k_ + 1;
        nt_ = 4 * k_ + 1;
        nu_ = elab_.unknown_count() * nh_;

        wk_.resize(k_ + 1);
        for (int k = 0; k <= k_; ++k) wk_[k] = omega_from_hz(f0_) * k;

        t_syn_.resize(nt_, nh_);
        s_ana_.resize(nh_, nt_);
        for (int j = 0; j < nt_; ++j) {
            const double th = 2.0 * kPi * j / nt_;
            t_syn_(j, 0) = 1.0;
            s_ana_(0, j) = 1.0 / nt_;
            for (int k = 1; k <= k_; ++k) {
                t_syn_(j, 2 * k - 1) = std::cos(k * th);
                t_syn_(j, 2 * k) = -std::sin(k * th);
                s_ana_(2 * k - 1, j) = 2.0 * std::cos(k * th) / nt_;
                s_ana_(2 * k, j) = -2.0 * std::sin(k * th) / nt_;
            }
        }

        build_linear(p_in_w);
    }

    HBSolution solve(const Eigen::VectorXd* init) {
        Eigen::VectorXd x = (init && init->size() == nu_)
                                ? *init
                                : Eigen::VectorXd::Zero(nu_);
        const double tol = opts_.tol_rel * i_scale_;
        std::vector<double> history;

        Eigen::VectorXd f(nu_);
        Eigen::MatrixXd j(nu_, nu_);
        int it = 0;
        bool converged = false;
        double res = 0.0;
        for (; it < opts_.max_iterations; ++it) {
            residual(x, f, nullptr);
            res = f.lpNorm<Eigen::Infinity>();
            history.push_back(res);
            if (res <= tol) {
                converged = true;
                break;
            }
            residual(x, f, &j);
            const Eigen::VectorXd dx = Eigen::PartialPivLU<Eigen::MatrixXd>(j).solve(-f);
            const double n0 = f.norm();
            double alpha = 1.0;
            bool accepted = false;
            Eigen::VectorXd ft(nu_);
            for (int h = 0; h < 14; ++h) {
                residual(x + alpha * dx, ft, nullptr);
                if (ft.norm() < n0) {
                    x += alpha * dx;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                // Stagnation at the round-off floor still counts as converged.
                if (res <= 1e-7 * i_scale_) {
                    converged = true;
                    break;
                }
                throw ConvergenceError("hb_solve: Newton stalled at residual " +
                                           std::to_string(res),
                                       history);
            }
        }
        if (!converged) {
            throw ConvergenceError("hb_solve: no convergence after " +
                                       std::to_string(opts_.max_iterations) +
                                       " iterations",
                                   history);
        }
        return package(x, it + 1, res);
    }

private:
    int slot(int unknown, int comp) const { return unknown * nh_ + comp; }

    void add_y(Eigen::MatrixXd& m, int ua, int ub, int k, cplx y) const {
        auto blk = [&](int ra, int ca, double v) { m(ra, ca) += v; };
        auto stamp_pair = [&](int u1, int u2, double sign) {
            if (u1 < 0 || u2 < 0) return;
            if (k == 0) {
                blk(slot(u1, 0), slot(u2, 0), sign * y.real());
                return;
            }
            const int r = slot(u1, 2 * k - 1);
            const int c = slot(u2, 2 * k - 1);
            blk(r, c, sign * y.real());
            blk(r, c + 1, -sign * y.imag());
            blk(r + 1, c, sign * y.imag());
            blk(r + 1, c + 1, sign * y.real());
        };
        stamp_pair(ua, ua, 1.0);
        stamp_pair(ub, ub, 1.0);
        stamp_pair(ua, ub, -1.0);
        stamp_pair(ub, ua, -1.0);
    }

    void build_linear(double p_in_w) {
        j_lin_ = Eigen::MatrixXd::Zero(nu_, nu_);
        b_src_ = Eigen::VectorXd::Zero(nu_);
        i_scale_ = 0.0;

        for (const auto& br : elab_.branches) {
            switch (br.kind) {
                case BranchKind::Res:
                    for (int k = 0; k <= k_; ++k) {
                        add_y(j_lin_, br.a, br.b, k, cplx{1.0 / br.value, 0.0});
                    }
                    break;
                case BranchKind::Cap:
                    for (int k = 1; k <= k_; ++k) {
                        add_y(j_lin_, br.a, br.b, k, cplx{0.0, wk_[k] * br.value});
                    }
                    break;
                case BranchKind::Ind: {
                    const int bi = elab_.n_nodes + br.branch_index;
                    for (int c = 0; c < nh_; ++c) {
                        if (br.a >= 0) {
                            j_lin_(slot(br.a, c), slot(bi, c)) += 1.0;
                            j_lin_(slot(bi, c), slot(br.a, c)) += 1.0;
                        }
                        if (br.b >= 0) {
                            j_lin_(slot(br.b, c), slot(bi, c)) -= 1.0;
                            j_lin_(slot(bi, c), slot(br.b, c)) -= 1.0;
                        }
                    }
                    for (int k = 1; k <= k_; ++k) {
                        const double wl = wk_[k] * br.value;
                        j_lin_(slot(bi, 2 * k - 1), slot(bi, 2 * k)) += wl;
                        j_lin_(slot(bi, 2 * k), slot(bi, 2 * k - 1)) -= wl;
                    }
                    break;
                }
                case BranchKind::Junction:
                    junctions_.push_back(&br);
                    break;
                case BranchKind::Source: {
                    for (int k = 0; k <= k_; ++k) {
                        add_y(j_lin_, br.a, br.b, k, cplx{1.0 / br.source.z_s, 0.0});
                    }
                    if (br.is_pag) {
                        const double p = opts_.pag_power_w >= 0.0 ? opts_.pag_power_w
                                                                  : br.source.p_avail_w;
                        pag_emf_ = emf_from_available_power(p, br.source.z_s);
                        inject(br, pag_emf_, 1);
                    } else {
                        cw_emf_ = emf_from_available_power(p_in_, br.source.z_s);
                        inject(br, cw_emf_, 2);
                    }
                    break;
                }
            }
        }
        if (i_scale_ <= 0.0) i_scale_ = 1e-12;
    }

    void inject(const ElabBranch& br, double emf, int k_src) {
        const double i = emf / br.source.z_s;
        if (br.a >= 0) b_src_(slot(br.a, 2 * k_src - 1)) += i;
        if (br.b >= 0) b_src_(slot(br.b, 2 * k_src - 1)) -= i;
        i_scale_ = std::max(i_scale_, i);
    }

    Eigen::VectorXd element_harmonics(const Eigen::VectorXd& x, const ElabBranch& br) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(nh_);
        for (int c = 0; c < nh_; ++c) {
            if (br.a >= 0) v(c) += x(slot(br.a, c));
            if (br.b >= 0) v(c) -= x(slot(br.b, c));
        }
        return v;
    }

    // Apply j*w_k per harmonic to a stacked real harmonic vector or matrix row set.
    void apply_ddt(Eigen::VectorXd& h) const {
        h(0) = 0.0;
        for (int k = 1; k <= k_; ++k) {
            const double re = h(2 * k - 1), im = h(2 * k);
            h(2 * k - 1) = -wk_[k] * im;
            h(2 * k) = wk_[k] * re;
        }
    }
    void apply_ddt_rows(Eigen::MatrixXd& m) const {
        m.row(0).setZero();
        for (int k = 1; k <= k_; ++k) {
            const Eigen::RowVectorXd re = m.row(2 * k - 1);
            m.row(2 * k - 1) = -wk_[k] * m.row(2 * k);
            m.row(2 * k) = wk_[k] * re;
        }
    }

    void residual(const Eigen::VectorXd& x, Eigen::VectorXd& f, Eigen::MatrixXd* jac) const {
        f = j_lin_ * x - b_src_;
        if (jac) *jac = j_lin_;
        for (const auto* jb : junctions_) {
            const Eigen::VectorXd vh = element_harmonics(x, *jb);
            const Eigen::VectorXd vt = t_syn_ * vh;
            Eigen::VectorXd qt(nt_), ict(nt_);
            for (int t = 0; t < nt_; ++t) {
                const double u = jb->dv.v_dc + vt(t);
                qt(t) = varactor_charge(jb->dv.model, u);
                ict(t) = varactor_conduction_current(jb->dv.model, u);
            }
            Eigen::VectorXd ih = s_ana_ * qt;
            apply_ddt(ih);
            ih += s_ana_ * ict;
            for (int c = 0; c < nh_; ++c) {
                if (jb->a >= 0) f(slot(jb->a, c)) += ih(c);
                if (jb->b >= 0) f(slot(jb->b, c)) -= ih(c);
            }
            if (jac) {
                Eigen::VectorXd ct(nt_), gt(nt_);
                for (int t = 0; t < nt_; ++t) {
                    const double u = jb->dv.v_dc + vt(t);
                    ct(t) = varactor_capacitance(jb->dv.model, u);
                    gt(t) = varactor_conduction_conductance(jb->dv.model, u);
                }
                Eigen::MatrixXd jq = s_ana_ * ct.asDiagonal() * t_syn_;
                apply_ddt_rows(jq);
                jq += s_ana_ * gt.asDiagonal() * t_syn_;
                auto scatter = [&](int ru, int cu, double sign) {
                    if (ru < 0 || cu < 0) return;
                    jac->block(ru * nh_, cu * nh_, nh_, nh_) += sign * jq;
                };
                scatter(jb->a, jb->a, 1.0);
                scatter(jb->a, jb->b, -1.0);
                scatter(jb->b, jb->a, -1.0);
                scatter(jb->b, jb->b, 1.0);
            }
        }
    }

    cplx node_phasor(const Eigen::VectorXd& x, int unknown, int k) const {
        if (unknown < 0) return {0.0, 0.0};
        if (k == 0) return {x(slot(unknown, 0)), 0.0};
        return {x(slot(unknown, 2 * k - 1)), x(slot(unknown, 2 * k))};
    }

    HBSolution package(const Eigen::VectorXd& x, int iterations, double res) const {
        HBSolution sol;
        sol.p_in_w = p_in_;
        sol.f_in = f_in_;
        sol.k_harmonics = k_;
        sol.converged = true;
        sol.iterations = iterations;
        sol.residual = res;
        sol.state = x;

        for (int c = 0; c < elab_.n_nodes; ++c) {
            const int orig = elab_.original_nodes[c];
            if (orig < 0) continue;
            HarmonicSpectrum sp;
            sp.f0 = f0_;
            for (int k = 0; k <= k_; ++k) sp.phasors.push_back(node_phasor(x, c, k));
            sol.spectra[orig] = sp;
        }

        // Peak junction voltage from a dense resample of the trig series.
        for (const auto* jb : junctions_) {
            const Eigen::VectorXd vh = element_harmonics(x, *jb);
            double peak = 0.0;
            const int n_dense = 1024;
            for (int i = 0; i < n_dense; ++i) {
                const double th = 2.0 * kPi * i / n_dense;
                double v = vh(0);
                for (int k = 1; k <= k_; ++k) {
                    v += vh(2 * k - 1) * std::cos(k * th) - vh(2 * k) * std::sin(k * th);
                }
                peak = std::max(peak, std::abs(v));
            }
            sol.diode_v_peak = std::max(sol.diode_v_peak, peak);
        }

        // Port waves.
        const auto ports = net_->effective_ports();
        if (ports.size() >= 2) {
            const auto& p1 = ports[0];
            const auto& p2 = ports[1];
            const cplx v1 = port_voltage(x, p1, 2);
            const cplx v2 = port_voltage(x, p2, 2);
            sol.s21_ls = 2.0 * v2 / cw_emf_;
            sol.s11_ls = 2.0 * v1 / cw_emf_ - 1.0;
            const cplx v2_sub = port_voltage(x, p2, 1);
            const cplx b_sub = (2.0 * v2_sub - pag_emf_) / (2.0 * std::sqrt(p2.z0));
            sol.p_sub_w = 0.5 * std::norm(b_sub);
        }

        // Power audit.
        double p_src = 0.0, p_diss = 0.0;
        for (const auto& br : elab_.branches) {
            if (br.kind == BranchKind::Source) {
                const int k_src = br.is_pag ? 1 : 2;
                const double emf = br.is_pag ? pag_emf_ : cw_emf_;
                const cplx v = node_phasor(x, br.a, k_src) - node_phasor(x, br.b, k_src);
                const cplx i = (cplx{emf, 0.0} - v) / br.source.z_s;
                p_src += 0.5 * (cplx{emf, 0.0} * std::conj(i)).real();
                // z_s sees the EMF minus the node voltage, per harmonic.
                const Eigen::VectorXd vh = element_harmonics(x, br);
                double p = vh(0) * vh(0);
                for (int k = 1; k <= k_; ++k) {
                    double re = -vh(2 * k - 1), im = -vh(2 * k);
                    if (k == k_src) re += emf;
                    p += 0.5 * (re * re + im * im);
                }
                p_diss += p / br.source.z_s;
            } else if (br.kind == BranchKind::Res) {
                p_diss += branch_resistive_power(x, br, br.value);
            } else if (br.kind == BranchKind::Junction) {
                const Eigen::VectorXd vh = element_harmonics(x, br);
                const Eigen::VectorXd vt = t_syn_ * vh;
                double acc = 0.0;
                for (int t = 0; t < nt_; ++t) {
                    acc += vt(t) * varactor_conduction_current(br.dv.model,
                                                              br.dv.v_dc + vt(t));
                }
                p_diss += acc / nt_;
            }
        }
        sol.p_source_w = p_src;
        sol.p_dissipated_w = p_diss;
        return sol;
    }

    double branch_resistive_power(const Eigen::VectorXd& x, const ElabBranch& br,
                                  double r) const {
        const Eigen::VectorXd vh = element_harmonics(x, br);
        double p = vh(0) * vh(0);
        for (int k = 1; k <= k_; ++k) {
            p += 0.5 * (vh(2 * k - 1) * vh(2 * k - 1) + vh(2 * k) * vh(2 * k));
        }
        return p / r;
    }

    cplx port_voltage(const Eigen::VectorXd& x, const Port& p, int k) const {
        return node_phasor(x, elab_.compact(p.node), k) -
               node_phasor(x, elab_.compact(p.ref), k);
    }

    const Netlist* net_;
    HbOptions opts_;
    ElaboratedNetlist elab_;
    double f_in_ = 0.0, f0_ = 0.0, p_in_ = 0.0;
    int k_ = 0, nh_ = 0, nt_ = 0, nu_ = 0;
    std::vector<double> wk_;
    Eigen::MatrixXd t_syn_, s_ana_;
    Eigen::MatrixXd j_lin_;
    Eigen::VectorXd b_src_;
    double i_scale_ = 0.0;
    double cw_emf_ = 0.0, pag_emf_ = 0.0;
    std::vector<const ElabBranch*> junctions_;
};

}  // namespace

HBSolution hb_solve(const Netlist& net, double f_in, double p_in_w,
                    const HbOptions& opts, const Eigen::VectorXd* init) {
    HbEngine engine(net, f_in, p_in_w, opts);
    return engine.solve(init);
}

namespace {

// Newton happily follows the small period-one solution past the bifurcation
// (it keeps existing there as a saddle), and the pAG injection alone is too
// weak to dislodge it: the f_d-resonant tank isolates the subharmonic loop
// from the ports, so the port seed arrives at the diode attenuated by orders
// of magnitude. When a solve lands below the subharmonic floor, probe the
// period-doubled basin by kicking the junction-node f_d phasor directly and
// letting Newton settle; keep the large branch only if it persists at the
// nominal pAG level.
HBSolution solve_branch_aware(const Netlist& net, double f_in, double p_in_w,
                              const HbOptions& opts, const Eigen::VectorXd* init) {
    HBSolution base = hb_solve(net, f_in, p_in_w, opts, init);
    // Already on the period-doubled branch when the subharmonic wave clearly
    // exceeds the pAG's own leak-through.
    double pag_w = opts.pag_power_w;
    if (pag_w < 0.0) {
        const auto* pag = net.first_of(ElementKind::PagSource);
        pag_w = pag ? pag->source.p_avail_w : 0.0;
    }
    if (base.p_sub_w > 10.0 * pag_w) return base;

    const ElaboratedNetlist elab = elaborate(net);
    std::vector<int> junction_slots;
    const int nh = 2 * opts.k_harmonics + 1;
    for (const auto& br : elab.branches) {
        if (br.kind == BranchKind::Junction && br.a >= 0) {
            junction_slots.push_back(br.a * nh);
        }
    }
    if (junction_slots.empty()) return base;

    // The oscillation latches at the volt scale; sub-basin kicks fall back.
    for (double mag : {0.8, 1.6, 2.8}) {
        for (double phase_deg : {45.0, 225.0, 135.0, 315.0}) {
            const double a = phase_deg * kPi / 180.0;
            Eigen::VectorXd kicked = base.state;
            for (int s : junction_slots) {
                kicked(s + 1) += mag * std::cos(a);
                kicked(s + 2) += mag * std::sin(a);
            }
            try {
                HBSolution probed = hb_solve(net, f_in, p_in_w, opts, &kicked);
                if (probed.p_sub_w > 100.0 * base.p_sub_w) return probed;
            } catch (const ConvergenceError&) {
                // try the next kick
            }
        }
    }
    return base;
}

}  // namespace

std::uint64_t structural_hash(const Netlist& net) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* data, size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    auto mix_d = [&](double d) { mix(&d, sizeof(d)); };
    for (const auto& e : net.elements) {
        mix(e.name.data(), e.name.size());
        const int k = static_cast<int>(e.kind);
        mix(&k, sizeof(k));
        mix(&e.node_a, sizeof(e.node_a));
        mix(&e.node_b, sizeof(e.node_b));
        mix_d(e.value);
        mix_d(e.q);
        mix_d(e.source.f_hz);
        mix_d(e.source.p_avail_w);
        mix_d(e.source.z_s);
        mix_d(e.varactor.c_v);
        mix_d(e.varactor.v_dc);
    }
    for (const auto& p : net.ports) {
        mix(&p.node, sizeof(p.node));
        mix(&p.ref, sizeof(p.ref));
        mix_d(p.z0);
    }
    mix_d(net.v_bias);
    return h;
}

SweepTrace power_sweep(const Netlist& net, double f_in, double p_start_w,
                       double p_stop_w, double step_db, const HbOptions& opts) {
    if (!(p_start_w < p_stop_w) || step_db <= 0) {
        throw DomainError("power_sweep requires p_start < p_stop and step_db > 0");
    }
    SweepTrace trace;
    trace.net = net;
    trace.f_in = f_in;
    trace.k_harmonics = opts.k_harmonics;
    trace.tol_rel = opts.tol_rel;
    trace.opts = opts;
    trace.netlist_hash = structural_hash(net);

    std::vector<double> ladder;
    const double d0 = dbm_from_watts(p_start_w);
    const double d1 = dbm_from_watts(p_stop_w);
    for (double d = d0; d < d1 - 1e-9; d += step_db) ladder.push_back(d);
    ladder.push_back(d1);

    Eigen::VectorXd state;
    auto attempt = [&](double dbm) -> std::optional<HBSolution> {
        try {
            HBSolution s = solve_branch_aware(net, f_in, watts_from_dbm(dbm), opts,
                                              state.size() ? &state : nullptr);
            state = s.state;
            return s;
        } catch (const ConvergenceError&) {
            return std::nullopt;
        }
    };

    // First point aborts on failure (no warm start exists yet).
    HBSolution first =
        solve_branch_aware(net, f_in, watts_from_dbm(ladder[0]), opts, nullptr);
    state = first.state;
    auto record = [&](const HBSolution& s, bool ok) {
        trace.records.push_back({s.p_in_w, s.p_sub_w, s.s21_ls, s.s11_ls,
                                 s.diode_v_peak, ok});
        trace.states.push_back(s.state);
    };
    record(first, true);

    const double min_step = step_db / 16.0;
    std::function<bool(double, double)> advance = [&](double from, double to) -> bool {
        if (attempt(to)) return true;
        if (to - from <= min_step + 1e-12) return false;
        const double mid = 0.5 * (from + to);
        return advance(from, mid) && advance(mid, to);
    };

    for (size_t i = 1; i < ladder.size(); ++i) {
        if (auto s = attempt(ladder[i])) {
            record(*s, true);
            continue;
        }
        if (advance(ladder[i - 1], ladder[i])) {
            // The halved walk ended exactly at ladder[i]; re-solve is warm and cheap.
            if (auto s = attempt(ladder[i])) {
                record(*s, true);
                continue;
            }
        }
        HBSolution flagged;
        flagged.p_in_w = watts_from_dbm(ladder[i]);
        flagged.state = state;
        record(flagged, false);
    }
    return trace;
}

double extract_pth(const SweepTrace& trace, double floor_w) {
    long first_above = -1;
    for (size_t i = 0; i < trace.records.size(); ++i) {
        if (trace.records[i].converged && trace.records[i].p_sub_w > floor_w) {
            first_above = static_cast<long>(i);
            break;
        }
    }
    if (first_above < 0) {
        throw NoBifurcationError("extract_pth: subharmonic output never exceeded floor");
    }
    if (first_above == 0) return trace.records[0].p_in_w;

    long below = first_above - 1;
    while (below > 0 && !trace.records[below].converged) --below;
    double lo = dbm_from_watts(trace.records[below].p_in_w);
    double hi = dbm_from_watts(trace.records[first_above].p_in_w);
    Eigen::VectorXd state_lo = trace.states[below];

    while (hi - lo > 0.1) {
        const double mid = 0.5 * (lo + hi);
        try {
            HBSolution s = solve_branch_aware(trace.net, trace.f_in,
                                              watts_from_dbm(mid), trace.opts,
                                              &state_lo);
            if (s.p_sub_w > floor_w) {
                hi = mid;
            } else {
                lo = mid;
                state_lo = s.state;
            }
        } catch (const ConvergenceError&) {
            lo = mid;  // treat as below the crossing; keep the old warm state
        }
    }
    return watts_from_dbm(hi);
}

PmaxEstimate extract_pmax(const SweepTrace& trace, const BiasedVaractor& dv) {
    PmaxEstimate est;
    const double onset = dv.v_dc + dv.model.v_bi;
    for (const auto& r : trace.records) {
        if (!r.converged) continue;
        est.max_vpeak_observed = std::max(est.max_vpeak_observed, r.diode_v_peak);
        if (!est.vpeak_found && r.diode_v_peak >= onset) {
            est.vpeak_found = true;
            est.p_by_vpeak_w = r.p_in_w;
        }
    }

    double p_th = 0.0;
    try {
        p_th = extract_pth(trace);
    } catch (const NoBifurcationError&) {
        return est;
    }
    size_t best = 0;
    double best_s21 = -1.0;
    bool any = false;
    for (size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        if (!r.converged || r.p_in_w <= p_th) continue;
        if (std::abs(r.s21_ls) > best_s21) {
            best_s21 = std::abs(r.s21_ls);
            best = i;
            any = true;
        }
    }
    if (any && best + 1 < trace.records.size()) {
        est.s21_found = true;
        est.p_by_s21_w = trace.records[best].p_in_w;
    }
    return est;
}

double IsReport::is_at(double p_w) const {
    if (table.size() < 2 || p_w < table.front().first || p_w > table.back().first) {
        throw DomainError("is_at: power outside the swept range");
    }
    const double d = dbm_from_watts(p_w);
    for (size_t i = 1; i < table.size(); ++i) {
        if (p_w <= table[i].first) {
            const double d0 = dbm_from_watts(table[i - 1].first);
            const double d1 = dbm_from_watts(table[i].first);
            const double t = d1 > d0 ? (d - d0) / (d1 - d0) : 0.0;
            return table[i - 1].second + t * (table[i].second - table[i - 1].second);
        }
    }
    return table.back().second;
}

IsReport is_report(const SweepTrace& trace, const BiasedVaractor& dv) {
    std::vector<const SweepRecord*> ok;
    for (const auto& r : trace.records) {
        if (r.converged) ok.push_back(&r);
    }
    if (ok.size() < 6) throw DomainError("is_report: trace too short");

    IsReport rep;
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += -db_from_mag(std::abs(ok[i]->s21_ls));
    rep.il_ss_db = acc / 5.0;

    rep.p_th_w = extract_pth(trace, trace.opts.p_sub_floor_w);
    const PmaxEstimate pm = extract_pmax(trace, dv);
    rep.p_max_w = pm.vpeak_found ? pm.p_by_vpeak_w : ok.back()->p_in_w;

    for (const auto* r : ok) {
        const double il = -db_from_mag(std::abs(r->s21_ls));
        rep.table.emplace_back(r->p_in_w, il - rep.il_ss_db);
    }
    rep.is_max_below_pmax_db = 0.0;
    for (const auto& [p, is] : rep.table) {
        if (p > rep.p_th_w && p < rep.p_max_w) {
            rep.is_max_below_pmax_db = std::max(rep.is_max_below_pmax_db, is);
        }
    }
    return rep;
}

std::vector<std::pair<double, cplx>> sweep_frequency_at_power(
    const Netlist& net, double f_start, double f_stop, int n_points, double p_in_w,
    const HbOptions& opts) {
    if (!(f_start < f_stop) || n_points < 2) {
        throw DomainError("sweep_frequency_at_power: bad frequency grid");
    }
    std::vector<std::pair<double, cplx>> out;
    for (int i = 0; i < n_points; ++i) {
        const double f = f_start + (f_stop - f_start) * i / (n_points - 1);
        const SweepTrace ramp = power_sweep(net, f, p_in_w / 100.0, p_in_w, 2.0, opts);
        const auto& last = ramp.records.back();
        if (!last.converged) {
            throw ConvergenceError("sweep_frequency_at_power: ramp failed at f = " +
                                       std::to_string(f),
                                   {});
        }
        out.emplace_back(f, last.s21_ls);
    }
    return out;
}

Netlist cascade_stages(const Netlist& net, int m) {
    if (m < 1) throw DomainError("cascade_stages requires m >= 1");
    const auto ports = net.effective_ports();
    if (ports.size() != 2) throw DomainError("cascade_stages needs a two-port netlist");
    if (m == 1) return net;

    int next_id = 1;
    for (const auto& e : net.elements) {
        next_id = std::max({next_id, e.node_a + 1, e.node_b + 1});
    }

    Netlist out;
    out.v_bias = net.v_bias;
    out.models = net.models;
    for (const auto& e : net.elements) {
        if (e.kind == ElementKind::PagSource) continue;
        out.elements.push_back(e);
    }

    int junction = ports[1].node;
    for (int stage = 2; stage <= m; ++stage) {
        std::map<int, int> remap{{0, 0}, {ports[0].node, junction}};
        auto mapped = [&](int n) {
            auto it = remap.find(n);
            if (it != remap.end()) return it->second;
            remap[n] = next_id;
            return next_id++;
        };
        for (const auto& e : net.elements) {
            if (e.kind == ElementKind::CwSource) continue;
            if (e.kind == ElementKind::PagSource && stage != m) continue;
            NetlistElement c = e;
            c.name = "S" + std::to_string(stage) + "_" + e.name;
            c.node_a = mapped(e.node_a);
            c.node_b = mapped(e.node_b);
            out.elements.push_back(c);
        }
        junction = remap.at(ports[1].node);
    }
    out.ports = {ports[0], {junction, ports[1].ref, ports[1].z0}};
    return out;
}

}  // namespace pfsl
