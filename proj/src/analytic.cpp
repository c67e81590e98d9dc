#include "pfsl/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfsl {

namespace {

constexpr cplx kJ{0.0, 1.0};

cplx z_parallel(cplx a, cplx b) { return a * b / (a + b); }

// Loss model for the synthesis closed forms: every passive reactance carries
// its series resistance evaluated at f_in_opt.
struct LossySynth {
    const SynthesizedNetwork& net;
    const BiasedVaractor& dv;
    const DesignPoint& dp;
    double r_la, r_ca, r_blk, r_lt, r_ctx, r_cin, r_v;

    LossySynth(const SynthesizedNetwork& n, const BiasedVaractor& d, const DesignPoint& p)
        : net(n), dv(d), dp(p) {
        const double f = dp.f_in_opt;
        const double q = dp.q_l;
        r_la = component_series_resistance(ReactiveKind::Inductor, net.l_a, q, f);
        r_ca = component_series_resistance(ReactiveKind::Capacitor, net.c_a, q, f);
        r_blk = component_series_resistance(ReactiveKind::Capacitor, net.c_blk, q, f);
        r_lt = component_series_resistance(ReactiveKind::Inductor, net.transformer.l_t, q, f);
        r_ctx = component_series_resistance(ReactiveKind::Capacitor, net.c_tx, q, f);
        r_cin = component_series_resistance(ReactiveKind::Capacitor, net.c_in, q, f);
        r_v = 1.0 / (dp.omega_in() * dv.c_v * dv.model.q_v);
    }

    static cplx z_rl(double w, double l, double r) { return {r, w * l}; }
    static cplx z_rc(double w, double c, double r) { return {r, -1.0 / (w * c)}; }

    cplx z_tank_a(double w) const {
        return z_parallel(z_rl(w, net.l_a, r_la), z_rc(w, net.c_a, r_ca));
    }
    // Ports and transformation stage seen from the tank-a top node.
    cplx z_up(double w) const {
        const cplx ports{dp.z0 / 2.0, 0.0};
        const cplx at_n2 = z_parallel(z_rc(w, net.c_in, r_cin), ports);
        const cplx through = z_rl(w, net.transformer.l_t, r_lt) + at_n2;
        return z_parallel(z_rc(w, net.c_tx, r_ctx), through);
    }
    cplx z1(double w) const { return z_tank_a(w) + z_up(w); }
    // Tank-b capacitance compensated for the DC block so the composite leg is
    // parallel-resonant exactly at f_in_opt.
    double c_b_of(double l_b) const {
        const double w_in = dp.omega_in();
        const double denom = w_in * w_in * l_b - 1.0 / net.c_blk;
        if (denom <= 0.0) {
            throw SynthesisError("tank-b leg is capacitive at f_in_opt", 0.0, denom);
        }
        return 1.0 / denom;
    }
    cplx z2(double w, double l_b) const {
        const double c_b = c_b_of(l_b);
        const double rlb = component_series_resistance(ReactiveKind::Inductor, l_b,
                                                       dp.q_l, dp.f_in_opt);
        const double rcb = component_series_resistance(ReactiveKind::Capacitor, c_b,
                                                       dp.q_l, dp.f_in_opt);
        const cplx leg_l = z_rl(w, l_b, rlb) + z_rc(w, net.c_blk, r_blk);
        return z_parallel(leg_l, z_rc(w, c_b, rcb));
    }
    cplx z3(double w, double l_c) const {
        const double rlc = component_series_resistance(ReactiveKind::Inductor, l_c,
                                                       dp.q_l, dp.f_in_opt);
        return z_rl(w, l_c, rlc) + cplx{r_v, -1.0 / (w * dv.c_v)};
    }
};

}  // namespace

cplx geq(cplx z1, cplx z2, cplx z3) { return z2 * z3 + z1 * (z2 + z3); }

ThresholdResult pth_full(const ImpedanceSet& imps, const BiasedVaractor& dv,
                         const DesignPoint& dp) {
    const cplx den_d = imps.z1_d + imps.z2_d;
    const double scale = std::max({std::abs(imps.z1_d), std::abs(imps.z2_d), 1.0});
    if (std::abs(den_d) < 1e-12 * scale || std::abs(imps.z2_in) < 1e-12) {
        throw SingularError("pth_full: singular branch-impedance denominator");
    }
    const cplx g_in = geq(imps.z1_in, imps.z2_in, imps.z3_in);
    const cplx g_d = geq(imps.z1_d, imps.z2_d, imps.z3_d);
    const double w2 = dp.omega_in() * dp.omega_in();
    const double mag = std::abs(g_d * g_in * w2 / (den_d * imps.z2_in));
    const double c4 = std::pow(dv.c_v, 4);
    ThresholdResult r;
    r.p_th_w = c4 / (2.0 * dp.z0 * dv.delta * dv.delta) * mag * mag;
    r.v_th_v = std::sqrt(8.0 * dp.z0 * r.p_th_w);
    return r;
}

double pth_resonant(const AnalyticLosses& losses, const BiasedVaractor& dv,
                    const DesignPoint& dp) {
    const double w2 = dp.omega_in() * dp.omega_in();
    const double k = losses.r_p * losses.r_d * w2;
    return std::pow(dv.c_v, 4) / (2.0 * dp.z0 * dv.delta * dv.delta) * k * k;
}

double rp_from_ztx(double r_s, double z_tx, double z0) {
    return r_s + 2.0 * z_tx * z_tx / z0;
}

LossPair rs_rd(const BiasedVaractor& dv, const DesignPoint& dp, double z_tx) {
    const double x = 1.0 / (dp.omega_in() * dv.c_v);
    LossPair out;
    out.exact.r_s = out.exact.r_d = x * (1.0 / dp.q_l + 1.0 / dv.model.q_v);
    out.approx.r_s = out.approx.r_d = x / dv.model.q_v;
    out.exact.r_p = rp_from_ztx(out.exact.r_s, z_tx, dp.z0);
    out.approx.r_p = rp_from_ztx(out.approx.r_s, z_tx, dp.z0);
    return out;
}

double pth_approx(const BiasedVaractor& dv, const DesignPoint& dp, double z_tx) {
    const double qv = dv.model.q_v;
    const double num = dp.z0 + 2.0 * dv.c_v * qv * z_tx * z_tx * dp.omega_in();
    const double den = 2.0 * std::pow(qv, 4) * std::pow(dp.z0, 3) * dv.delta * dv.delta;
    return num * num / den;
}

double zin_resonant(const AnalyticLosses& losses, double z_tx) {
    if (losses.r_s <= 0.0) return std::numeric_limits<double>::infinity();
    return z_tx * z_tx / losses.r_s;
}

InsertionLoss il_ss(cplx z_in, double z0) {
    if (std::abs(z_in) == 0.0) throw SingularError("il_ss: z_in is zero");
    InsertionLoss out;
    if (std::isinf(std::abs(z_in))) {
        out.ratio = 1.0;
        out.db = 0.0;
        return out;
    }
    const cplx t = 1.0 + z0 / (2.0 * z_in);
    out.ratio = std::norm(t);
    out.db = 10.0 * std::log10(out.ratio);
    return out;
}

InsertionLoss il_ss_from_rs(double r_s, double z_tx, double z0) {
    const double ztx2 = 2.0 * z_tx * z_tx;
    InsertionLoss out;
    const double t = (r_s * z0 + ztx2) / ztx2;
    out.ratio = t * t;
    out.db = 10.0 * std::log10(out.ratio);
    return out;
}

InsertionLoss il_ss_closed_form(const BiasedVaractor& dv, const DesignPoint& dp,
                                double z_tx) {
    const double den = dp.z0 + 2.0 * dv.c_v * dv.model.q_v * z_tx * z_tx * dp.omega_in();
    const double t = 1.0 - dp.z0 / den;
    InsertionLoss out;
    out.ratio = 1.0 / (t * t);
    out.db = 10.0 * std::log10(out.ratio);
    return out;
}

double pmax_approx(const BiasedVaractor& dv, const DesignPoint& dp, double z_tx) {
    const double v = dv.v_dc + dv.model.v_bi;
    const double qv = dv.model.q_v;
    const double num = 2.0 * dv.c_v * qv * dp.omega_in() * z_tx * z_tx + dp.z0;
    return v * v * num * num / (8.0 * qv * qv * dp.z0 * z_tx * z_tx);
}

PerformanceMetrics performance_of(const BiasedVaractor& dv, const DesignPoint& dp,
                                  double z_tx) {
    PerformanceMetrics m;
    m.p_th_w = pth_approx(dv, dp, z_tx);
    m.v_th_v = std::sqrt(8.0 * dp.z0 * m.p_th_w);
    m.il_ss_ratio = il_ss_closed_form(dv, dp, z_tx).ratio;
    m.p_max_w = pmax_approx(dv, dp, z_tx);
    return m;
}

SynthesizedNetwork synthesize_network(const BiasedVaractor& dv, const DesignPoint& dp,
                                      double z_tx, double l_a_seed) {
    dp.validate();
    if (z_tx <= 0 || l_a_seed <= 0) {
        throw DomainError("synthesize_network requires z_tx > 0 and l_a_seed > 0");
    }
    const double w_in = dp.omega_in();
    const double w_d = dp.omega_d();

    SynthesizedNetwork net;
    net.l_a = l_a_seed;
    net.c_a = 1.0 / (l_a_seed * w_d * w_d);
    net.transformer = {z_tx, z_tx / w_in, 1.0 / (z_tx * w_in)};
    net.c_tx = net.c_in = net.transformer.c_t;
    net.c_blk = 12e-12;

    LossySynth ls(net, dv, dp);

    auto f1 = [&](double l_c) { return (ls.z1(w_in) + ls.z3(w_in, l_c)).imag(); };
    auto f2 = [&](double l_b, double l_c) {
        return (ls.z2(w_d, l_b) + ls.z3(w_d, l_c)).imag();
    };

    // Initial guesses from the lossless decoupled conditions.
    const double x1 = ls.z1(w_in).imag();
    double l_c = (1.0 / (w_in * dv.c_v) - x1) / w_in;
    double x3d_guess = l_c > 0 ? w_d * l_c - 1.0 / (w_d * dv.c_v)
                               : -1.0 / (w_d * dv.c_v);
    double l_b = (-x3d_guess + 1.0 / (w_d * net.c_blk)) * 3.0 / (4.0 * w_d);
    if (l_c <= 0 || l_b <= 0) {
        throw SynthesisError("synthesize_network: no positive (l_b, l_c) root",
                             f1(std::max(l_c, 1e-12)),
                             f2(std::max(l_b, 1e-12), std::max(l_c, 1e-12)));
    }

    // Damped 2-D Newton with a finite-difference Jacobian; the system is
    // triangular (f1 depends on l_c only) so convergence is fast.
    const int max_iter = 200;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        const double r1 = f1(l_c);
        const double r2 = f2(l_b, l_c);
        const double s1 = std::max(1.0, std::abs((ls.z1(w_in) + ls.z3(w_in, l_c)).real()));
        const double s2 = std::max(1.0, std::abs((ls.z2(w_d, l_b) + ls.z3(w_d, l_c)).real()));
        if (std::abs(r1) < 1e-9 * s1 && std::abs(r2) < 1e-9 * s2) {
            converged = true;
            break;
        }
        const double hb = l_b * 1e-7, hc = l_c * 1e-7;
        const double j11 = (f1(l_c + hc) - r1) / hc;                // df1/dl_c
        const double j21 = (f2(l_b, l_c + hc) - r2) / hc;           // df2/dl_c
        const double j22 = (f2(l_b + hb, l_c) - r2) / hb;           // df2/dl_b
        if (std::abs(j11) < 1e-30 || std::abs(j22) < 1e-30) break;
        const double d_lc = -r1 / j11;
        const double d_lb = -(r2 + j21 * d_lc) / j22;
        double step = 1.0;
        bool accepted = false;
        const double norm0 = std::abs(r1) / s1 + std::abs(r2) / s2;
        for (int h = 0; h < 12 && !accepted; ++h) {
            const double lc_n = l_c + step * d_lc;
            const double lb_n = l_b + step * d_lb;
            if (lc_n > 0 && lb_n > 0 &&
                std::abs(f1(lc_n)) / s1 + std::abs(f2(lb_n, lc_n)) / s2 < norm0) {
                l_c = lc_n;
                l_b = lb_n;
                accepted = true;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }

    if (!converged) {
        // Bracketing fallback: f1 is monotone in l_c, then f2 in l_b.
        auto bisect = [](auto fn, double lo, double hi) -> double {
            double flo = fn(lo);
            if (flo * fn(hi) > 0) return -1.0;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                const double fm = fn(mid);
                if (fm * flo <= 0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            return 0.5 * (lo + hi);
        };
        const double lc_b = bisect(f1, 1e-15, 1e-3);
        if (lc_b > 0) {
            const double lb_b = bisect([&](double lb) { return f2(lb, lc_b); }, 1e-15, 1e-3);
            if (lb_b > 0) {
                l_c = lc_b;
                l_b = lb_b;
                converged = true;
            }
        }
    }

    const double res1 = f1(l_c);
    const double res2 = f2(l_b, l_c);
    const double re1 = std::abs((ls.z1(w_in) + ls.z3(w_in, l_c)).real());
    const double re2 = std::abs((ls.z2(w_d, l_b) + ls.z3(w_d, l_c)).real());
    if (!converged || std::abs(res1) > 1e-3 * re1 || std::abs(res2) > 1e-3 * re2) {
        throw SynthesisError("synthesize_network: residuals did not converge", res1, res2);
    }

    net.l_b = l_b;
    net.c_b = ls.c_b_of(l_b);
    net.l_c = l_c;
    net.residual_omega_in = res1;
    net.residual_omega_d = res2;
    return net;
}

ImpedanceSet branch_impedances(const SynthesizedNetwork& net, const BiasedVaractor& dv,
                               const DesignPoint& dp) {
    LossySynth ls(net, dv, dp);
    const double w_in = dp.omega_in();
    const double w_d = dp.omega_d();
    ImpedanceSet s;
    s.z1_in = ls.z1(w_in);
    s.z2_in = ls.z2(w_in, net.l_b);
    s.z3_in = ls.z3(w_in, net.l_c);
    s.z1_d = ls.z1(w_d);
    s.z2_d = ls.z2(w_d, net.l_b);
    s.z3_d = ls.z3(w_d, net.l_c);
    // Input impedance from the port node: transformation stage loaded by the
    // tank-a branch terminated in z2 || z3.
    const cplx below_lt =
        z_parallel(LossySynth::z_rc(w_in, net.c_tx, ls.r_ctx),
                   ls.z_tank_a(w_in) + z_parallel(s.z2_in, s.z3_in));
    const cplx lt = LossySynth::z_rl(w_in, net.transformer.l_t, ls.r_lt);
    s.z_in = z_parallel(LossySynth::z_rc(w_in, net.c_in, ls.r_cin), lt + below_lt);
    return s;
}

PfslCircuit to_netlist(const SynthesizedNetwork& syn, const BiasedVaractor& dv,
                       const DesignPoint& dp, double p_in_w, double p_pag_w) {
    PfslCircuit out;
    Netlist& n = out.netlist;
    const double ql = dp.q_l;
    auto add = [&](NetlistElement e) { n.elements.push_back(std::move(e)); };

    NetlistElement v1{"V1", ElementKind::CwSource, 1, 0};
    v1.source = {dp.f_in_opt, p_in_w, dp.z0};
    add(v1);
    NetlistElement a1{"A1", ElementKind::PagSource, 2, 0};
    a1.source = {dp.f_d(), p_pag_w, dp.z0};
    add(a1);
    add({"RLNK", ElementKind::Resistor, 1, 2, 1e-3});

    auto passive = [&](const char* name, ElementKind k, int a, int b, double v) {
        NetlistElement e{name, k, a, b, v};
        e.q = ql;
        add(e);
    };
    passive("CIN", ElementKind::Capacitor, 1, 0, syn.c_in);
    passive("LT", ElementKind::Inductor, 1, 3, syn.transformer.l_t);
    passive("CTX", ElementKind::Capacitor, 3, 0, syn.c_tx);
    passive("LA", ElementKind::Inductor, 3, 4, syn.l_a);
    passive("CA", ElementKind::Capacitor, 3, 4, syn.c_a);
    passive("LB", ElementKind::Inductor, 4, 5, syn.l_b);
    passive("CBLK", ElementKind::Capacitor, 5, 0, syn.c_blk);
    passive("CB", ElementKind::Capacitor, 4, 0, syn.c_b);
    passive("LC", ElementKind::Inductor, 4, 6, syn.l_c);

    NetlistElement xd{"XD", ElementKind::Varactor, 6, 0};
    xd.varactor = dv;
    xd.model_name = "smv";
    add(xd);

    n.ports = {{1, 0, dp.z0}, {2, 0, dp.z0}};
    n.v_bias = dv.v_dc;
    n.models["smv"] = dv.model;

    out.map.node_port1 = 1;
    out.map.node_port2 = 2;
    out.map.node_junction = 4;
    out.map.node_diode = 6;
    out.map.branch_a = {"CIN", "LT", "CTX", "LA", "CA"};
    out.map.branch_b = {"LB", "CBLK", "CB"};
    out.map.branch_c = {"LC", "XD"};
    out.map.source_names = {"V1", "A1"};
    out.map.link_name = "RLNK";
    return out;
}

ContourGrid contour_grid(GridMetric metric, const AxisSpec& x, const AxisSpec& y,
                         const BiasedVaractor& dv, const DesignPoint& dp, double z_tx) {
    if (x.steps < 1 || y.steps < 1 || x.lo <= 0 || y.lo <= 0 || x.hi < x.lo || y.hi < y.lo) {
        throw DomainError("contour_grid: axis ranges must be positive and ordered");
    }
    ContourGrid g;
    g.metric = metric;
    g.x = x;
    g.y = y;
    auto fill_axis = [](const AxisSpec& a, std::vector<double>& vals) {
        if (a.steps == 1) {
            vals.push_back(a.lo);
            return;
        }
        for (int i = 0; i < a.steps; ++i) {
            vals.push_back(a.lo + (a.hi - a.lo) * i / (a.steps - 1));
        }
    };
    fill_axis(x, g.xs);
    fill_axis(y, g.ys);

    auto apply = [](GridAxis axis, double v, BiasedVaractor& d, DesignPoint& p, double& zt) {
        switch (axis) {
            case GridAxis::Cv: d.c_v = v; break;
            case GridAxis::Ztx: zt = v; break;
            case GridAxis::Vdc: d = capacitance_at_bias(d.model, v); break;
            case GridAxis::Fin: p.f_in_opt = v; break;
        }
    };

    g.values.reserve(g.xs.size() * g.ys.size());
    for (double yv : g.ys) {
        for (double xv : g.xs) {
            BiasedVaractor d = dv;
            DesignPoint p = dp;
            double zt = z_tx;
            double value = std::numeric_limits<double>::quiet_NaN();
            try {
                apply(x.axis, xv, d, p, zt);
                apply(y.axis, yv, d, p, zt);
                switch (metric) {
                    case GridMetric::Pth: value = pth_approx(d, p, zt); break;
                    case GridMetric::IlSs: value = il_ss_closed_form(d, p, zt).ratio; break;
                    case GridMetric::Pmax: value = pmax_approx(d, p, zt); break;
                }
            } catch (const Error&) {
                ++g.nan_count;
            }
            g.values.push_back(value);
        }
    }
    return g;
}

}  // namespace pfsl
