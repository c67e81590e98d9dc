#include "pfsl/ac_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "pfsl/units.hpp"

namespace pfsl {

namespace {

constexpr cplx kJ{0.0, 1.0};

// Complex MNA at one frequency: node voltages plus inductor branch currents.
struct MnaSystem {
    Eigen::MatrixXcd a;
    Eigen::VectorXcd b;
    const ElaboratedNetlist* elab = nullptr;

    explicit MnaSystem(const ElaboratedNetlist& e)
        : a(Eigen::MatrixXcd::Zero(e.unknown_count(), e.unknown_count())),
          b(Eigen::VectorXcd::Zero(e.unknown_count())),
          elab(&e) {}

    void add_admittance(int na, int nb, cplx y) {
        if (na >= 0) a(na, na) += y;
        if (nb >= 0) a(nb, nb) += y;
        if (na >= 0 && nb >= 0) {
            a(na, nb) -= y;
            a(nb, na) -= y;
        }
    }

    void add_current(int na, int nb, cplx i) {
        if (na >= 0) b(na) += i;
        if (nb >= 0) b(nb) -= i;
    }

    void stamp_passive(const ElabBranch& br, double w) {
        switch (br.kind) {
            case BranchKind::Res:
                add_admittance(br.a, br.b, 1.0 / br.value);
                break;
            case BranchKind::Cap:
                add_admittance(br.a, br.b, kJ * w * br.value);
                break;
            case BranchKind::Junction:
                add_admittance(br.a, br.b, kJ * w * br.dv.c_v);
                break;
            case BranchKind::Ind: {
                const int k = elab->n_nodes + br.branch_index;
                if (br.a >= 0) {
                    a(br.a, k) += 1.0;
                    a(k, br.a) += 1.0;
                }
                if (br.b >= 0) {
                    a(br.b, k) -= 1.0;
                    a(k, br.b) -= 1.0;
                }
                a(k, k) -= kJ * w * br.value;
                break;
            }
            case BranchKind::Source:
                add_admittance(br.a, br.b, 1.0 / br.source.z_s);
                break;
        }
    }

    Eigen::VectorXcd solve() const {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
        const auto diag = lu.matrixLU().diagonal();
        double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
        int argmin = 0;
        for (int i = 0; i < diag.size(); ++i) {
            const double m = std::abs(diag(i));
            if (m < dmin) {
                dmin = m;
                argmin = i;
            }
            dmax = std::max(dmax, m);
        }
        if (!(dmin > dmax * 1e-12)) {
            std::string culprit = argmin < elab->n_nodes
                                      ? "node " + elab->node_names[argmin]
                                      : "an inductor branch";
            throw SingularError("degenerate topology: singular system near " + culprit);
        }
        return lu.solve(b);
    }
};

cplx voltage_between(const ElaboratedNetlist& e, const Eigen::VectorXcd& x, int node,
                     int ref) {
    const int ca = e.compact(node);
    const int cb = e.compact(ref);
    const cplx va = ca >= 0 ? x(ca) : cplx{0, 0};
    const cplx vb = cb >= 0 ? x(cb) : cplx{0, 0};
    return va - vb;
}

// Port realizations: a source element lying on the port supplies the
// termination; otherwise a synthetic z0 shunt is added.
struct ResolvedPort {
    Port port;
    bool has_source = false;
};

std::vector<ResolvedPort> resolve_ports(const Netlist& net) {
    std::vector<ResolvedPort> out;
    for (const auto& p : net.effective_ports()) {
        ResolvedPort rp{p, false};
        for (const auto& e : net.elements) {
            if ((e.kind == ElementKind::CwSource || e.kind == ElementKind::PagSource) &&
                e.node_a == p.node && e.node_b == p.ref) {
                if (std::abs(e.source.z_s - p.z0) > 1e-9 * p.z0) {
                    throw DomainError("port termination disagrees with source impedance of " +
                                      e.name);
                }
                rp.has_source = true;
            }
        }
        out.push_back(rp);
    }
    return out;
}

}  // namespace

cplx AcSolution::at_node(int original_node) const {
    const int c = elab.compact(original_node);
    return c >= 0 ? x(c) : cplx{0, 0};
}

AcSolution ac_solve(const Netlist& net, double f) {
    if (f <= 0) throw DomainError("ac_solve requires f > 0");
    AcSolution sol{elaborate(net), {}};
    const double w = omega_from_hz(f);
    MnaSystem sys(sol.elab);
    bool drove = false;
    for (const auto& br : sol.elab.branches) {
        sys.stamp_passive(br, w);
        if (br.kind == BranchKind::Source &&
            std::abs(br.source.f_hz - f) <= 1e-9 * f) {
            const double e = emf_from_available_power(br.source.p_avail_w, br.source.z_s);
            sys.add_current(br.a, br.b, e / br.source.z_s);
            drove = true;
        }
    }
    if (!drove) throw DomainError("ac_solve: no source at the analysis frequency");
    sol.x = sys.solve();
    return sol;
}

SParameters sparams_at(const Netlist& net, double f) {
    const auto rports = resolve_ports(net);
    if (rports.empty() || rports.size() > 2) {
        throw DomainError("sparams_at needs one or two ports");
    }
    const ElaboratedNetlist elab = elaborate(net);
    const double w = omega_from_hz(f);

    SParameters s;
    s.frequency = f;
    for (size_t drive = 0; drive < rports.size(); ++drive) {
        MnaSystem sys(elab);
        for (const auto& br : elab.branches) sys.stamp_passive(br, w);
        for (const auto& rp : rports) {
            if (!rp.has_source) {
                sys.add_admittance(elab.compact(rp.port.node), elab.compact(rp.port.ref),
                                   1.0 / rp.port.z0);
            }
        }
        const double e = 1.0;
        const auto& dp = rports[drive].port;
        sys.add_current(elab.compact(dp.node), elab.compact(dp.ref), e / dp.z0);
        const Eigen::VectorXcd x = sys.solve();

        for (size_t i = 0; i < rports.size(); ++i) {
            const auto& pi = rports[i].port;
            const cplx v = voltage_between(elab, x, pi.node, pi.ref);
            const cplx b_i = (2.0 * v - (i == drive ? e : 0.0)) /
                             (2.0 * std::sqrt(pi.z0));
            const cplx a_j = e / (2.0 * std::sqrt(dp.z0));
            const cplx sij = b_i / a_j;
            if (i == 0 && drive == 0) s.s11 = sij;
            if (i == 1 && drive == 0) s.s21 = sij;
            if (i == 0 && drive == 1) s.s12 = sij;
            if (i == 1 && drive == 1) s.s22 = sij;
        }
    }
    return s;
}

FrequencySweep sweep_sparams(const Netlist& net, double f_start, double f_stop,
                             int n_points) {
    if (!(f_start < f_stop) || n_points < 2) {
        throw DomainError("sweep_sparams requires f_start < f_stop and n_points >= 2");
    }
    FrequencySweep out;
    out.points.reserve(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double f = f_start + (f_stop - f_start) * i / (n_points - 1);
        out.points.push_back(sparams_at(net, f));
    }

    size_t peak = 0;
    for (size_t i = 1; i < out.points.size(); ++i) {
        if (std::abs(out.points[i].s21) > std::abs(out.points[peak].s21)) peak = i;
    }
    out.f_peak = out.points[peak].frequency;
    const double peak_db = db_from_mag(std::abs(out.points[peak].s21));
    out.il_min_db = -peak_db;

    // 3-dB crossings by linear interpolation in dB.
    auto cross = [&](int dir) -> double {
        double prev_db = peak_db;
        for (size_t k = 1;; ++k) {
            const long i = static_cast<long>(peak) + dir * static_cast<long>(k);
            if (i < 0 || i >= static_cast<long>(out.points.size())) return -1.0;
            const double d = db_from_mag(std::abs(out.points[i].s21));
            if (d <= peak_db - 3.0) {
                const double f1 = out.points[i - dir].frequency;
                const double f2 = out.points[i].frequency;
                const double t = (peak_db - 3.0 - prev_db) / (d - prev_db);
                return f1 + t * (f2 - f1);
            }
            prev_db = d;
        }
    };
    const double f_lo = cross(-1);
    const double f_hi = cross(+1);
    if (f_lo > 0 && f_hi > 0) {
        out.bw_frac = (f_hi - f_lo) / (0.5 * (f_hi + f_lo));
    }
    return out;
}

cplx driving_point_impedance(const Netlist& net, int node,
                             const std::vector<std::string>& exclude, double f) {
    const ElaboratedNetlist elab = elaborate(net, exclude);
    auto it = elab.compact_of_node.find(node);
    if (it == elab.compact_of_node.end()) {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    const int target = it->second;
    if (target < 0) throw DomainError("driving-point node is ground");

    // Connected component of ground; anything outside is dropped so isolated
    // islands cannot make the system singular.
    const int n = elab.n_nodes;
    std::vector<int> parent(n + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    auto idx = [n](int compact) { return compact < 0 ? n : compact; };
    for (const auto& br : elab.branches) parent[root(idx(br.a))] = root(idx(br.b));
    if (root(target) != root(n)) {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }

    ElaboratedNetlist sub;
    sub.compact_of_node[0] = -1;
    std::map<int, int> remap{{-1, -1}};
    auto slot = [&](int old_compact) {
        auto f2 = remap.find(old_compact);
        if (f2 != remap.end()) return f2->second;
        const int s = sub.n_nodes++;
        remap[old_compact] = s;
        sub.node_names.push_back(elab.node_names[old_compact]);
        sub.original_nodes.push_back(elab.original_nodes[old_compact]);
        return s;
    };
    for (const auto& br : elab.branches) {
        if (root(idx(br.a)) != root(n)) continue;
        ElabBranch nb = br;
        nb.a = slot(br.a < 0 ? -1 : br.a);
        nb.b = slot(br.b < 0 ? -1 : br.b);
        if (nb.kind == BranchKind::Ind) nb.branch_index = sub.n_inductors++;
        sub.branches.push_back(nb);
    }

    MnaSystem sys(sub);
    const double w = omega_from_hz(f);
    for (const auto& br : sub.branches) sys.stamp_passive(br, w);
    sys.add_current(remap.at(target), -1, 1.0);
    const Eigen::VectorXcd x = sys.solve();
    return x(remap.at(target));
}

std::vector<SParameters> cascade(const std::vector<SParameters>& a,
                                 const std::vector<SParameters>& b) {
    if (a.size() != b.size()) throw DomainError("cascade: frequency grids differ");
    std::vector<SParameters> out;
    out.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        const auto& pa = a[i];
        const auto& pb = b[i];
        if (std::abs(pa.frequency - pb.frequency) > 1e-9 * pa.frequency) {
            throw DomainError("cascade: frequency grids differ");
        }
        // Transfer form mapping port-2 waves to port-1 waves.
        auto to_t = [](const SParameters& s, cplx t[4]) {
            t[0] = (s.s12 * s.s21 - s.s11 * s.s22) / s.s21;
            t[1] = s.s11 / s.s21;
            t[2] = -s.s22 / s.s21;
            t[3] = 1.0 / s.s21;
        };
        cplx ta[4], tb[4], tc[4];
        to_t(pa, ta);
        to_t(pb, tb);
        tc[0] = ta[0] * tb[0] + ta[1] * tb[2];
        tc[1] = ta[0] * tb[1] + ta[1] * tb[3];
        tc[2] = ta[2] * tb[0] + ta[3] * tb[2];
        tc[3] = ta[2] * tb[1] + ta[3] * tb[3];
        SParameters s;
        s.frequency = pa.frequency;
        s.s21 = 1.0 / tc[3];
        s.s22 = -tc[2] / tc[3];
        s.s11 = tc[1] / tc[3];
        s.s12 = tc[0] - tc[1] * tc[2] / tc[3];
        out.push_back(s);
    }
    return out;
}

ImpedanceSet extract_impedance_set(const Netlist& net, const PfslNetlistMap& map,
                                   const DesignPoint& dp) {
    auto join = [](std::initializer_list<const std::vector<std::string>*> lists) {
        std::vector<std::string> out;
        for (const auto* l : lists) out.insert(out.end(), l->begin(), l->end());
        return out;
    };
    const auto not_a = join({&map.branch_b, &map.branch_c});
    const auto not_b = join({&map.branch_a, &map.branch_c});
    const auto not_c = join({&map.branch_a, &map.branch_b});
    std::vector<std::string> off_branch = map.source_names;
    off_branch.push_back(map.link_name);

    const double f_in = dp.f_in_opt;
    const double f_d = dp.f_d();
    ImpedanceSet s;
    s.z1_in = driving_point_impedance(net, map.node_junction, not_a, f_in);
    s.z2_in = driving_point_impedance(net, map.node_junction, not_b, f_in);
    s.z3_in = driving_point_impedance(net, map.node_junction, not_c, f_in);
    s.z1_d = driving_point_impedance(net, map.node_junction, not_a, f_d);
    s.z2_d = driving_point_impedance(net, map.node_junction, not_b, f_d);
    s.z3_d = driving_point_impedance(net, map.node_junction, not_c, f_d);
    s.z_in = driving_point_impedance(net, map.node_port1, off_branch, f_in);
    return s;
}

}  // namespace pfsl
