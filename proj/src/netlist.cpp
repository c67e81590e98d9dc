#include "pfsl/netlist.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pfsl/units.hpp"

namespace pfsl {

const NetlistElement* Netlist::find(const std::string& name) const {
    for (const auto& e : elements) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

const NetlistElement* Netlist::first_of(ElementKind kind) const {
    for (const auto& e : elements) {
        if (e.kind == kind) return &e;
    }
    return nullptr;
}

double Netlist::f_ref() const {
    if (f_ref_hz > 0.0) return f_ref_hz;
    if (const auto* cw = first_of(ElementKind::CwSource)) return cw->source.f_hz;
    if (const auto* pag = first_of(ElementKind::PagSource)) return pag->source.f_hz;
    for (const auto& e : elements) {
        const bool lossy = (e.kind == ElementKind::Inductor ||
                            e.kind == ElementKind::Capacitor) &&
                           std::isfinite(e.q);
        if (lossy || e.kind == ElementKind::Varactor) {
            throw DomainError(
                "netlist with finite-Q elements needs a source or .fref line");
        }
    }
    return 1.0;  // lossless network, value unused
}

std::vector<Port> Netlist::effective_ports() const {
    if (!ports.empty()) return ports;
    std::vector<Port> out;
    if (const auto* cw = first_of(ElementKind::CwSource)) {
        out.push_back({cw->node_a, cw->node_b, cw->source.z_s});
    }
    if (const auto* pag = first_of(ElementKind::PagSource)) {
        out.push_back({pag->node_a, pag->node_b, pag->source.z_s});
    }
    return out;
}

std::vector<int> Netlist::validate() const {
    std::set<std::string> names;
    std::set<int> nodes{0};
    int n_pag = 0;
    for (const auto& e : elements) {
        if (!names.insert(e.name).second) {
            throw DomainError("duplicate element name: " + e.name);
        }
        nodes.insert(e.node_a);
        nodes.insert(e.node_b);
        switch (e.kind) {
            case ElementKind::Resistor:
            case ElementKind::Inductor:
            case ElementKind::Capacitor:
                if (e.value <= 0) throw DomainError(e.name + ": value must be positive");
                if (e.q <= 0) throw DomainError(e.name + ": Q must be positive");
                break;
            case ElementKind::Varactor:
                if (e.varactor.c_v <= 0) {
                    throw DomainError(e.name + ": varactor not biased");
                }
                break;
            case ElementKind::CwSource:
            case ElementKind::PagSource:
                if (e.source.f_hz <= 0 || e.source.z_s <= 0 || e.source.p_avail_w < 0) {
                    throw DomainError(e.name + ": source requires f > 0, zs > 0, p >= 0");
                }
                if (e.kind == ElementKind::PagSource) ++n_pag;
                break;
        }
    }
    if (n_pag > 1) throw DomainError("at most one pAG source per netlist");
    const auto* cw = first_of(ElementKind::CwSource);
    const auto* pag = first_of(ElementKind::PagSource);
    if (cw && pag) {
        const double f_d = cw->source.f_hz / 2.0;
        if (std::abs(pag->source.f_hz - f_d) > 1e-9 * f_d) {
            throw DomainError("pAG frequency must be half the cw frequency");
        }
    }
    for (const auto& p : ports) {
        if (!nodes.count(p.node) || !nodes.count(p.ref)) {
            throw DomainError("port references an undeclared node");
        }
        if (p.z0 <= 0) throw DomainError("port z0 must be positive");
    }
    if (ports.empty() && !cw && !pag) {
        throw DomainError("netlist needs at least one port or source");
    }

    // DC reachability from ground through R, L and varactor conduction.
    std::map<int, int> parent;
    for (int n : nodes) parent[n] = n;
    auto root = [&](int n) {
        while (parent[n] != n) n = parent[n] = parent[parent[n]];
        return n;
    };
    auto unite = [&](int a, int b) { parent[root(a)] = root(b); };
    for (const auto& e : elements) {
        if (e.kind == ElementKind::Capacitor) continue;
        unite(e.node_a, e.node_b);
    }
    std::vector<int> floating;
    for (int n : nodes) {
        if (n != 0 && root(n) != root(0)) floating.push_back(n);
    }
    return floating;
}

int ElaboratedNetlist::compact(int original_node) const {
    auto it = compact_of_node.find(original_node);
    if (it == compact_of_node.end()) {
        throw DomainError("node " + std::to_string(original_node) + " not in network");
    }
    return it->second;
}

ElaboratedNetlist elaborate(const Netlist& net, const std::vector<std::string>& exclude) {
    net.validate();
    const std::set<std::string> skip(exclude.begin(), exclude.end());
    for (const auto& name : exclude) {
        if (!net.find(name)) throw DomainError("exclude names unknown element: " + name);
    }

    const double f_ref = net.f_ref();
    ElaboratedNetlist out;
    out.compact_of_node[0] = -1;

    auto node_slot = [&](int original) {
        auto it = out.compact_of_node.find(original);
        if (it != out.compact_of_node.end()) return it->second;
        const int idx = out.n_nodes++;
        out.compact_of_node[original] = idx;
        out.node_names.push_back(std::to_string(original));
        out.original_nodes.push_back(original);
        return idx;
    };
    auto internal_slot = [&](const std::string& name) {
        const int idx = out.n_nodes++;
        out.node_names.push_back(name);
        out.original_nodes.push_back(-1);
        return idx;
    };

    // Keep original node numbering stable first so engines can index results
    // by netlist order regardless of exclusions.
    for (const auto& e : net.elements) {
        if (skip.count(e.name)) continue;
        node_slot(e.node_a);
        node_slot(e.node_b);
    }

    for (const auto& e : net.elements) {
        if (skip.count(e.name)) continue;
        const int a = out.compact_of_node.at(e.node_a);
        const int b = out.compact_of_node.at(e.node_b);
        switch (e.kind) {
            case ElementKind::Resistor: {
                out.branches.push_back({BranchKind::Res, e.name, a, b, e.value});
                break;
            }
            case ElementKind::Inductor: {
                const double r = component_series_resistance(ReactiveKind::Inductor,
                                                             e.value, e.q, f_ref);
                int top = a;
                if (r > 0) {
                    const int mid = internal_slot(e.name + "._r");
                    out.branches.push_back({BranchKind::Res, e.name, a, mid, r});
                    top = mid;
                }
                ElabBranch l{BranchKind::Ind, e.name, top, b, e.value};
                l.branch_index = out.n_inductors++;
                out.branches.push_back(l);
                break;
            }
            case ElementKind::Capacitor: {
                const double r = component_series_resistance(ReactiveKind::Capacitor,
                                                             e.value, e.q, f_ref);
                int top = a;
                if (r > 0) {
                    const int mid = internal_slot(e.name + "._r");
                    out.branches.push_back({BranchKind::Res, e.name, a, mid, r});
                    top = mid;
                }
                out.branches.push_back({BranchKind::Cap, e.name, top, b, e.value});
                break;
            }
            case ElementKind::Varactor: {
                const auto& dv = e.varactor;
                const double r = 1.0 / (omega_from_hz(f_ref) * dv.c_v * dv.model.q_v);
                int top = a;
                if (r > 0) {
                    const int mid = internal_slot(e.name + "._r");
                    out.branches.push_back({BranchKind::Res, e.name, a, mid, r});
                    top = mid;
                }
                ElabBranch j{BranchKind::Junction, e.name, top, b, 0.0};
                j.dv = e.varactor;
                out.branches.push_back(j);
                break;
            }
            case ElementKind::CwSource:
            case ElementKind::PagSource: {
                ElabBranch s{BranchKind::Source, e.name, a, b, 0.0};
                s.source = e.source;
                s.is_pag = e.kind == ElementKind::PagSource;
                out.branches.push_back(s);
                break;
            }
        }
    }
    return out;
}

}  // namespace pfsl
