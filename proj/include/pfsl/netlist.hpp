#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pfsl/errors.hpp"
#include "pfsl/varactor.hpp"

namespace pfsl {

enum class ElementKind { Resistor, Inductor, Capacitor, Varactor, CwSource, PagSource };

struct SourceSpec {
    double f_hz = 0.0;
    double p_avail_w = 0.0;  // available power into a matched load
    double z_s = 50.0;       // source impedance, ohms
};

struct NetlistElement {
    std::string name;
    ElementKind kind = ElementKind::Resistor;
    int node_a = 0;
    int node_b = 0;
    double value = 0.0;  // R: ohms, L: henries, C: farads
    double q = std::numeric_limits<double>::infinity();  // L/C quality factor at f_ref
    BiasedVaractor varactor;  // Varactor kind only
    SourceSpec source;        // source kinds only
    std::string model_name;   // varactor model reference, kept for serialization
};

struct Port {
    int node = 0;
    int ref = 0;       // reference node (ground in this artifact)
    double z0 = 50.0;
};

// Node-connected element list. Node 0 is ground; ports are single-ended.
struct Netlist {
    std::vector<NetlistElement> elements;
    std::vector<Port> ports;
    double v_bias = 0.0;     // shared varactor DC bias, V
    double f_ref_hz = 0.0;   // explicit Q reference frequency; 0 = derive
    std::map<std::string, VaractorModel> models;

    const NetlistElement* find(const std::string& name) const;
    const NetlistElement* first_of(ElementKind kind) const;

    // Reference frequency for Q-to-resistance conversion: the explicit value,
    // else the cw source's frequency, else the first source's. Source-free
    // lossless netlists don't need one.
    double f_ref() const;

    // Ports with terminations resolved: an explicit .port list wins; otherwise
    // ports derive from the cw (port 1) and pAG (port 2) sources.
    std::vector<Port> effective_ports() const;

    // Structural checks: unique names, positive values, one pAG at half the cw
    // frequency, at least one port or source, every node DC-reachable from
    // ground. Returns the list of DC-floating nodes instead of throwing for
    // them so callers can decide.
    std::vector<int> validate() const;
};

// Flat branch list with lossy elements expanded into a series resistance plus
// the ideal element, and the varactor split into its loss resistance and the
// nonlinear junction. All engines consume this form.
enum class BranchKind { Res, Ind, Cap, Junction, Source };

struct ElabBranch {
    BranchKind kind = BranchKind::Res;
    std::string name;        // original element name (internal parts share it)
    int a = -1, b = -1;      // compact node indices, -1 = ground
    double value = 0.0;      // R ohms, L henries, C farads
    BiasedVaractor dv;       // Junction kind only
    SourceSpec source;
    bool is_pag = false;     // Source kind only
    int branch_index = -1;   // inductor branch-current slot
};

struct ElaboratedNetlist {
    int n_nodes = 0;       // compact non-ground node count
    int n_inductors = 0;   // branch-current unknowns
    std::vector<ElabBranch> branches;
    std::map<int, int> compact_of_node;        // original node id -> compact index
    std::vector<std::string> node_names;       // per compact index
    std::vector<int> original_nodes;           // original ids, compact order (-1 for internals)

    int compact(int original_node) const;
    int unknown_count() const { return n_nodes + n_inductors; }
};

// Expand the netlist for analysis. `exclude` removes whole elements by name
// (all of their expanded parts). Throws DomainError on validation failure.
ElaboratedNetlist elaborate(const Netlist& net,
                            const std::vector<std::string>& exclude = {});

}  // namespace pfsl
