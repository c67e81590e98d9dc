#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfsl/netlist.hpp"

namespace pfsl {

struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string message;
};

// Parse result: the netlist is present only when no diagnostics were emitted.
struct NetlistDocument {
    std::string source;
    std::optional<Netlist> netlist;
    std::vector<Diagnostic> diagnostics;
};

// Tolerant parse: never throws on malformed text, reports diagnostics instead.
NetlistDocument parse_netlist_document(const std::string& text);

// Strict parse: throws ParseError carrying the first diagnostic.
Netlist parse_netlist(const std::string& text);

std::string serialize_netlist(const Netlist& net);

// Structural equality for round-trip checks.
bool structurally_equal(const Netlist& a, const Netlist& b);

// SPICE-style value with optional unit suffix (f p n u m k meg g).
std::optional<double> parse_value(const std::string& token);

}  // namespace pfsl
