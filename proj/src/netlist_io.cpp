#include "pfsl/netlist_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace pfsl {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct Token {
    std::string text;
    int column = 0;
};

std::vector<Token> split_tokens(const std::string& line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        const size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

// A raw X-element line, resolved after all .model cards are known.
struct PendingVaractor {
    std::string name;
    int node_a = 0, node_b = 0;
    std::string model;
    int line = 0, column = 0;
};

}  // namespace

std::optional<double> parse_value(const std::string& token) {
    if (token.empty()) return std::nullopt;
    const char* begin = token.data();
    const char* end = begin + token.size();
    double v = 0.0;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{}) return std::nullopt;
    std::string suffix = lower(std::string(res.ptr, end));
    if (suffix.empty()) return v;
    static const std::map<std::string, double> scale = {
        {"f", 1e-15}, {"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6},
        {"m", 1e-3},  {"k", 1e3},   {"meg", 1e6}, {"g", 1e9},
    };
    auto it = scale.find(suffix);
    if (it == scale.end()) return std::nullopt;
    return v * it->second;
}

NetlistDocument parse_netlist_document(const std::string& text) {
    NetlistDocument doc;
    doc.source = text;
    Netlist net;
    std::vector<PendingVaractor> pending;
    std::vector<std::pair<int, int>> port_lines;
    std::set<std::string> names;
    std::set<int> declared_nodes{0};

    auto fail = [&](int line, int col, const std::string& msg) {
        doc.diagnostics.push_back({line, col, msg});
    };

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const size_t cut = raw.find_first_of("#*");
        std::string line = cut == std::string::npos ? raw : raw.substr(0, cut);
        // '*' only starts a comment at the line head or after whitespace.
        if (cut != std::string::npos && raw[cut] == '*' && cut != 0 &&
            !std::isspace(static_cast<unsigned char>(raw[cut - 1]))) {
            line = raw;
        }
        auto toks = split_tokens(line);
        if (toks.empty()) continue;

        auto keyval = [&](size_t from, std::map<std::string, std::string>& kv) {
            for (size_t i = from; i < toks.size(); ++i) {
                const auto eq = toks[i].text.find('=');
                if (eq == std::string::npos) {
                    fail(line_no, toks[i].column, "expected key=value, got '" + toks[i].text + "'");
                    return false;
                }
                kv[lower(toks[i].text.substr(0, eq))] = toks[i].text.substr(eq + 1);
            }
            return true;
        };
        auto need_int = [&](const Token& t, int& out) {
            int v = 0;
            auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size() || v < 0) {
                fail(line_no, t.column, "malformed node id '" + t.text + "'");
                return false;
            }
            out = v;
            return true;
        };
        auto need_value = [&](const Token& t, double& out) {
            auto v = parse_value(t.text);
            if (!v) {
                fail(line_no, t.column, "malformed number '" + t.text + "'");
                return false;
            }
            out = *v;
            return true;
        };

        const std::string head = lower(toks[0].text);
        if (head == ".port") {
            if (toks.size() != 4) {
                fail(line_no, toks[0].column, ".port expects: .port <node> <ref> <z0>");
                continue;
            }
            Port p;
            double z0 = 0;
            if (!need_int(toks[1], p.node) || !need_int(toks[2], p.ref) ||
                !need_value(toks[3], z0)) {
                continue;
            }
            p.z0 = z0;
            net.ports.push_back(p);
            port_lines.push_back({line_no, toks[1].column});
            continue;
        }
        if (head == ".vbias") {
            if (toks.size() != 2 || !need_value(toks[1], net.v_bias)) {
                if (toks.size() != 2) fail(line_no, toks[0].column, ".vbias expects one value");
            }
            continue;
        }
        if (head == ".model") {
            if (toks.size() < 2) {
                fail(line_no, toks[0].column, ".model expects a name");
                continue;
            }
            std::map<std::string, std::string> kv;
            if (!keyval(2, kv)) continue;
            VaractorModel m;
            bool ok = true;
            auto set = [&](const char* key, double& field) {
                auto it = kv.find(key);
                if (it == kv.end()) return;
                auto v = parse_value(it->second);
                if (!v) {
                    fail(line_no, toks[0].column,
                         std::string(".model: malformed ") + key + "='" + it->second + "'");
                    ok = false;
                    return;
                }
                field = *v;
            };
            set("cj0", m.c_j0);
            set("vj", m.v_j);
            set("gamma", m.gamma);
            set("cpkg", m.c_pkg);
            set("qv", m.q_v);
            set("vbi", m.v_bi);
            set("is", m.i_s);
            set("n", m.n_ideality);
            set("bv", m.v_breakdown);
            if (ok) net.models[toks[1].text] = m;
            continue;
        }
        if (head[0] == '.') {
            fail(line_no, toks[0].column, "unknown directive '" + toks[0].text + "'");
            continue;
        }

        // Element line.
        if (toks.size() < 3) {
            fail(line_no, toks[0].column, "element line needs name and two nodes");
            continue;
        }
        const char prefix = static_cast<char>(std::toupper(static_cast<unsigned char>(toks[0].text[0])));
        if (!names.insert(toks[0].text).second) {
            fail(line_no, toks[0].column, "duplicate element name '" + toks[0].text + "'");
            continue;
        }
        NetlistElement e;
        e.name = toks[0].text;
        if (!need_int(toks[1], e.node_a) || !need_int(toks[2], e.node_b)) continue;
        declared_nodes.insert(e.node_a);
        declared_nodes.insert(e.node_b);

        switch (prefix) {
            case 'R':
            case 'L':
            case 'C': {
                if (toks.size() < 4) {
                    fail(line_no, toks[0].column, "missing value");
                    continue;
                }
                if (!need_value(toks[3], e.value)) continue;
                std::map<std::string, std::string> kv;
                if (!keyval(4, kv)) continue;
                if (auto it = kv.find("q"); it != kv.end()) {
                    auto q = parse_value(it->second);
                    if (!q) {
                        fail(line_no, toks[0].column, "malformed Q value");
                        continue;
                    }
                    e.q = *q;
                }
                e.kind = prefix == 'R'   ? ElementKind::Resistor
                         : prefix == 'L' ? ElementKind::Inductor
                                         : ElementKind::Capacitor;
                break;
            }
            case 'X': {
                std::map<std::string, std::string> kv;
                if (!keyval(3, kv)) continue;
                auto it = kv.find("model");
                if (it == kv.end()) {
                    fail(line_no, toks[0].column, "varactor needs model=<name>");
                    continue;
                }
                pending.push_back({e.name, e.node_a, e.node_b, it->second, line_no,
                                   toks[0].column});
                continue;
            }
            case 'V':
            case 'A': {
                std::map<std::string, std::string> kv;
                if (!keyval(3, kv)) continue;
                bool ok = true;
                auto grab = [&](const char* key, double& field, bool required) {
                    auto kit = kv.find(key);
                    if (kit == kv.end()) {
                        if (required) {
                            fail(line_no, toks[0].column,
                                 std::string("source needs ") + key + "=");
                            ok = false;
                        }
                        return;
                    }
                    auto v = parse_value(kit->second);
                    if (!v) {
                        fail(line_no, toks[0].column,
                             std::string("malformed ") + key + " value");
                        ok = false;
                        return;
                    }
                    field = *v;
                };
                grab("f", e.source.f_hz, true);
                grab("p", e.source.p_avail_w, true);
                grab("zs", e.source.z_s, false);
                if (!ok) continue;
                e.kind = prefix == 'V' ? ElementKind::CwSource : ElementKind::PagSource;
                break;
            }
            default:
                fail(line_no, toks[0].column,
                     std::string("unknown element prefix '") + toks[0].text[0] + "'");
                continue;
        }
        net.elements.push_back(e);
    }

    for (const auto& pv : pending) {
        auto it = net.models.find(pv.model);
        if (it == net.models.end()) {
            fail(pv.line, pv.column, "undefined varactor model '" + pv.model + "'");
            continue;
        }
        NetlistElement e;
        e.name = pv.name;
        e.kind = ElementKind::Varactor;
        e.node_a = pv.node_a;
        e.node_b = pv.node_b;
        e.model_name = pv.model;
        try {
            e.varactor = capacitance_at_bias(it->second, net.v_bias);
        } catch (const Error& err) {
            fail(pv.line, pv.column, err.what());
            continue;
        }
        net.elements.push_back(e);
    }

    for (size_t i = 0; i < net.ports.size(); ++i) {
        const auto& p = net.ports[i];
        if (!declared_nodes.count(p.node) || !declared_nodes.count(p.ref)) {
            fail(port_lines[i].first, port_lines[i].second,
                 ".port references undefined node " + std::to_string(p.node));
        }
    }

    if (doc.diagnostics.empty()) {
        try {
            net.validate();
            doc.netlist = std::move(net);
        } catch (const Error& err) {
            fail(0, 0, err.what());
        }
    }
    return doc;
}

Netlist parse_netlist(const std::string& text) {
    NetlistDocument doc = parse_netlist_document(text);
    if (!doc.netlist) {
        const auto& d = doc.diagnostics.empty() ? Diagnostic{0, 0, "empty netlist"}
                                                : doc.diagnostics.front();
        throw ParseError("netlist:" + std::to_string(d.line) + ":" +
                             std::to_string(d.column) + ": " + d.message,
                         d.line, d.column);
    }
    return *doc.netlist;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

std::string serialize_netlist(const Netlist& net) {
    std::ostringstream out;
    for (const auto& e : net.elements) {
        switch (e.kind) {
            case ElementKind::Resistor:
                out << e.name << ' ' << e.node_a << ' ' << e.node_b << ' ' << fmt(e.value);
                break;
            case ElementKind::Inductor:
            case ElementKind::Capacitor:
                out << e.name << ' ' << e.node_a << ' ' << e.node_b << ' ' << fmt(e.value);
                if (std::isfinite(e.q)) out << " Q=" << fmt(e.q);
                break;
            case ElementKind::Varactor:
                out << e.name << ' ' << e.node_a << ' ' << e.node_b
                    << " model=" << e.model_name;
                break;
            case ElementKind::CwSource:
            case ElementKind::PagSource:
                out << e.name << ' ' << e.node_a << ' ' << e.node_b
                    << " f=" << fmt(e.source.f_hz) << " p=" << fmt(e.source.p_avail_w)
                    << " zs=" << fmt(e.source.z_s);
                break;
        }
        out << '\n';
    }
    for (const auto& [name, m] : net.models) {
        out << ".model " << name << " cj0=" << fmt(m.c_j0) << " vj=" << fmt(m.v_j)
            << " gamma=" << fmt(m.gamma) << " cpkg=" << fmt(m.c_pkg)
            << " qv=" << fmt(m.q_v) << " vbi=" << fmt(m.v_bi) << " is=" << fmt(m.i_s)
            << " n=" << fmt(m.n_ideality) << " bv=" << fmt(m.v_breakdown) << '\n';
    }
    out << ".vbias " << fmt(net.v_bias) << '\n';
    for (const auto& p : net.ports) {
        out << ".port " << p.node << ' ' << p.ref << ' ' << fmt(p.z0) << '\n';
    }
    return out.str();
}

bool structurally_equal(const Netlist& a, const Netlist& b) {
    auto close = [](double x, double y) {
        if (x == y) return true;
        if (std::isinf(x) && std::isinf(y)) return true;
        return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
    };
    if (a.elements.size() != b.elements.size() || a.ports.size() != b.ports.size()) {
        return false;
    }
    if (!close(a.v_bias, b.v_bias)) return false;
    for (size_t i = 0; i < a.elements.size(); ++i) {
        const auto& x = a.elements[i];
        const auto& y = b.elements[i];
        if (x.name != y.name || x.kind != y.kind || x.node_a != y.node_a ||
            x.node_b != y.node_b || !close(x.value, y.value) || !close(x.q, y.q) ||
            !close(x.source.f_hz, y.source.f_hz) ||
            !close(x.source.p_avail_w, y.source.p_avail_w) ||
            !close(x.source.z_s, y.source.z_s) || x.model_name != y.model_name ||
            !close(x.varactor.c_v, y.varactor.c_v)) {
            return false;
        }
    }
    for (size_t i = 0; i < a.ports.size(); ++i) {
        if (a.ports[i].node != b.ports[i].node || a.ports[i].ref != b.ports[i].ref ||
            !close(a.ports[i].z0, b.ports[i].z0)) {
            return false;
        }
    }
    return true;
}

}  // namespace pfsl
