#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "pfsl/ac_analysis.hpp"
#include "pfsl/analytic.hpp"
#include "pfsl/csv.hpp"
#include "pfsl/hb.hpp"
#include "pfsl/netlist_io.hpp"
#include "pfsl/transient.hpp"
#include "pfsl/units.hpp"

namespace pfsl {

namespace {

struct Config {
    HbOptions hb;
    VaractorModel model;
    double transient_steps_per_period = 200.0;
    double transient_periods = 500.0;
};

Config load_config(const std::string& path) {
    Config cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("hb")) {
        const auto& h = j["hb"];
        cfg.hb.k_harmonics = h.value("k_harmonics", cfg.hb.k_harmonics);
        cfg.hb.max_iterations = h.value("max_iterations", cfg.hb.max_iterations);
        cfg.hb.tol_rel = h.value("tol_rel", cfg.hb.tol_rel);
        if (h.contains("pag_power_dbm")) {
            cfg.hb.pag_power_w = watts_from_dbm(h["pag_power_dbm"].get<double>());
        }
        if (h.contains("p_sub_floor_dbm")) {
            cfg.hb.p_sub_floor_w = watts_from_dbm(h["p_sub_floor_dbm"].get<double>());
        }
    }
    if (j.contains("transient")) {
        const auto& t = j["transient"];
        cfg.transient_steps_per_period =
            t.value("steps_per_period", cfg.transient_steps_per_period);
        cfg.transient_periods = t.value("periods", cfg.transient_periods);
    }
    if (j.contains("varactor")) {
        const auto& v = j["varactor"];
        cfg.model.c_j0 = v.value("cj0", cfg.model.c_j0);
        cfg.model.v_j = v.value("vj", cfg.model.v_j);
        cfg.model.gamma = v.value("gamma", cfg.model.gamma);
        cfg.model.c_pkg = v.value("cpkg", cfg.model.c_pkg);
        cfg.model.q_v = v.value("qv", cfg.model.q_v);
        cfg.model.v_bi = v.value("vbi", cfg.model.v_bi);
        cfg.model.i_s = v.value("is", cfg.model.i_s);
        cfg.model.n_ideality = v.value("n", cfg.model.n_ideality);
        cfg.model.v_breakdown = v.value("bv", cfg.model.v_breakdown);
    }
    return cfg;
}

Netlist load_netlist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read netlist " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_netlist(buf.str());
}

AxisSpec parse_axis(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 4) {
        throw DomainError("axis spec must be name:lo:hi:steps, got '" + spec + "'");
    }
    AxisSpec a;
    const std::string name = parts[0];
    if (name == "cv") a.axis = GridAxis::Cv;
    else if (name == "ztx") a.axis = GridAxis::Ztx;
    else if (name == "vdc") a.axis = GridAxis::Vdc;
    else if (name == "fin") a.axis = GridAxis::Fin;
    else throw DomainError("unknown axis '" + name + "'");
    auto lo = parse_value(parts[1]);
    auto hi = parse_value(parts[2]);
    auto steps = parse_value(parts[3]);
    if (!lo || !hi || !steps) throw DomainError("malformed axis values in '" + spec + "'");
    a.lo = *lo;
    a.hi = *hi;
    a.steps = static_cast<int>(*steps);
    return a;
}

void print_sweep_summary(std::ostream& out, const SweepTrace& trace,
                         const BiasedVaractor& dv) {
    const IsReport rep = is_report(trace, dv);
    out << "p_th       " << dbm_from_watts(rep.p_th_w) << " dBm\n";
    out << "p_max      " << dbm_from_watts(rep.p_max_w) << " dBm\n";
    out << "il_ss      " << rep.il_ss_db << " dB\n";
    out << "is_max (p < p_max)  " << rep.is_max_below_pmax_db << " dB\n";
    const double p_top = rep.table.back().first;
    out << "is at " << dbm_from_watts(p_top) << " dBm  " << rep.is_at(p_top) << " dB\n";
}

const BiasedVaractor& netlist_varactor(const Netlist& net) {
    const auto* x = net.first_of(ElementKind::Varactor);
    if (!x) throw DomainError("netlist has no varactor element");
    return x->varactor;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"design and simulation toolkit for reflective parametric "
                 "frequency-selective limiters"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON solver/model configuration");

    // design
    auto* design = app.add_subcommand("design", "synthesize a limiter network");
    double f_opt = 2.1e9, ztx = 31.0, la_seed = 11e-9, vdc = 1.1, z0 = 50.0, ql = 2000.0;
    std::string emit_path;
    design->add_option("--f-opt", f_opt, "design frequency, Hz");
    design->add_option("--ztx", ztx, "transformer characteristic impedance, ohms");
    design->add_option("--la-seed", la_seed, "seed inductance for the f/2 tank, H");
    design->add_option("--vdc", vdc, "varactor bias, V");
    design->add_option("--z0", z0, "port impedance, ohms");
    design->add_option("--ql", ql, "passive component Q");
    design->add_option("--emit-netlist", emit_path, "write the synthesized netlist");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "small-signal S-parameters");
    std::string net_path, out_path, touchstone_path;
    double f_start = 1.6e9, f_stop = 2.6e9;
    int n_points = 201;
    analyze->add_option("--netlist", net_path, "netlist file")->required();
    analyze->add_option("--f-start", f_start, "Hz");
    analyze->add_option("--f-stop", f_stop, "Hz");
    analyze->add_option("--n", n_points, "points");
    analyze->add_option("--out", out_path, "CSV output path");
    analyze->add_option("--touchstone", touchstone_path, "Touchstone .s2p output path");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "harmonic-balance power sweep");
    std::string sweep_net, sweep_out;
    double sw_f_in = 2.1e9, p_start_dbm = -10.0, p_stop_dbm = 28.0, step_db = 0.5;
    sweep->add_option("--netlist", sweep_net, "netlist file")->required();
    sweep->add_option("--f-in", sw_f_in, "drive frequency, Hz");
    sweep->add_option("--p-start-dbm", p_start_dbm, "sweep start");
    sweep->add_option("--p-stop-dbm", p_stop_dbm, "sweep stop");
    sweep->add_option("--step-db", step_db, "sweep step");
    sweep->add_option("--out", sweep_out, "CSV output path");

    // contour
    auto* contour = app.add_subcommand("contour", "analytic design-metric grid");
    std::string metric_name = "pth", x_spec, y_spec, grid_out;
    double c_cv = 2e-12, c_delta = 0.4, c_qv = 15.0, c_vbi = 0.7, c_vdc = 1.1,
           c_ztx = 31.0, c_f = 2.1e9, c_z0 = 50.0;
    contour->add_option("--metric", metric_name, "pth | il | pmax");
    contour->add_option("--x", x_spec, "axis spec name:lo:hi:steps")->required();
    contour->add_option("--y", y_spec, "axis spec name:lo:hi:steps")->required();
    contour->add_option("--cv", c_cv, "fixed varactor capacitance, F");
    contour->add_option("--delta", c_delta, "fixed tuning coefficient");
    contour->add_option("--qv", c_qv, "varactor Q");
    contour->add_option("--vbi", c_vbi, "built-in voltage, V");
    contour->add_option("--vdc", c_vdc, "fixed bias, V");
    contour->add_option("--ztx", c_ztx, "fixed transformer impedance, ohms");
    contour->add_option("--f", c_f, "fixed design frequency, Hz");
    contour->add_option("--z0", c_z0, "port impedance, ohms");
    contour->add_option("--out", grid_out, "CSV output path")->required();

    // cascade
    auto* casc = app.add_subcommand("cascade", "multi-stage power sweep");
    std::string casc_net, casc_out;
    int m_stages = 2;
    double cf_in = 2.1e9, cp_start = -10.0, cp_stop = 28.0, cstep = 0.5;
    casc->add_option("--netlist", casc_net, "netlist file")->required();
    casc->add_option("--m", m_stages, "number of stages");
    casc->add_option("--f-in", cf_in, "drive frequency, Hz");
    casc->add_option("--p-start-dbm", cp_start, "sweep start");
    casc->add_option("--p-stop-dbm", cp_stop, "sweep stop");
    casc->add_option("--step-db", cstep, "sweep step");
    casc->add_option("--out", casc_out, "CSV output path");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "transient vs harmonic-balance check");
    std::string or_net;
    double or_f_in = 2.1e9, or_p_dbm = -30.0;
    int or_harmonics = 3;
    oracle->add_option("--netlist", or_net, "netlist file")->required();
    oracle->add_option("--f-in", or_f_in, "drive frequency, Hz");
    oracle->add_option("--p-in-dbm", or_p_dbm, "drive power");
    oracle->add_option("--harmonics", or_harmonics, "harmonics of f_in to compare");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << e.what() << "\n";
        return 1;
    }

    try {
        const Config cfg = load_config(config_path);

        if (*design) {
            DesignPoint dp{z0, f_opt, ql};
            const BiasedVaractor dv = capacitance_at_bias(cfg.model, vdc);
            const SynthesizedNetwork syn = synthesize_network(dv, dp, ztx, la_seed);
            const PerformanceMetrics pm = performance_of(dv, dp, ztx);
            out << "varactor   c_v = " << dv.c_v * 1e12 << " pF, delta = " << dv.delta
                << " at " << vdc << " V\n";
            out << "l_a = " << syn.l_a * 1e9 << " nH, c_a = " << syn.c_a * 1e12 << " pF\n";
            out << "l_b = " << syn.l_b * 1e9 << " nH, c_b = " << syn.c_b * 1e12 << " pF\n";
            out << "l_c = " << syn.l_c * 1e9 << " nH, c_blk = " << syn.c_blk * 1e12
                << " pF\n";
            out << "l_t = " << syn.transformer.l_t * 1e9
                << " nH, c_tx = c_in = " << syn.c_tx * 1e12 << " pF (z_tx = " << ztx
                << " ohm)\n";
            out << "p_th  " << dbm_from_watts(pm.p_th_w) << " dBm\n";
            out << "il_ss " << db_from_power_ratio(pm.il_ss_ratio) << " dB\n";
            out << "p_max " << dbm_from_watts(pm.p_max_w) << " dBm\n";
            if (!emit_path.empty()) {
                const PfslCircuit c = to_netlist(syn, dv, dp);
                std::ofstream f(emit_path);
                if (!f) throw IoError("cannot write " + emit_path);
                f << serialize_netlist(c.netlist);
                out << "netlist written to " << emit_path << "\n";
            }
        } else if (*analyze) {
            const Netlist net = load_netlist(net_path);
            const FrequencySweep sw = sweep_sparams(net, f_start, f_stop, n_points);
            out << "passband peak at " << sw.f_peak / 1e9 << " GHz, il = "
                << sw.il_min_db << " dB, fractional bw = " << sw.bw_frac * 100.0
                << " %\n";
            if (!out_path.empty()) {
                write_sparams_csv(sw.points, out_path);
                out << "csv written to " << out_path << "\n";
            }
            if (!touchstone_path.empty()) {
                const double z0ref = net.effective_ports().empty()
                                         ? 50.0
                                         : net.effective_ports()[0].z0;
                write_touchstone(sw.points, touchstone_path, z0ref);
                out << "touchstone written to " << touchstone_path << "\n";
            }
        } else if (*sweep) {
            const Netlist net = load_netlist(sweep_net);
            const SweepTrace trace =
                power_sweep(net, sw_f_in, watts_from_dbm(p_start_dbm),
                            watts_from_dbm(p_stop_dbm), step_db, cfg.hb);
            print_sweep_summary(out, trace, netlist_varactor(net));
            if (!sweep_out.empty()) {
                write_sweep_csv(trace, sweep_out);
                out << "csv written to " << sweep_out << "\n";
            }
        } else if (*contour) {
            GridMetric metric;
            if (metric_name == "pth") metric = GridMetric::Pth;
            else if (metric_name == "il") metric = GridMetric::IlSs;
            else if (metric_name == "pmax") metric = GridMetric::Pmax;
            else throw DomainError("unknown metric '" + metric_name + "'");
            VaractorModel model = cfg.model;
            model.q_v = c_qv;
            model.v_bi = c_vbi;
            BiasedVaractor dv;
            dv.model = model;
            dv.v_dc = c_vdc;
            dv.c_v = c_cv;
            dv.delta = c_delta;
            DesignPoint dp{c_z0, c_f, 2000.0};
            const ContourGrid grid = contour_grid(metric, parse_axis(x_spec),
                                                  parse_axis(y_spec), dv, dp, c_ztx);
            write_grid_csv(grid, grid_out);
            out << grid.xs.size() * grid.ys.size() << " cells written to " << grid_out;
            if (grid.nan_count > 0) out << " (" << grid.nan_count << " undefined)";
            out << "\n";
        } else if (*casc) {
            const Netlist net = load_netlist(casc_net);
            const Netlist chain = cascade_stages(net, m_stages);
            const SweepTrace trace =
                power_sweep(chain, cf_in, watts_from_dbm(cp_start),
                            watts_from_dbm(cp_stop), cstep, cfg.hb);
            out << "m = " << m_stages << " stages\n";
            print_sweep_summary(out, trace, netlist_varactor(chain));
            if (!casc_out.empty()) {
                write_sweep_csv(trace, casc_out);
                out << "csv written to " << casc_out << "\n";
            }
        } else if (*oracle) {
            const Netlist net = load_netlist(or_net);
            const double p_in = watts_from_dbm(or_p_dbm);
            const HBSolution hb = hb_solve(net, or_f_in, p_in, cfg.hb);
            const double dt = 1.0 / (cfg.transient_steps_per_period * or_f_in);
            const double duration = cfg.transient_periods / or_f_in;
            const Waveform w = transient_solve(net, duration, dt);
            const auto* x = net.first_of(ElementKind::Varactor);
            if (!x) throw DomainError("oracle needs a varactor in the netlist");
            const HarmonicSpectrum tr =
                steady_state_spectrum(w, x->node_a, or_f_in, 32);
            out << "harmonic  |hb| V       |transient| V   rel diff\n";
            for (int k = 1; k <= or_harmonics; ++k) {
                const auto& sp = hb.spectra.at(x->node_a);
                const double vh = std::abs(sp.phasors.at(2 * k));
                const double vt = std::abs(tr.phasors.at(k));
                const double rel = std::abs(vh - vt) / std::max(vt, 1e-30);
                out << "  " << k << "         " << vh << "   " << vt << "   " << rel
                    << "\n";
            }
        }
        return 0;
    } catch (const ParseError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        err << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const SingularError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const SynthesisError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const NoBifurcationError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run(argc, argv, out, err);
}

}  // namespace pfsl
