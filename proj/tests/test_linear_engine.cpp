#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "pfsl/ac_analysis.hpp"
#include "pfsl/analytic.hpp"
#include "pfsl/hb.hpp"
#include "pfsl/units.hpp"

using namespace pfsl;

namespace {

NetlistElement res(const std::string& name, int a, int b, double ohms) {
    return {name, ElementKind::Resistor, a, b, ohms};
}
NetlistElement ind(const std::string& name, int a, int b, double henries,
                   double q = std::numeric_limits<double>::infinity()) {
    NetlistElement e{name, ElementKind::Inductor, a, b, henries};
    e.q = q;
    return e;
}
NetlistElement cap(const std::string& name, int a, int b, double farads,
                   double q = std::numeric_limits<double>::infinity()) {
    NetlistElement e{name, ElementKind::Capacitor, a, b, farads};
    e.q = q;
    return e;
}
NetlistElement cw(const std::string& name, int a, double f, double p, double zs = 50.0) {
    NetlistElement e{name, ElementKind::CwSource, a, 0};
    e.source = {f, p, zs};
    return e;
}

PfslCircuit canonical_limiter() {
    const auto dv = capacitance_at_bias(VaractorModel{}, 1.1);
    const DesignPoint dp{50.0, 2.1e9, 2000.0};
    const SynthesizedNetwork syn = synthesize_network(dv, dp, 31.0, 11e-9);
    return to_netlist(syn, dv, dp, 1e-3, 1e-12);
}

}  // namespace

TEST_CASE("series impedance between matched ports: S21 = 2Z0/(2Z0+Z)") {
    for (double r : {0.0, 25.0, 130.0}) {
        Netlist net;
        net.elements.push_back(cw("V1", 1, 1e9, 1e-3));
        if (r > 0) {
            net.elements.push_back(res("RS", 1, 2, r));
        } else {
            net.elements.push_back(res("RS", 1, 2, 1e-9));
        }
        net.elements.push_back(res("RL", 2, 0, 1e9));  // keeps node 2 DC-pathed
        net.ports = {{1, 0, 50.0}, {2, 0, 50.0}};
        const SParameters s = sparams_at(net, 1e9);
        const double expect = 100.0 / (100.0 + std::max(r, 1e-9));
        CHECK(std::abs(s.s21) == doctest::Approx(expect).epsilon(1e-6));
        CHECK(std::abs(s.s12 - s.s21) < 1e-9);
    }
}

TEST_CASE("lumped pi transformer matches at its design frequency") {
    const double f = 2.1e9;
    const double w = omega_from_hz(f);
    const double z_load = 200.0;
    const double z_tx = std::sqrt(50.0 * z_load);
    Netlist net;
    net.elements.push_back(cap("C1", 1, 0, 1.0 / (z_tx * w)));
    net.elements.push_back(ind("LT", 1, 2, z_tx / w));
    net.elements.push_back(cap("C2", 2, 0, 1.0 / (z_tx * w)));
    net.elements.push_back(res("RL", 2, 0, z_load));
    net.ports = {{1, 0, 50.0}};
    const SParameters s = sparams_at(net, f);
    CHECK(std::abs(s.s11) < 1e-6);
}

TEST_CASE("flat response of a frequency-independent divider") {
    Netlist net;
    net.elements.push_back(cw("V1", 1, 1e9, 1e-3));
    net.elements.push_back(res("R1", 1, 0, 50.0));
    net.elements.push_back(res("RB", 1, 2, 1e-6));
    net.ports = {{1, 0, 50.0}, {2, 0, 50.0}};
    const FrequencySweep sw = sweep_sparams(net, 0.5e9, 3e9, 21);
    const double first = db_from_mag(std::abs(sw.points.front().s21));
    for (const auto& p : sw.points) {
        CHECK(db_from_mag(std::abs(p.s21)) == doctest::Approx(first).epsilon(1e-9));
    }
}

TEST_CASE("port order swap transposes the scattering matrix") {
    Netlist net;
    net.elements.push_back(res("R1", 1, 2, 75.0));
    net.elements.push_back(res("R2", 2, 0, 30.0));
    net.ports = {{1, 0, 50.0}, {2, 0, 50.0}};
    const SParameters s = sparams_at(net, 1e9);
    Netlist rev = net;
    rev.ports = {{2, 0, 50.0}, {1, 0, 50.0}};
    const SParameters t = sparams_at(rev, 1e9);
    CHECK(std::abs(s.s11 - t.s22) < 1e-12);
    CHECK(std::abs(s.s22 - t.s11) < 1e-12);
    CHECK(std::abs(s.s21 - t.s12) < 1e-12);
}

TEST_CASE("ac_solve requires a source at the analysis frequency") {
    Netlist net;
    net.elements.push_back(cw("V1", 1, 1e9, 1e-3));
    net.elements.push_back(res("R1", 1, 0, 50.0));
    CHECK_THROWS_AS(ac_solve(net, 2e9), DomainError);
    CHECK_NOTHROW(ac_solve(net, 1e9));
}

TEST_CASE("driving point impedance basics") {
    SUBCASE("single inductor to ground") {
        Netlist net;
        net.elements.push_back(ind("L1", 1, 0, 5e-9));
        net.ports = {{1, 0, 50.0}};
        const cplx z = driving_point_impedance(net, 1, {}, 1e9);
        CHECK(z.real() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
        CHECK(z.imag() == doctest::Approx(omega_from_hz(1e9) * 5e-9).epsilon(1e-9));
    }
    SUBCASE("parallel tank at resonance shows its loss resistance") {
        const double f0 = 1.5e9;
        const double w = omega_from_hz(f0);
        const double l = 4e-9;
        const double c = 1.0 / (l * w * w);
        const double q = 60.0;
        Netlist net;
        net.f_ref_hz = f0;
        net.elements.push_back(ind("L1", 1, 0, l, q));
        net.elements.push_back(cap("C1", 1, 0, c));
        net.ports = {{1, 0, 50.0}};
        // lossless C, lossy L: R_par = Q * w * L at resonance
        const cplx z = driving_point_impedance(net, 1, {}, f0);
        const double r_l = w * l / q;
        const double r_par = (w * l) * (w * l) / r_l + r_l;
        CHECK(std::abs(z) == doctest::Approx(r_par).epsilon(1e-3));
    }
    SUBCASE("excluded path leaves an open circuit") {
        Netlist net;
        net.elements.push_back(ind("L1", 1, 0, 5e-9));
        net.ports = {{1, 0, 50.0}};
        const cplx z = driving_point_impedance(net, 1, {"L1"}, 1e9);
        CHECK(std::isinf(std::abs(z)));
    }
}

TEST_CASE("driving point impedance equals ladder reduction on random ladders") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> rungs(1, 6);
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_real_distribution<double> rv(1.0, 500.0);
    std::uniform_real_distribution<double> lv(0.5e-9, 30e-9);
    std::uniform_real_distribution<double> cv(0.2e-12, 20e-12);
    const double f = 1.7e9;
    const double w = omega_from_hz(f);

    for (int trial = 0; trial < 50; ++trial) {
        const int n = rungs(rng);
        Netlist net;
        net.ports = {{1, 0, 50.0}};
        cplx z_oracle{0.0, 0.0};
        int count = 0;
        // Build a series/shunt ladder from the far end toward node 1:
        // z = series + (shunt || z)
        std::vector<std::tuple<int, double>> series_elems, shunt_elems;
        // Walk nodes n..1; node i connects to node i+1 via a series element and
        // to ground via a shunt element. The far node ends in a shunt resistor.
        auto make = [&](int k, double& val) -> double {
            if (k == 0) {
                val = rv(rng);
            } else if (k == 1) {
                val = lv(rng);
            } else {
                val = cv(rng);
            }
            return val;
        };
        auto imp = [&](int k, double val) -> cplx {
            if (k == 0) return {val, 0.0};
            if (k == 1) return {0.0, w * val};
            return {0.0, -1.0 / (w * val)};
        };
        auto add_elem = [&](int k, double val, int a, int b) {
            const std::string name = "E" + std::to_string(count++);
            if (k == 0) net.elements.push_back(res(name, a, b, val));
            if (k == 1) net.elements.push_back(ind(name, a, b, val));
            if (k == 2) net.elements.push_back(cap(name, a, b, val));
        };

        const double r_far = rv(rng);
        add_elem(0, r_far, n + 1, 0);
        z_oracle = {r_far, 0.0};
        for (int i = n; i >= 1; --i) {
            double val;
            const int ks = kind(rng);
            make(ks, val);
            add_elem(ks, val, i, i + 1);
            z_oracle += imp(ks, val);
            const int kp = kind(rng);
            make(kp, val);
            add_elem(kp, val, i, 0);
            const cplx zp = imp(kp, val);
            z_oracle = z_oracle * zp / (z_oracle + zp);
        }
        const cplx z = driving_point_impedance(net, 1, {}, f);
        CHECK(std::abs(z - z_oracle) <= 1e-9 * std::abs(z_oracle));
    }
}

TEST_CASE("reciprocity and passivity of lossy test networks") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> rv(5.0, 200.0);
    std::uniform_real_distribution<double> lv(1e-9, 20e-9);
    std::uniform_real_distribution<double> cv(0.5e-12, 10e-12);
    for (int trial = 0; trial < 25; ++trial) {
        Netlist net;
        net.f_ref_hz = 1.5e9;
        net.elements.push_back(res("R1", 1, 2, rv(rng)));
        net.elements.push_back(ind("L1", 1, 3, lv(rng), 50.0));
        net.elements.push_back(cap("C1", 3, 2, cv(rng), 80.0));
        net.elements.push_back(res("R2", 3, 0, rv(rng)));
        net.elements.push_back(cap("C2", 2, 0, cv(rng), 80.0));
        net.ports = {{1, 0, 50.0}, {2, 0, 50.0}};
        const SParameters s = sparams_at(net, 0.8e9 + trial * 0.1e9);
        CHECK(std::abs(s.s12 - s.s21) < 1e-9);

        Eigen::Matrix2cd sm;
        sm << s.s11, s.s12, s.s21, s.s22;
        const Eigen::Matrix2cd g =
            Eigen::Matrix2cd::Identity() - sm.adjoint() * sm;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(g);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    }
}

TEST_CASE("limiter small-signal response") {
    const PfslCircuit c = canonical_limiter();
    const DesignPoint dp{50.0, 2.1e9, 2000.0};
    const auto dv = capacitance_at_bias(VaractorModel{}, 1.1);

    SUBCASE("minimum insertion loss near the closed form") {
        const FrequencySweep sw = sweep_sparams(c.netlist, 1.9e9, 2.3e9, 161);
        const double il_closed = il_ss_closed_form(dv, dp, 31.0).db;
        CHECK(std::abs(sw.il_min_db - il_closed) < 0.3);
    }

    SUBCASE("band-pass shape with the reported fractional bandwidth") {
        const FrequencySweep sw = sweep_sparams(c.netlist, 1.6e9, 2.6e9, 401);
        CHECK(sw.bw_frac >= 0.12);
        CHECK(sw.bw_frac <= 0.22);
        CHECK(sw.f_peak > 1.9e9);
        CHECK(sw.f_peak < 2.3e9);
    }

    SUBCASE("input impedance extraction matches the resonant form within 10%") {
        const ImpedanceSet s = extract_impedance_set(c.netlist, c.map, dp);
        const LossPair lp = rs_rd(dv, dp, 31.0);
        const double zin_pred = zin_resonant(lp.exact, 31.0);
        CHECK(std::abs(s.z_in.real() - zin_pred) < 0.10 * zin_pred);
    }

    SUBCASE("extracted impedances feed the full threshold within 1 dB of Eq. 7") {
        const ImpedanceSet s = extract_impedance_set(c.netlist, c.map, dp);
        const ThresholdResult full = pth_full(s, dv, dp);
        const double approx = pth_approx(dv, dp, 31.0);
        const double gap_db = std::abs(dbm_from_watts(full.p_th_w) -
                                       dbm_from_watts(approx));
        CHECK(gap_db < 1.0);
    }

    SUBCASE("extracted set matches the closed-form branch impedances") {
        const SynthesizedNetwork syn = synthesize_network(dv, dp, 31.0, 11e-9);
        const ImpedanceSet a = extract_impedance_set(c.netlist, c.map, dp);
        const ImpedanceSet b = branch_impedances(syn, dv, dp);
        CHECK(std::abs(a.z3_in - b.z3_in) < 0.02 * std::abs(b.z3_in));
        CHECK(std::abs(a.z2_d - b.z2_d) < 0.02 * std::abs(b.z2_d));
        CHECK(std::abs(a.z1_in - b.z1_in) < 0.02 * std::abs(b.z1_in));
        CHECK(std::abs(a.z_in - b.z_in) < 0.05 * std::abs(b.z_in));
    }
}

TEST_CASE("cascade identities") {
    const PfslCircuit c = canonical_limiter();
    const FrequencySweep sw = sweep_sparams(c.netlist, 2.0e9, 2.2e9, 41);

    SUBCASE("identity thru is neutral") {
        std::vector<SParameters> thru;
        for (const auto& p : sw.points) {
            SParameters t;
            t.frequency = p.frequency;
            t.s11 = t.s22 = {0.0, 0.0};
            t.s21 = t.s12 = {1.0, 0.0};
            thru.push_back(t);
        }
        const auto out = cascade(sw.points, thru);
        for (size_t i = 0; i < out.size(); ++i) {
            CHECK(std::abs(out[i].s21 - sw.points[i].s21) < 1e-12);
            CHECK(std::abs(out[i].s11 - sw.points[i].s11) < 1e-12);
        }
    }

    SUBCASE("two matched 3 dB pads make 6 dB") {
        SParameters pad;
        pad.frequency = 1e9;
        pad.s11 = pad.s22 = {0.0, 0.0};
        pad.s21 = pad.s12 = {std::pow(10.0, -3.0 / 20.0), 0.0};
        const auto out = cascade({pad}, {pad});
        CHECK(db_from_mag(std::abs(out[0].s21)) == doctest::Approx(-6.0).epsilon(1e-9));
    }

    SUBCASE("grid mismatch is rejected") {
        auto other = sw.points;
        other.pop_back();
        CHECK_THROWS_AS(cascade(sw.points, other), DomainError);
    }

    SUBCASE("wave cascade of two stages matches the merged netlist") {
        const auto two = cascade(sw.points, sw.points);
        const Netlist merged = cascade_stages(c.netlist, 2);
        const FrequencySweep swm = sweep_sparams(merged, 2.0e9, 2.2e9, 41);
        size_t peak = 0;
        for (size_t i = 0; i < sw.points.size(); ++i) {
            if (std::abs(sw.points[i].s21) > std::abs(sw.points[peak].s21)) peak = i;
        }
        const double il1 = -db_from_mag(std::abs(sw.points[peak].s21));
        const double il2_cascade = -db_from_mag(std::abs(two[peak].s21));
        const double il2_merged = -db_from_mag(std::abs(swm.points[peak].s21));
        CHECK(std::abs(il2_cascade - 2.0 * il1) < 0.1);
        CHECK(std::abs(il2_merged - il2_cascade) < 0.1);
    }
}

TEST_CASE("floating subnetworks are reported") {
    Netlist net;
    net.elements.push_back(cw("V1", 1, 1e9, 1e-3));
    net.elements.push_back(res("R1", 1, 0, 50.0));
    net.elements.push_back(cap("CF", 2, 3, 1e-12));  // island
    const auto floating = net.validate();
    CHECK(floating.size() == 2);
}
