#include <doctest.h>

#include <cmath>
#include <random>

#include "pfsl/analytic.hpp"
#include "pfsl/units.hpp"

using namespace pfsl;

namespace {

BiasedVaractor paper_varactor(double c_v = 2e-12, double delta = 0.4, double q_v = 15.0) {
    BiasedVaractor dv;
    dv.model.q_v = q_v;
    dv.model.v_bi = 0.7;
    dv.v_dc = 1.1;
    dv.c_v = c_v;
    dv.delta = delta;
    return dv;
}

DesignPoint paper_point() { return DesignPoint{50.0, 2.1e9, 2000.0}; }

// Resonant-condition impedance set with huge parallel tanks and series pairs
// splitting R_p and R_d symmetrically around a cancelled reactance.
ImpedanceSet resonant_set(double r_p, double r_d) {
    ImpedanceSet s;
    const double huge = 1e12;
    s.z2_in = {huge, 0.0};
    s.z1_d = {huge, 0.0};
    s.z1_in = {r_p / 2.0, 40.0};
    s.z3_in = {r_p / 2.0, -40.0};
    s.z2_d = {r_d / 2.0, 25.0};
    s.z3_d = {r_d / 2.0, -25.0};
    s.z_in = {380.0, 0.0};
    return s;
}

}  // namespace

TEST_CASE("geq") {
    CHECK(geq({0, 0}, {2, 1}, {3, -4}) == cplx{2, 1} * cplx{3, -4});
    CHECK(geq({1, 0}, {2, 0}, {3, 0}) == cplx{11, 0});
    // Hand expansion: z2*z3 = -50j, z1*(z2+z3) = j10*(5-j10) = 100+50j.
    CHECK(geq({0, 10}, {0, -10}, {5, 0}) == cplx{100, 0});
}

TEST_CASE("rs_rd and rp_from_ztx") {
    const auto dv = paper_varactor();
    const auto dp = paper_point();
    const LossPair lp = rs_rd(dv, dp, 31.0);
    CHECK(lp.approx.r_s == doctest::Approx(2.5263).epsilon(1e-3));
    CHECK(lp.approx.r_s == lp.approx.r_d);
    CHECK(lp.approx.r_p == doctest::Approx(40.966).epsilon(1e-3));

    CHECK(rp_from_ztx(2.526, 31.0, 50.0) == doctest::Approx(40.97).epsilon(1e-3));
    CHECK(rp_from_ztx(3.3, 0.0, 50.0) == doctest::Approx(3.3).epsilon(1e-12));
    CHECK(rp_from_ztx(0.0, 50.0, 50.0) == doctest::Approx(100.0).epsilon(1e-12));

    // q_l = q_v makes the exact form twice the approximation.
    DesignPoint dp2 = dp;
    dp2.q_l = dv.model.q_v;
    const LossPair lp2 = rs_rd(dv, dp2, 31.0);
    CHECK(lp2.exact.r_s == doctest::Approx(2.0 * lp2.approx.r_s).epsilon(1e-12));

    // doubling c_v halves the loss
    auto dv2 = paper_varactor(4e-12);
    const LossPair lp3 = rs_rd(dv2, dp, 31.0);
    CHECK(lp3.approx.r_s == doctest::Approx(lp.approx.r_s / 2.0).epsilon(1e-12));
}

TEST_CASE("threshold anchor values") {
    const auto dv = paper_varactor();
    const auto dp = paper_point();
    const double p = pth_approx(dv, dp, 31.0);
    CHECK(p == doctest::Approx(3.25e-4).epsilon(2e-3));
    CHECK(dbm_from_watts(p) == doctest::Approx(-4.885).epsilon(1e-3));

    // independent scalar evaluation, c_v = 0.5 pF, z_tx = 50
    const double p2 = pth_approx(paper_varactor(0.5e-12), dp, 50.0);
    CHECK(p2 == doctest::Approx(1.4657e-4).epsilon(1e-3));
    CHECK(dbm_from_watts(p2) == doctest::Approx(-8.34).epsilon(1e-2));

    // delta doubling quarters the threshold exactly
    const double p4 = pth_approx(paper_varactor(2e-12, 0.8), dp, 31.0);
    CHECK(p4 == doctest::Approx(p / 4.0).epsilon(1e-12));
}

TEST_CASE("pth_resonant scalar evaluation and scaling") {
    const auto dv = paper_varactor();
    const auto dp = paper_point();
    AnalyticLosses l{2.526, 2.526, 41.0};
    const double p = pth_resonant(l, dv, dp);
    CHECK(p == doctest::Approx(3.2511e-4).epsilon(1e-3));

    AnalyticLosses l2 = l;
    l2.r_p *= 2.0;
    CHECK(pth_resonant(l2, dv, dp) == doctest::Approx(4.0 * p).epsilon(1e-12));
}

TEST_CASE("equation chain identity: closed form vs resonant composition") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dcv(0.1e-12, 5e-12);
    std::uniform_real_distribution<double> dq(5.0, 60.0);
    std::uniform_real_distribution<double> dd(0.1, 1.2);
    std::uniform_real_distribution<double> dz(5.0, 120.0);
    std::uniform_real_distribution<double> df(0.3e9, 6e9);
    for (int i = 0; i < 1000; ++i) {
        BiasedVaractor dv = paper_varactor(dcv(rng), dd(rng), dq(rng));
        DesignPoint dp{50.0, df(rng), 2000.0};
        const double ztx = dz(rng);
        const LossPair lp = rs_rd(dv, dp, ztx);
        const double via_chain = pth_resonant(lp.approx, dv, dp);
        const double direct = pth_approx(dv, dp, ztx);
        CHECK(std::abs(via_chain - direct) <= 1e-12 * direct);

        const InsertionLoss via_zin = il_ss(cplx{zin_resonant(lp.approx, ztx), 0.0}, dp.z0);
        const InsertionLoss via_rs = il_ss_from_rs(lp.approx.r_s, ztx, dp.z0);
        const InsertionLoss closed = il_ss_closed_form(dv, dp, ztx);
        CHECK(std::abs(via_zin.ratio - closed.ratio) <= 1e-12 * closed.ratio);
        CHECK(std::abs(via_rs.ratio - closed.ratio) <= 1e-12 * closed.ratio);
    }
}

TEST_CASE("pth_full reduces to pth_resonant under the resonant conditions") {
    const auto dv = paper_varactor();
    const auto dp = paper_point();
    const ImpedanceSet s = resonant_set(40.97, 2.526);
    const ThresholdResult full = pth_full(s, dv, dp);
    const double res = pth_resonant(AnalyticLosses{2.526, 2.526, 40.97}, dv, dp);
    CHECK(full.p_th_w == doctest::Approx(res).epsilon(1e-6));
    CHECK(full.v_th_v ==
          doctest::Approx(std::sqrt(8.0 * dp.z0 * full.p_th_w)).epsilon(1e-12));

    // delta doubling quarters the full expression too
    const ThresholdResult full2 = pth_full(s, paper_varactor(2e-12, 0.8), dp);
    CHECK(full2.p_th_w == doctest::Approx(full.p_th_w / 4.0).epsilon(1e-12));
}

TEST_CASE("pth_full singular denominators") {
    const auto dv = paper_varactor();
    const auto dp = paper_point();
    ImpedanceSet s = resonant_set(41.0, 2.5);
    s.z1_d = {5.0, 10.0};
    s.z2_d = {-5.0, -10.0};
    CHECK_THROWS_AS(pth_full(s, dv, dp), SingularError);
    s = resonant_set(41.0, 2.5);
    s.z2_in = {0.0, 0.0};
    CHECK_THROWS_AS(pth_full(s, dv, dp), SingularError);
}

TEST_CASE("zin_resonant") {
    CHECK(zin_resonant({2.526, 2.526, 0}, 31.0) == doctest::Approx(380.4).epsilon(1e-3));
    CHECK(std::isinf(zin_resonant({0.0, 0.0, 0.0}, 31.0)));
    CHECK(zin_resonant({31.0, 31.0, 0.0}, 31.0) == doctest::Approx(31.0).epsilon(1e-12));
}

TEST_CASE("insertion loss anchors") {
    const auto dv = paper_varactor();
    const auto dp = paper_point();
    const InsertionLoss il = il_ss_closed_form(dv, dp, 31.0);
    CHECK(il.db == doctest::Approx(0.553).epsilon(2e-3));

    CHECK(il_ss_from_rs(0.0, 31.0, 50.0).db == doctest::Approx(0.0).epsilon(1e-12));

    const InsertionLoss via8 = il_ss(cplx{380.4, 0.0}, 50.0);
    CHECK(via8.db == doctest::Approx(0.553).epsilon(1e-3));

    CHECK(il_ss(cplx{std::numeric_limits<double>::infinity(), 0.0}, 50.0).db ==
          doctest::Approx(0.0));
    CHECK_THROWS_AS(il_ss(cplx{0.0, 0.0}, 50.0), SingularError);
}

TEST_CASE("pmax anchors") {
    const auto dv = paper_varactor();
    const auto dp = paper_point();
    const double p = pmax_approx(dv, dp, 31.0);
    CHECK(p == doctest::Approx(2.46e-2).epsilon(3e-3));
    CHECK(dbm_from_watts(p) == doctest::Approx(13.91).epsilon(1e-3));

    auto dv0 = dv;
    dv0.v_dc = 0.0;
    const double p0 = pmax_approx(dv0, dp, 31.0);
    CHECK(p0 == doctest::Approx(3.7253e-3).epsilon(1e-3));
    CHECK(dbm_from_watts(p0) == doctest::Approx(5.71).epsilon(1e-2));

    // (v_dc + v_bi) doubling quadruples the limit
    auto dv2 = dv;
    dv2.v_dc = 2.0 * (dv.v_dc + dv.model.v_bi) - dv.model.v_bi;
    CHECK(pmax_approx(dv2, dp, 31.0) == doctest::Approx(4.0 * p).epsilon(1e-12));
}

TEST_CASE("monotonicity of the design equations") {
    const auto dp = paper_point();
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> dcv(0.05e-12, 5e-12);
    std::uniform_real_distribution<double> dz(5.0, 100.0);
    for (int i = 0; i < 300; ++i) {
        const double cv = dcv(rng);
        const double zt = dz(rng);
        const auto dv = paper_varactor(cv);
        const double eps_c = cv * 1e-3;
        const double eps_z = zt * 1e-3;
        CHECK(pth_approx(paper_varactor(cv + eps_c), dp, zt) > pth_approx(dv, dp, zt));
        CHECK(pth_approx(dv, dp, zt + eps_z) > pth_approx(dv, dp, zt));
        CHECK(pth_approx(paper_varactor(cv, 0.41), dp, zt) < pth_approx(dv, dp, zt));
        CHECK(il_ss_closed_form(paper_varactor(cv + eps_c), dp, zt).ratio <
              il_ss_closed_form(dv, dp, zt).ratio);
        CHECK(il_ss_closed_form(dv, dp, zt + eps_z).ratio <
              il_ss_closed_form(dv, dp, zt).ratio);
        CHECK(il_ss_closed_form(paper_varactor(cv, 0.4, 16.0), dp, zt).ratio <
              il_ss_closed_form(dv, dp, zt).ratio);
    }
}

TEST_CASE("parallel resonance closed form") {
    // 6.8 nH resonating at 2.1 GHz
    const double w = omega_from_hz(2.1e9);
    CHECK(1.0 / (6.8e-9 * w * w) == doctest::Approx(0.8447e-12).epsilon(1e-3));
}

TEST_CASE("synthesis satisfies both series resonances") {
    const auto dv = capacitance_at_bias(VaractorModel{}, 1.1);
    const auto dp = paper_point();
    const SynthesizedNetwork syn = synthesize_network(dv, dp, 31.0, 11e-9);

    CHECK(syn.l_a * syn.c_a * dp.omega_d() * dp.omega_d() ==
          doctest::Approx(1.0).epsilon(1e-9));
    // tank-b resonates at f_in_opt with the DC block folded into its leg
    const double w_in = dp.omega_in();
    const double leg_x = w_in * syn.l_b - 1.0 / (w_in * syn.c_blk);
    CHECK(1.0 / (w_in * syn.c_b) == doctest::Approx(leg_x).epsilon(1e-9));
    CHECK(syn.l_b > 0);
    CHECK(syn.l_c > 0);
    CHECK(syn.transformer.z_tx == doctest::Approx(31.0));

    const ImpedanceSet s = branch_impedances(syn, dv, dp);
    const cplx loop_in = s.z1_in + s.z3_in;
    const cplx loop_d = s.z2_d + s.z3_d;
    CHECK(std::abs(loop_in.imag()) < 1e-3 * std::abs(loop_in.real()));
    CHECK(std::abs(loop_d.imag()) < 1e-3 * std::abs(loop_d.real()));

    // parallel conditions: the tanks look large and nearly real at their bands
    CHECK(std::abs(s.z2_in) > 50.0 * std::abs(loop_in));
    CHECK(std::abs(s.z1_d) > 50.0 * std::abs(loop_d));
}

TEST_CASE("synthesis rejects an infeasible seed") {
    const auto dv = capacitance_at_bias(VaractorModel{}, 1.1);
    const auto dp = paper_point();
    CHECK_THROWS_AS(synthesize_network(dv, dp, 31.0, 60e-9), SynthesisError);
    CHECK_THROWS_AS(synthesize_network(dv, dp, -1.0, 11e-9), DomainError);
}

TEST_CASE("contour grids") {
    const auto dv = paper_varactor();
    const auto dp = paper_point();

    SUBCASE("degenerate single cell equals the direct call") {
        const ContourGrid g = contour_grid(GridMetric::Pth, {GridAxis::Cv, 2e-12, 2e-12, 1},
                                           {GridAxis::Ztx, 31.0, 31.0, 1}, dv, dp, 31.0);
        CHECK(g.values.size() == 1);
        CHECK(g.at(0, 0) == doctest::Approx(pth_approx(dv, dp, 31.0)).epsilon(1e-12));
    }

    SUBCASE("threshold grid contains the design anchor and is monotone") {
        const ContourGrid g =
            contour_grid(GridMetric::Pth, {GridAxis::Cv, 0.05e-12, 5e-12, 60},
                         {GridAxis::Ztx, 5.0, 100.0, 60}, dv, dp, 31.0);
        CHECK(g.nan_count == 0);
        // nearest cell to (2 pF, 31 ohm)
        size_t ix = 0, iy = 0;
        for (size_t i = 0; i < g.xs.size(); ++i) {
            if (std::abs(g.xs[i] - 2e-12) < std::abs(g.xs[ix] - 2e-12)) ix = i;
        }
        for (size_t i = 0; i < g.ys.size(); ++i) {
            if (std::abs(g.ys[i] - 31.0) < std::abs(g.ys[iy] - 31.0)) iy = i;
        }
        const double exact = pth_approx(paper_varactor(g.xs[ix]), dp, g.ys[iy]);
        CHECK(g.at(static_cast<int>(ix), static_cast<int>(iy)) ==
              doctest::Approx(exact).epsilon(1e-12));

        for (size_t y = 0; y < g.ys.size(); ++y) {
            for (size_t x = 1; x < g.xs.size(); ++x) {
                CHECK(g.at(static_cast<int>(x), static_cast<int>(y)) >=
                      g.at(static_cast<int>(x - 1), static_cast<int>(y)));
            }
        }
        for (size_t x = 0; x < g.xs.size(); ++x) {
            for (size_t y = 1; y < g.ys.size(); ++y) {
                CHECK(g.at(static_cast<int>(x), static_cast<int>(y)) >=
                      g.at(static_cast<int>(x), static_cast<int>(y - 1)));
            }
        }
    }

    SUBCASE("bias axis recomputes the varactor and flags out-of-range cells") {
        auto dv_model = capacitance_at_bias(VaractorModel{}, 1.1);
        const ContourGrid g =
            contour_grid(GridMetric::Pmax, {GridAxis::Ztx, 10.0, 60.0, 11},
                         {GridAxis::Vdc, 0.2, 20.0, 12}, dv_model, dp, 31.0);
        CHECK(g.nan_count > 0);          // beyond breakdown
        CHECK(g.nan_count < static_cast<int>(g.values.size()));
    }
}

TEST_CASE("canonical netlist emission") {
    const auto dv = capacitance_at_bias(VaractorModel{}, 1.1);
    const auto dp = paper_point();
    const SynthesizedNetwork syn = synthesize_network(dv, dp, 31.0, 11e-9);
    const PfslCircuit c = to_netlist(syn, dv, dp, 1e-3, 1e-12);
    CHECK(c.netlist.validate().empty());
    CHECK(c.netlist.effective_ports().size() == 2);
    CHECK(c.netlist.find("XD") != nullptr);
    CHECK(c.netlist.find("XD")->varactor.c_v == doctest::Approx(2.0e-12).epsilon(1e-3));
    const auto* pag = c.netlist.first_of(ElementKind::PagSource);
    REQUIRE(pag != nullptr);
    CHECK(pag->source.f_hz == doctest::Approx(dp.f_d()));
}
