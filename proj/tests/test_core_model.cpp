#include <doctest.h>

#include <cmath>
#include <random>

#include "pfsl/units.hpp"
#include "pfsl/varactor.hpp"

using namespace pfsl;

namespace {

VaractorModel simple_model(double c_j0, double v_j, double gamma, double c_pkg) {
    VaractorModel m;
    m.c_j0 = c_j0;
    m.v_j = v_j;
    m.gamma = gamma;
    m.c_pkg = c_pkg;
    return m;
}

}  // namespace

TEST_CASE("watts/dbm round trip") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(-90.0, 40.0);
    for (int i = 0; i < 1000; ++i) {
        const double dbm = d(rng);
        const double back = dbm_from_watts(watts_from_dbm(dbm));
        CHECK(std::abs(back - dbm) <= 1e-12 * std::max(1.0, std::abs(dbm)));
    }
    CHECK(dbm_from_watts(1e-3) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(watts_from_dbm(30.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("capacitance at bias reproduces the design-point capacitance") {
    // Junction capacitance of 1.6 pF at 1.1 V plus the 0.4 pF package.
    const VaractorModel m;  // defaults
    const BiasedVaractor dv = capacitance_at_bias(m, 1.1);
    CHECK(dv.c_v == doctest::Approx(2.0e-12).epsilon(1e-4));
    CHECK(dv.delta == doctest::Approx(1.1 / 1.9 * 1.6 / 2.0).epsilon(1e-3));
}

TEST_CASE("zero bias gives c_pkg + c_j0") {
    const auto m = simple_model(3.3e-12, 0.7, 0.9, 0.25e-12);
    const BiasedVaractor dv = capacitance_at_bias(m, 0.0);
    CHECK(dv.c_v == doctest::Approx(3.55e-12).epsilon(1e-12));
}

TEST_CASE("hand-evaluated gamma=1 point") {
    // C = c_j0/(1+V/Vj): 2 pF / 2 = 1 pF; |dC/dV| = c_j0/Vj/(1+V/Vj)^2 = 0.625 pF/V.
    const auto m = simple_model(2e-12, 0.8, 1.0, 0.0);
    const BiasedVaractor dv = capacitance_at_bias(m, 0.8);
    CHECK(dv.c_v == doctest::Approx(1.0e-12).epsilon(1e-9));
    CHECK(dv.delta == doctest::Approx(0.625).epsilon(1e-9));
}

TEST_CASE("bias range errors") {
    const VaractorModel m;
    CHECK_THROWS_AS(capacitance_at_bias(m, -0.1), DomainError);
    CHECK_THROWS_AS(capacitance_at_bias(m, 15.0), DomainError);
    CHECK_NOTHROW(capacitance_at_bias(m, 14.9));
}

TEST_CASE("junction capacitance decreases with bias over a random grid") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dj(0.5e-12, 8e-12);
    std::uniform_real_distribution<double> dv(0.4, 1.2);
    std::uniform_real_distribution<double> dg(0.35, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = simple_model(dj(rng), dv(rng), dg(rng), 0.3e-12);
        double prev = 1e9;
        for (double bias = 0.0; bias <= 12.0; bias += 0.4) {
            const double junction = varactor_capacitance(m, bias) - m.c_pkg;
            CHECK(junction < prev);
            prev = junction;
        }
    }
}

TEST_CASE("delta equals a centered finite difference of the C-V law") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dj(0.5e-12, 8e-12);
    std::uniform_real_distribution<double> dvj(0.4, 1.2);
    std::uniform_real_distribution<double> dg(0.35, 2.0);
    std::uniform_real_distribution<double> db(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = simple_model(dj(rng), dvj(rng), dg(rng), 0.4e-12);
        const double bias = db(rng);
        const BiasedVaractor dv = capacitance_at_bias(m, bias);
        const double h = 1e-5;
        const double fd = (varactor_capacitance(m, bias + h) -
                           varactor_capacitance(m, bias - h)) /
                          (2.0 * h);
        const double delta_fd = std::abs(fd) * 1.0 / dv.c_v;
        CHECK(dv.delta == doctest::Approx(delta_fd).epsilon(1e-6));
    }
}

TEST_CASE("charge law is the integral of the capacitance law") {
    const VaractorModel m;
    // Trapezoid quadrature oracle across the forward-swing continuation too.
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> du(-1.0, 6.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double u = du(rng);
        const int n = 20000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = u * i / n;
            const double b = u * (i + 1) / n;
            acc += 0.5 * (varactor_capacitance(m, a) + varactor_capacitance(m, b)) * (b - a);
        }
        CHECK(varactor_charge(m, u) ==
              doctest::Approx(acc).epsilon(1e-6).scale(std::abs(acc) + 1e-15));
    }
}

TEST_CASE("conduction current turns on past the built-in voltage") {
    const VaractorModel m;
    CHECK(std::abs(varactor_conduction_current(m, 1.1)) < 1e-12);
    const double on = varactor_conduction_current(m, -0.75);
    CHECK(on < 0.0);          // current flows into the swinging node
    CHECK(std::abs(on) > 1e-4);
    // Conductance consistent with a finite difference of the current.
    const double h = 1e-7;
    const double g_fd = (varactor_conduction_current(m, -0.5 + h) -
                         varactor_conduction_current(m, -0.5 - h)) /
                        (2.0 * h);
    CHECK(varactor_conduction_conductance(m, -0.5) ==
          doctest::Approx(g_fd).epsilon(1e-5));
}

TEST_CASE("component series resistance") {
    CHECK(component_series_resistance(ReactiveKind::Inductor, 6.8e-9, 80.0, 2.1e9) ==
          doctest::Approx(2.0 * kPi * 2.1e9 * 6.8e-9 / 80.0).epsilon(1e-12));
    CHECK(component_series_resistance(ReactiveKind::Inductor, 6.8e-9, 80.0, 2.1e9) ==
          doctest::Approx(1.1216).epsilon(1e-3));
    CHECK(component_series_resistance(ReactiveKind::Capacitor, 1e-12,
                                      std::numeric_limits<double>::infinity(), 2.1e9) ==
          0.0);
    CHECK(component_series_resistance(ReactiveKind::Capacitor, 1.4e-12, 100.0, 2.1e9) ==
          doctest::Approx(0.54134).epsilon(1e-3));
    CHECK_THROWS_AS(component_series_resistance(ReactiveKind::Inductor, -1.0, 10, 1e9),
                    DomainError);
}
