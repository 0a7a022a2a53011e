#include <catch2/catch_amalgamated.hpp>

#include "dryerctl/control.hpp"
#include "dryerctl/loop_design.hpp"
#include "test_support.hpp"

using namespace dryerctl;
using Catch::Approx;
using testsupport::Rng;

namespace {

AlphaCoefficients make_alphas(std::initializer_list<std::pair<int, double>> values) {
    AlphaCoefficients c;
    for (const auto& [i, v] : values) c.a[i] = v;
    return c;
}

AlphaCoefficients unit_alphas() {
    AlphaCoefficients c;
    for (int i = 1; i <= 33; ++i) c.a[i] = 1.0;
    return c;
}

/// Closed-loop complementary sensitivity Gc G / (1 + Gc G) at one complex point.
Complex complementary_sensitivity(const RationalTF& gc, const RationalTF& g, Complex s) {
    const Complex l = gc.eval(s) * g.eval(s);
    return l / (1.0 + l);
}

} // namespace

TEST_CASE("moisture loop model") {
    OperatingPoint op = make_operating_point(KnownVariables{}, derive_constants(PlantParameters{}));

    const MoistureLoopModel m = g1_model(op, 750.0);
    CHECK(m.k_x == Approx(0.0012033333333).epsilon(1e-9));
    CHECK(m.gain == Approx(1.2033333333e-4).epsilon(1e-9));
    CHECK(m.tau == Approx(332.40997229916894).epsilon(1e-12));
    CHECK_FALSE(m.zero_gain_warning);

    SECTION("equal inlet and outlet moisture gives zero gain with a warning") {
        OperatingPoint flat = op;
        flat.kv.x_in = flat.kv.x_out;
        const MoistureLoopModel z = g1_model(flat, 750.0);
        CHECK(z.gain == 0.0);
        CHECK(z.zero_gain_warning);
    }

    SECTION("zero feed is an error") {
        OperatingPoint idle = op;
        idle.kv.f_solids = 0.0;
        CHECK_THROWS_AS(g1_model(idle, 750.0), numeric_error);
    }
}

TEST_CASE("direct synthesis PI") {
    OperatingPoint op = make_operating_point(KnownVariables{}, derive_constants(PlantParameters{}));
    const MoistureLoopModel m = g1_model(op, 750.0);

    SECTION("tau_c equal to tau gives Kc = 1/K1") {
        const PIGains g = pi_direct_synthesis(m, m.tau);
        CHECK(g.kc == Approx(8310.249307479226).epsilon(1e-9));
        CHECK(g.tau_i == m.tau);
    }

    SECTION("the integral time always equals the process time constant") {
        Rng rng(8);
        for (int i = 0; i < 30; ++i) {
            const double tau_c = rng.uniform(1.0, 2000.0);
            CHECK(pi_direct_synthesis(m, tau_c).tau_i == m.tau);
        }
    }

    SECTION("increasing tau_c strictly decreases Kc") {
        double last = std::numeric_limits<double>::infinity();
        for (double tau_c : {10.0, 50.0, 100.0, 500.0, 2000.0}) {
            const double kc = pi_direct_synthesis(m, tau_c).kc;
            CHECK(kc < last);
            last = kc;
        }
    }

    SECTION("invalid designs are rejected") {
        CHECK_THROWS_AS(pi_direct_synthesis(m, 0.0), config_error);
        MoistureLoopModel zero = m;
        zero.gain = 0.0;
        CHECK_THROWS_AS(pi_direct_synthesis(zero, 100.0), config_error);
    }

    SECTION("the direct-synthesis compensator is exactly the canonical PI") {
        for (double tau_c : {m.tau / 3.0, m.tau, 4.0 * m.tau}) {
            const RationalTF ds = g1_ds_compensator(m, tau_c);
            const RationalTF pi = pi_tf(pi_direct_synthesis(m, tau_c));
            CHECK(same_rational(ds, pi, 1e-14));
        }
    }
}

TEST_CASE("furnace plant from unit coefficients") {
    const RationalTF g2 = g2_model(unit_alphas());
    // (1 - s)(1 + s) / (-s^3 + 2 s^2 + 2 s)
    CHECK(same_rational(g2, RationalTF({1.0, 0.0, -1.0}, {0.0, 2.0, 2.0, -1.0}), 1e-14));
    CHECK(poly::eval(g2.den, 0.0) == 0.0); // pole at the origin
    CHECK(std::abs(poly::eval(g2.num, 1.0)) < 1e-14); // zero at +a12
}

TEST_CASE("furnace factorization") {
    SECTION("unit coefficients") {
        const IMCDesign d = g2_factorize(unit_alphas());
        REQUIRE(d.rhp_zero.has_value());
        CHECK(*d.rhp_zero == 1.0);
        CHECK(same_rational(d.noninvertible, RationalTF({1.0, -1.0}, {0.0, 1.0}), 1e-14));
        CHECK(same_rational(d.invertible, RationalTF({1.0, 1.0}, {2.0, 2.0, -1.0}), 1e-14));
        CHECK(same_rational(d.noninvertible * d.invertible, d.plant, 1e-9));
        // -s^2 + 2s + 2 has the root 1 + sqrt(3) in the right half plane
        REQUIRE_FALSE(d.warnings.empty());
        CHECK(d.warnings.front().find("nonminimum-phase") != std::string::npos);
    }

    SECTION("nonpositive a12 folds the zero into the invertible side") {
        AlphaCoefficients c = unit_alphas();
        c.a[12] = -0.5;
        const IMCDesign d = g2_factorize(c);
        CHECK_FALSE(d.rhp_zero.has_value());
        CHECK(same_rational(d.noninvertible, RationalTF({1.0}, {0.0, 1.0}), 1e-14));
        CHECK(same_rational(d.noninvertible * d.invertible, d.plant, 1e-9));
    }

    SECTION("product identity holds over random admissible coefficients") {
        Rng rng(21);
        for (int i = 0; i < 50; ++i) {
            AlphaCoefficients c;
            c.a[2] = rng.uniform(-3.0, 3.0);
            c.a[4] = rng.uniform(-3.0, 3.0);
            c.a[5] = rng.uniform(0.1, 3.0);
            c.a[7] = rng.uniform(0.1, 3.0);
            c.a[11] = rng.uniform(0.1, 3.0);
            c.a[12] = rng.uniform(-2.0, 2.0);
            const IMCDesign d = g2_factorize(c);
            CHECK(same_rational(d.noninvertible * d.invertible, d.plant, 1e-9));
        }
    }
}

TEST_CASE("lambda2 guideline") {
    SECTION("worked example with the floor binding") {
        const AlphaCoefficients c =
            make_alphas({{7, 1.0}, {11, 1.0}, {5, 2.0}, {12, 0.5}});
        const Lambda2Tuning t = lambda2_tuning(c);
        CHECK(t.omega_n == Approx(std::sqrt(2.0)).epsilon(1e-12));
        CHECK(t.t_dom == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12)); // (a12-a5)+ = 0 branch
        REQUIRE(t.rhp_floor.has_value());
        CHECK(*t.rhp_floor == Approx(1.0).epsilon(1e-12));
        CHECK(t.lambda2 == Approx(1.0).epsilon(1e-12));
    }

    SECTION("large a12 retires the floor") {
        const AlphaCoefficients c =
            make_alphas({{7, 1.0}, {11, 1.0}, {5, 0.2}, {12, 50.0}});
        const Lambda2Tuning t = lambda2_tuning(c);
        const double wn = std::sqrt(1.0 + 0.2 * 50.0);
        const double t_dom = std::max(1.0 / wn, 1.0 / (50.0 - 0.2));
        CHECK(t.lambda2 == Approx(std::max(1.0 / wn, 0.3 * t_dom)).epsilon(1e-12));
        CHECK(*t.rhp_floor < t.lambda2);
    }

    SECTION("nonpositive natural frequency is a tuning error") {
        const AlphaCoefficients c =
            make_alphas({{7, 0.1}, {11, 0.1}, {5, 1.0}, {12, -1.0}});
        CHECK_THROWS_AS(lambda2_tuning(c), numeric_error);
    }
}

TEST_CASE("furnace IMC compensator") {
    const AlphaCoefficients c =
        make_alphas({{2, 0.8}, {4, 1.5}, {5, 2.0}, {7, 1.0}, {11, 1.0}, {12, 0.5}});
    const double lambda2 = 1.0;
    const IMCDesign d = imc_compensator_g2(c, lambda2, 0.05);

    SECTION("nominal complementary sensitivity equals retained part times filter") {
        const RationalTF f2({1.0}, poly::mul({1.0, lambda2}, {1.0, lambda2}));
        const RationalTF target = d.noninvertible * f2;
        Rng rng(77);
        for (int i = 0; i < 20; ++i) {
            const Complex s(rng.uniform(-2.0, 2.0), rng.uniform(-3.0, 3.0));
            const Complex lhs = complementary_sensitivity(d.compensator, d.plant, s);
            const Complex rhs = target.eval(s);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
        }
    }

    SECTION("no pole lands on the retained dynamics") {
        for (const Complex& p : d.compensator.poles()) {
            CHECK(std::abs(p) > 1e-6);                      // origin integrator preserved
            CHECK(std::abs(p - Complex(0.5, 0.0)) > 1e-6);  // right-half-plane zero preserved
        }
    }

    SECTION("proper after rationalization") {
        CHECK(d.compensator.proper());
        CHECK(d.compensator.strictly_proper());
    }

    SECTION("drive form divides by the actuator gain") {
        const Complex s(0.2, 0.9);
        CHECK(std::abs(d.drive_compensator.eval(s) - d.compensator.eval(s) / 0.05) < 1e-9 *
              std::abs(d.compensator.eval(s) / 0.05));
    }

    SECTION("increasing lambda strictly decreases high-frequency gain") {
        const Complex s(0.0, 1e3);
        double last = std::numeric_limits<double>::infinity();
        for (double l : {0.5, 1.0, 2.0, 4.0}) {
            const double mag = std::abs(imc_compensator_g2(c, l).compensator.eval(s));
            CHECK(mag < last);
            last = mag;
        }
    }
}

TEST_CASE("pressure plant") {
    SECTION("zero ratio and branch flags") {
        AlphaCoefficients c = unit_alphas();
        c.a[26] = 1.0;
        c.a[27] = 2.0;
        const G3Model m = g3_model(c);
        REQUIRE(m.rhp_zero.has_value());
        CHECK(*m.rhp_zero == Approx(2.0));

        c.a[26] = 0.0;
        CHECK_FALSE(g3_model(c).rhp_zero.has_value());

        c.a[26] = 1.0;
        c.a[27] = -2.0;
        CHECK_FALSE(g3_model(c).rhp_zero.has_value());
    }

    SECTION("denominator is exactly s^2 (a29 + s)") {
        AlphaCoefficients c = unit_alphas();
        c.a[29] = 0.4;
        const G3Model m = g3_model(c);
        CHECK(m.plant.den == Poly{0.0, 0.0, 0.4, 1.0});
    }

    SECTION("combined numerator matches the split form at sample points") {
        const AlphaCoefficients c =
            make_alphas({{26, 0.7}, {27, -0.3}, {29, 0.4}, {31, -2.0}, {32, 1.5}});
        const G3Model m = g3_model(c);
        Rng rng(55);
        for (int i = 0; i < 10; ++i) {
            const Complex s(rng.uniform(0.1, 2.0), rng.uniform(-2.0, 2.0));
            const Complex split = c.a[31] / s +
                                  c.a[32] * (c.a[27] - c.a[26] * s) /
                                      (s * s * (c.a[29] + s));
            CHECK(std::abs(m.plant.eval(s) - split) < 1e-9 * std::max(1.0, std::abs(split)));
        }
    }
}

TEST_CASE("pressure IMC compensator") {
    SECTION("right-half-plane zero branch") {
        const AlphaCoefficients c =
            make_alphas({{26, 1.0}, {27, 2.0}, {29, 0.5}, {31, -3.0}, {32, 2.0}});
        const IMCDesign d = imc_compensator_g3(c, 0.8, 2);
        REQUIRE(d.rhp_zero.has_value());
        CHECK(same_rational(d.noninvertible * d.invertible, d.plant, 1e-9));

        const RationalTF f3({1.0}, poly::mul({1.0, 0.8}, {1.0, 0.8}));
        const RationalTF target = d.noninvertible * f3;
        Rng rng(91);
        for (int i = 0; i < 20; ++i) {
            const Complex s(rng.uniform(-2.0, 2.0), rng.uniform(-3.0, 3.0));
            const Complex lhs = complementary_sensitivity(d.compensator, d.plant, s);
            const Complex rhs = target.eval(s);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
        }

        for (const Complex& p : d.compensator.poles()) {
            CHECK(std::abs(p) > 1e-6);                       // double integrator preserved
            CHECK(std::abs(p - Complex(2.0, 0.0)) > 1e-6);   // zero at z3 preserved
        }
        CHECK(d.compensator.proper());
    }

    SECTION("nonpositive zero keeps a pure double integrator in the retained part") {
        const AlphaCoefficients c =
            make_alphas({{26, 1.0}, {27, -2.0}, {29, 0.5}, {31, -3.0}, {32, 2.0}});
        const IMCDesign d = imc_compensator_g3(c, 0.8, 2);
        CHECK(same_rational(d.noninvertible, RationalTF({1.0}, {0.0, 0.0, 1.0}), 1e-14));
        CHECK(same_rational(d.noninvertible * d.invertible, d.plant, 1e-9));
        CHECK(d.compensator.proper());
    }

    SECTION("degenerate plant and invalid parameters are rejected") {
        AlphaCoefficients zero;
        CHECK_THROWS_AS(imc_compensator_g3(zero, 1.0, 2), numeric_error);
        CHECK_THROWS_AS(imc_compensator_g3(unit_alphas(), -1.0, 2), config_error);
        CHECK_THROWS_AS(imc_compensator_g3(unit_alphas(), 1.0, 1), config_error);
    }
}

TEST_CASE("actuator maps") {
    CHECK(air_actuator(5.0, 0.05).flow == Approx(0.25));
    CHECK_FALSE(air_actuator(5.0, 0.05).saturated);
    CHECK(air_actuator(-1.0, 0.05).flow == 0.0);
    CHECK(air_actuator(-1.0, 0.05).saturated);
    CHECK_THROWS_AS(air_actuator(1.0, 0.0), config_error);

    CHECK(fan_gain(0.03, -100e3) == Approx(9.486832980505138).epsilon(1e-12));
    CHECK(stack_actuator(0.0, 0.03, -100e3).flow == 0.0);
    CHECK(stack_actuator(1.0, 0.03, 100e3).flow == Approx(9.486832980505138).epsilon(1e-12));
    CHECK(stack_actuator(-0.5, 0.03, -100e3).saturated);
}

TEST_CASE("jacobian-based loop designs at the stock operating point") {
    const PlantParameters params;
    const DerivedConstants consts = derive_constants(params);
    const OperatingPoint op = make_operating_point(KnownVariables{}, consts);
    const StateSpaceModel jac = numeric_jacobian(op, op_inputs(op), consts, params);

    SECTION("temperature design has integral action and no unstable poles") {
        const RationalTF gc = design_temperature_compensator(jac, 20.0);
        CHECK(std::abs(poly::eval(gc.den, 0.0)) < 1e-12); // integrator
        for (const Complex& p : gc.poles()) CHECK(p.real() < 1e-9);
        CHECK(gc.proper());
    }

    SECTION("pressure design keeps integral action against the integrating plant") {
        const RationalTF gc = design_pressure_compensator(jac, 12.0);
        CHECK(std::abs(poly::eval(gc.den, 0.0)) < 1e-12);
        for (const Complex& p : gc.poles()) CHECK(p.real() < 1e-9);
        CHECK(gc.proper());
    }

    SECTION("extracted pressure plant is an integrator with a lag") {
        const RationalTF plant = extract_siso_plant(jac, {8, 9}, 12, 9);
        const Poly den = poly::trim(plant.den);
        CHECK(std::abs(den[0]) < 1e-9 * std::abs(den.back()));
    }

    SECTION("bundle carries the operating-point biases") {
        const DesignedLoops loops =
            design_loops(op, jac, alpha_coefficients(op, consts), params);
        CHECK(loops.runtime.f_solids_bias == op.kv.f_solids);
        CHECK(loops.runtime.c2_bias == Approx(op.kv.mdot_air / params.k_air_actuator));
        CHECK(loops.lambda3 == Approx(12.0)); // 3 / a29 with a29 = 0.25
        CHECK(loops.tau_c == Approx(loops.moisture_model.tau / 3.0));
    }
}
