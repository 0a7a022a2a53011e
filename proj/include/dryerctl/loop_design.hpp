#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dryerctl/control.hpp"
#include "dryerctl/errors.hpp"
#include "dryerctl/linearize.hpp"
#include "dryerctl/realize.hpp"
#include "dryerctl/sim.hpp"
#include "dryerctl/tf.hpp"

namespace dryerctl {

/// SISO plant extracted from the linear model on a subset of states.
inline RationalTF extract_siso_plant(const StateSpaceModel& m, const std::vector<int>& states,
                                     int input_col, int output_state) {
    const int n = static_cast<int>(states.size());
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd B(n);
    Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        B(i) = m.B(states[i], input_col);
        for (int j = 0; j < n; ++j) A(i, j) = m.A(states[i], states[j]);
        if (states[i] == output_state) C(i) = 1.0;
    }
    return tf_of_realization(A, B, C, 0.0);
}

namespace detail {

inline void require_hurwitz(const Poly& p, const char* what) {
    for (const Complex& r : poly::roots(p)) {
        if (r.real() >= -1e-12)
            throw numeric_error(std::string(what) +
                                ": root with nonnegative real part at Re = " +
                                std::to_string(r.real()) +
                                "; the direct inversion design does not apply");
    }
}

} // namespace detail

/// Furnace-temperature compensator from the linearized air-to-chamber channel.
/// The chamber/windbox temperature pair forms the plant (the gas-mass states
/// decouple at the operating point); the design inverts the stable,
/// minimum-phase plant behind a second-order filter, which leaves
///   Gc = D(s) / (N(s) * lambda s (lambda s + 2)),
/// an integrating controller with no plant cancellations in the right half
/// plane.
inline RationalTF design_temperature_compensator(const StateSpaceModel& jacobian,
                                                 double lambda2) {
    if (!(lambda2 > 0.0))
        throw config_error("design_temperature_compensator: lambda2 must be positive");
    // states: T_chamber (1), T_windbox (3); input: mdot_air (1); output: T_chamber
    const RationalTF plant = extract_siso_plant(jacobian, {1, 3}, 1, 1);
    detail::require_hurwitz(plant.den, "temperature plant denominator");
    detail::require_hurwitz(plant.num, "temperature plant numerator");

    const Poly one_minus_f = {0.0, 2.0 * lambda2, lambda2 * lambda2}; // (lambda s + 1)^2 - 1
    return RationalTF(plant.den, poly::mul(plant.num, one_minus_f));
}

/// Draft-pressure compensator from the linearized stack-to-pressure channel.
/// The exhaust-temperature/pressure pair forms the plant, an integrator with a
/// first-order lag. The integrating filter (2 lambda s + 1)/(lambda s + 1)^2
/// makes 1 - G Q vanish twice at s = 0, so the loop keeps integral action
/// without cancelling the plant integrator:
///   Gc = D1(s) (2 lambda s + 1) / (lambda^2 s N(s)).
inline RationalTF design_pressure_compensator(const StateSpaceModel& jacobian, double lambda3) {
    if (!(lambda3 > 0.0))
        throw config_error("design_pressure_compensator: lambda3 must be positive");
    // states: T_exhaust (8), P_draft (9); input: mdot_stack (12); output: P_draft
    const RationalTF plant = extract_siso_plant(jacobian, {8, 9}, 12, 9);
    // plant = N(s) / (s * D1(s)) with D1 the exhaust lag
    const Poly den = poly::trim(plant.den);
    if (den.size() < 2 || std::abs(den[0]) > 1e-9 * std::abs(den.back()))
        throw numeric_error("design_pressure_compensator: expected an integrating plant");
    Poly lag(den.begin() + 1, den.end()); // factor out the integrator
    detail::require_hurwitz(lag, "pressure plant lag");
    detail::require_hurwitz(plant.num, "pressure plant numerator");

    const Poly num = poly::mul(lag, {1.0, 2.0 * lambda3});
    const Poly d = poly::mul(plant.num, {0.0, lambda3 * lambda3});
    return RationalTF(num, d);
}

/// Tuning knobs for the shipped loop designs. Absent values fall back to the
/// defaults: tau_c = tau/3, lambda3 = 3/a29, and a fixed lambda2 (the
/// analytic lambda2 guideline needs a right-half-plane zero and a positive
/// natural frequency, which this plant does not provide at its operating
/// point).
struct LoopTuning {
    std::optional<double> tau_c;
    std::optional<double> lambda2;
    std::optional<double> lambda3;
    int filter_order3 = 2;
    bool pi_antiwindup = false;
    double lambda2_fallback = 30.0;
};

struct DesignedLoops {
    MoistureLoopModel moisture_model;
    PIGains moisture_pi;
    double tau_c = 0.0;
    RationalTF temperature_compensator; ///< drive form (includes 1/k_a)
    double lambda2 = 0.0;
    RationalTF pressure_compensator;
    double lambda3 = 0.0;
    LoopCompensators runtime; ///< realized bundle for the simulation engine
};

/// Builds the three loop compensators used by the scenario runner: the
/// direct-synthesis PI on the moisture channel and the two model-inversion
/// designs on the Jacobian of the nonlinear balances.
inline DesignedLoops design_loops(const OperatingPoint& op, const StateSpaceModel& jacobian,
                                  const AlphaCoefficients& alphas, const PlantParameters& params,
                                  const LoopTuning& tuning = {}, double p_draft_ss = -100e3) {
    DesignedLoops d;
    d.moisture_model = g1_model(op, params.m_solid);
    d.tau_c = tuning.tau_c ? *tuning.tau_c : d.moisture_model.tau / 3.0;
    d.moisture_pi = pi_direct_synthesis(d.moisture_model, d.tau_c);

    d.lambda2 = tuning.lambda2 ? *tuning.lambda2 : tuning.lambda2_fallback;
    const RationalTF gc2 = design_temperature_compensator(jacobian, d.lambda2);
    d.temperature_compensator = (1.0 / params.k_air_actuator) * gc2;

    d.lambda3 = tuning.lambda3 ? *tuning.lambda3 : (alphas[29] > 0.0 ? 3.0 / alphas[29] : 12.0);
    const RationalTF gc3 = design_pressure_compensator(jacobian, d.lambda3);
    const double fan = fan_gain(params.k_fan, p_draft_ss);
    d.pressure_compensator = (1.0 / fan) * gc3;

    LoopCompensators& rt = d.runtime;
    rt.moisture_pi = d.moisture_pi;
    rt.f_solids_bias = op.kv.f_solids;
    rt.temperature = tf_realize(d.temperature_compensator);
    rt.c2_bias = op.kv.mdot_air / params.k_air_actuator;
    rt.pressure = tf_realize(d.pressure_compensator);
    rt.c3_bias = op.uv.mdot_stack / fan;
    rt.k_air_actuator = params.k_air_actuator;
    rt.k_fan = params.k_fan;
    rt.p_draft_ss = p_draft_ss;
    rt.pi_antiwindup = tuning.pi_antiwindup;
    return d;
}

} // namespace dryerctl
