#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dryerctl/errors.hpp"
#include "dryerctl/linearize.hpp"
#include "dryerctl/tf.hpp"

namespace dryerctl {

// ---------------------------------------------------------------------------
// moisture loop: first-order model and direct-synthesis PI
// ---------------------------------------------------------------------------

/// First-order small-signal model of the feed-to-moisture channel.
struct MoistureLoopModel {
    double k_x = 0.0;  ///< moisture sensitivity to bed water, 1/kg
    double gain = 0.0; ///< process gain K1 per (kg/s)
    double tau = 0.0;  ///< time constant, s
    bool zero_gain_warning = false;
};

inline MoistureLoopModel g1_model(const OperatingPoint& op, double m_solid) {
    if (!(m_solid > 0.0)) throw config_error("g1_model: M_solid must be positive");
    if (!(op.kv.f_solids > 0.0))
        throw numeric_error("g1_model: F_solids^ss = 0 gives an infinite time constant");

    MoistureLoopModel m;
    const double one_minus_x = 1.0 - op.kv.x_out;
    m.k_x = one_minus_x * one_minus_x / m_solid;
    m.gain = m.k_x * (op.kv.x_in - op.kv.x_out);
    m.tau = m_solid / (op.kv.f_solids * one_minus_x * one_minus_x);
    m.zero_gain_warning = m.gain == 0.0;
    return m;
}

struct PIGains {
    double kc = 0.0;    ///< proportional gain
    double tau_i = 0.0; ///< integral time, s
};

/// Direct synthesis on a first-order plant against a first-order closed-loop
/// target with time constant tau_c: Kc = tau/(K1 tau_c), tau_I = tau.
inline PIGains pi_direct_synthesis(const MoistureLoopModel& m, double tau_c) {
    if (!(tau_c > 0.0)) throw config_error("pi_direct_synthesis: tau_c must be positive");
    if (m.gain == 0.0) throw config_error("pi_direct_synthesis: zero process gain");
    return {m.tau / (m.gain * tau_c), m.tau};
}

/// The direct-synthesis compensator before grouping into PI form,
/// (tau s + 1) / (K1 tau_c s).
inline RationalTF g1_ds_compensator(const MoistureLoopModel& m, double tau_c) {
    if (!(tau_c > 0.0)) throw config_error("g1_ds_compensator: tau_c must be positive");
    if (m.gain == 0.0) throw config_error("g1_ds_compensator: zero process gain");
    return RationalTF({1.0, m.tau}, {0.0, m.gain * tau_c});
}

/// Canonical PI form Kc (1 + 1/(tau_I s)) as a rational function.
inline RationalTF pi_tf(const PIGains& g) {
    return RationalTF({g.kc, g.kc * g.tau_i}, {0.0, g.tau_i});
}

// ---------------------------------------------------------------------------
// furnace temperature loop: air flow -> chamber temperature
// ---------------------------------------------------------------------------

/// IMC synthesis record: plant, its factorization, filter and the resulting
/// unity-feedback compensator.
struct IMCDesign {
    RationalTF plant;
    RationalTF noninvertible; ///< retained dynamics (integrators, RHP zero)
    RationalTF invertible;    ///< inverted minimum-phase remainder
    RationalTF compensator;   ///< unity-feedback equivalent, rationalized
    RationalTF drive_compensator; ///< compensator divided by the actuator gain
    double filter_lambda = 0.0;
    int filter_order = 0;
    std::optional<double> rhp_zero;
    std::vector<std::string> warnings;
};

namespace detail {

/// Minimum-phase-side denominator of the furnace plant,
/// -s^2 + (a12 + a5) s + (a5 a12 + a7 a11).
inline Poly g2_inner_denominator(const AlphaCoefficients& c) {
    return {c[5] * c[12] + c[7] * c[11], c[12] + c[5], -1.0};
}

inline void warn_if_rhp_roots(const Poly& p, const char* what, std::vector<std::string>& warnings,
                              double tol = 1e-9) {
    for (const Complex& r : poly::roots(p)) {
        if (r.real() > tol) {
            warnings.push_back(std::string("nonminimum-phase remainder: ") + what +
                               " has a right-half-plane root at Re = " + std::to_string(r.real()));
            return;
        }
    }
}

} // namespace detail

/// Identified furnace plant (a12 - s)(a4 + a2 s) / (-s^3 + (a12+a5) s^2 + (a5 a12 + a7 a11) s).
inline RationalTF g2_model(const AlphaCoefficients& c) {
    const Poly num = poly::mul({c[12], -1.0}, {c[4], c[2]});
    Poly den = poly::mul({0.0, 1.0}, detail::g2_inner_denominator(c));
    return RationalTF(num, den);
}

/// Factorization of the furnace plant into the retained part (integrator and,
/// when a12 > 0, the right-half-plane zero) and the invertible remainder.
/// For a12 <= 0 the zero is not in the right half plane and folds into the
/// invertible side. A warning is attached when the invertible side itself has
/// right-half-plane roots.
inline IMCDesign g2_factorize(const AlphaCoefficients& c) {
    IMCDesign d;
    d.plant = g2_model(c);
    const Poly inner_den = detail::g2_inner_denominator(c);
    if (c[12] > 0.0) {
        d.rhp_zero = c[12];
        d.noninvertible = RationalTF({c[12], -1.0}, {0.0, 1.0});
        d.invertible = RationalTF({c[4], c[2]}, inner_den);
    } else {
        d.noninvertible = RationalTF({1.0}, {0.0, 1.0});
        d.invertible = RationalTF(poly::mul({c[12], -1.0}, {c[4], c[2]}), inner_den);
    }
    detail::warn_if_rhp_roots(d.invertible.den, "invertible-part denominator", d.warnings);
    detail::warn_if_rhp_roots(d.invertible.num, "invertible-part numerator", d.warnings);
    return d;
}

struct Lambda2Tuning {
    double lambda2 = 0.0;
    double omega_n = 0.0;
    double t_dom = 0.0;
    std::optional<double> rhp_floor; ///< 1/(2 a12), present when a12 > 0
};

/// Filter time constant from the natural frequency and dominant time constant
/// of the minimum-phase side, raised to the right-half-plane-zero guideline
/// floor 1/(2 a12) when that zero exists.
inline Lambda2Tuning lambda2_tuning(const AlphaCoefficients& c) {
    Lambda2Tuning t;
    const double wn2 = c[7] * c[11] + c[5] * c[12];
    if (!(wn2 > 0.0))
        throw numeric_error("lambda2_tuning: omega_n^2 = a7*a11 + a5*a12 = " +
                            std::to_string(wn2) + " is not positive; the guideline does not "
                            "apply at this operating point (set lambda2 explicitly)");
    t.omega_n = std::sqrt(wn2);
    t.t_dom = 1.0 / t.omega_n;
    if (c[12] - c[5] > 0.0) t.t_dom = std::max(t.t_dom, 1.0 / (c[12] - c[5]));
    t.lambda2 = std::max(1.0 / t.omega_n, 0.3 * t.t_dom);
    if (c[12] > 0.0) {
        t.rhp_floor = 0.5 / c[12];
        t.lambda2 = std::max(t.lambda2, *t.rhp_floor);
    }
    return t;
}

/// Full furnace-loop IMC design: Q2 = (G2+)^-1 F2 with F2 = 1/(lambda2 s + 1)^2,
/// rationalized to the unity-feedback compensator
///   Gc2 = (G2+)^-1 * s / (s (lambda2 s + 1)^2 - n-(s)),
/// where n- is the numerator of the retained part. The retained integrator and
/// right-half-plane zero are never cancelled: the denominator is nonzero at
/// s = 0 and at s = a12 by construction.
inline IMCDesign imc_compensator_g2(const AlphaCoefficients& c, double lambda2,
                                    double k_air_actuator = 1.0) {
    if (!(lambda2 > 0.0)) throw config_error("imc_compensator_g2: lambda2 must be positive");
    IMCDesign d = g2_factorize(c);
    d.filter_lambda = lambda2;
    d.filter_order = 2;

    const Poly filter_den = poly::mul({1.0, lambda2}, {1.0, lambda2}); // (lambda2 s + 1)^2
    const Poly s_filter = poly::mul({0.0, 1.0}, filter_den);
    const Poly gc_den_core = poly::add(s_filter, poly::scale(d.noninvertible.num, -1.0));

    const RationalTF gc(poly::mul(d.invertible.den, {0.0, 1.0}),
                        poly::mul(d.invertible.num, gc_den_core));
    if (!gc.proper())
        throw numeric_error("imc_compensator_g2: rationalization produced an improper "
                            "compensator (internal error)");
    d.compensator = gc;
    if (!(k_air_actuator > 0.0))
        throw config_error("imc_compensator_g2: actuator gain must be positive");
    d.drive_compensator = (1.0 / k_air_actuator) * gc;
    return d;
}

// ---------------------------------------------------------------------------
// draft pressure loop: stack flow -> draft pressure
// ---------------------------------------------------------------------------

namespace detail {

/// Combined numerator of the pressure plant over the common denominator
/// s^2 (a29 + s): N3(s) = a31 s (a29 + s) + a32 (a27 - a26 s).
inline Poly g3_numerator(const AlphaCoefficients& c) {
    return poly::add(poly::scale(poly::mul({0.0, 1.0}, {c[29], 1.0}), c[31]),
                     poly::scale({c[27], -c[26]}, c[32]));
}

} // namespace detail

struct G3Model {
    RationalTF plant;
    std::optional<double> rhp_zero; ///< a27/a26, present when a26 != 0 and the ratio is positive
};

/// Pressure plant as one fraction over s^2 (a29 + s): a double-integrating
/// process with a first-order lag and a potential right-half-plane zero.
inline G3Model g3_model(const AlphaCoefficients& c) {
    G3Model m;
    m.plant = RationalTF(detail::g3_numerator(c), poly::mul({0.0, 0.0, 1.0}, {c[29], 1.0}));
    if (c[26] != 0.0) {
        const double z3 = c[27] / c[26];
        if (z3 > 0.0) m.rhp_zero = z3;
    }
    return m;
}

/// Full pressure-loop IMC design with filter order n >= 2. The double
/// integrator stays in the retained part; when z3 = a27/a26 > 0 the zero
/// (1 - s/z3) is retained as well. Rationalized form
///   Gc3 = (G3+)^-1 * s^2 / (s^2 (lambda3 s + 1)^n - n-(s)).
inline IMCDesign imc_compensator_g3(const AlphaCoefficients& c, double lambda3,
                                    int filter_order = 2) {
    if (!(lambda3 > 0.0)) throw config_error("imc_compensator_g3: lambda3 must be positive");
    if (filter_order < 2)
        throw config_error("imc_compensator_g3: filter order must be at least 2");

    IMCDesign d;
    const G3Model model = g3_model(c);
    d.plant = model.plant;
    d.rhp_zero = model.rhp_zero;
    d.filter_lambda = lambda3;
    d.filter_order = filter_order;

    const Poly n3 = poly::trim(detail::g3_numerator(c));
    if (poly::degree(n3) == 0 && n3[0] == 0.0)
        throw numeric_error("imc_compensator_g3: N3 is identically zero (degenerate plant)");

    const Poly double_integrator = {0.0, 0.0, 1.0};
    if (model.rhp_zero) {
        const double z3 = *model.rhp_zero;
        d.noninvertible = RationalTF({1.0, -1.0 / z3}, double_integrator);
        d.invertible = RationalTF(n3, poly::mul({c[29], 1.0}, {1.0, -1.0 / z3}));
    } else {
        d.noninvertible = RationalTF({1.0}, double_integrator);
        d.invertible = RationalTF(n3, {c[29], 1.0});
    }
    detail::warn_if_rhp_roots(d.invertible.num, "invertible-part numerator", d.warnings);

    Poly filter_den = {1.0};
    for (int i = 0; i < filter_order; ++i) filter_den = poly::mul(filter_den, {1.0, lambda3});
    const Poly s2_filter = poly::mul(double_integrator, filter_den);
    const Poly gc_den_core = poly::add(s2_filter, poly::scale(d.noninvertible.num, -1.0));

    const RationalTF gc(poly::mul(d.invertible.den, double_integrator),
                        poly::mul(d.invertible.num, gc_den_core));
    if (!gc.proper())
        throw numeric_error("imc_compensator_g3: rationalization produced an improper "
                            "compensator (internal error)");
    d.compensator = gc;
    d.drive_compensator = gc;
    return d;
}

// ---------------------------------------------------------------------------
// actuator maps
// ---------------------------------------------------------------------------

struct ActuatorOutput {
    double flow = 0.0; ///< kg/s, clamped at zero
    bool saturated = false;
};

inline ActuatorOutput air_actuator(double c2, double k_air_actuator) {
    if (!(k_air_actuator > 0.0)) throw config_error("air_actuator: gain must be positive");
    const double raw = k_air_actuator * c2;
    return {std::max(0.0, raw), raw < 0.0};
}

/// Fan gain k_f sqrt(|P_ss|); the steady draft is negative gauge, so the gain
/// uses its magnitude.
inline double fan_gain(double k_fan, double p_draft_ss) {
    if (!(k_fan > 0.0)) throw config_error("fan_gain: coefficient must be positive");
    return k_fan * std::sqrt(std::abs(p_draft_ss));
}

inline ActuatorOutput stack_actuator(double c3, double k_fan, double p_draft_ss) {
    const double raw = fan_gain(k_fan, p_draft_ss) * c3;
    return {std::max(0.0, raw), raw < 0.0};
}

} // namespace dryerctl
