#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dryerctl/errors.hpp"
#include "dryerctl/params.hpp"

namespace dryerctl {

struct EfficiencyBreakdown {
    double q_useful = 0.0; ///< latent evaporation power, W
    double q_input = 0.0;  ///< fuel power, W
    double q_loss = 0.0;   ///< sensible stack loss, W
    double eta = 0.0;      ///< dimensionless, unclamped
    std::vector<std::string> warnings;
};

/// Instantaneous dryer efficiency from the energy streams:
/// eta = (q_useful / q_input) * (1 - q_loss / q_input).
/// Values outside [0, 1] are reported with a warning, never clamped; clamping
/// would hide configuration inconsistencies.
inline EfficiencyBreakdown efficiency_full(double f_solids, double x_in, double x_out,
                                           double mdot_fuel, double mdot_stack,
                                           double t_exhaust, double t_ambient,
                                           const PlantParameters& p) {
    if (!(mdot_fuel > 0.0))
        throw numeric_error("efficiency_full: undefined for mdot_fuel <= 0");
    EfficiencyBreakdown b;
    b.q_useful = p.latent_heat * f_solids * (x_in - x_out);
    b.q_input = p.heating_value * mdot_fuel;
    b.q_loss = p.cp_exhaust_gas * mdot_stack * (t_exhaust - t_ambient);
    b.eta = (b.q_useful / b.q_input) * (1.0 - b.q_loss / b.q_input);
    if (b.q_useful < 0.0) b.warnings.push_back("negative useful power (condensing feed)");
    if (b.q_loss < 0.0) b.warnings.push_back("negative stack loss (exhaust below ambient)");
    if (b.eta > 1.0)
        b.warnings.push_back("eta above 1: useful power exceeds available fuel power");
    else if (b.eta < 0.0)
        b.warnings.push_back("eta below 0");
    return b;
}

/// Temperature-ratio approximation (T_in - T_e) / (T_in - T_amb).
inline double efficiency_simplified(double t_in, double t_exhaust, double t_ambient) {
    const double lift = t_in - t_ambient;
    if (lift == 0.0)
        throw numeric_error("efficiency_simplified: degenerate lift, T_in equals T_ambient");
    return (t_in - t_exhaust) / lift;
}

struct SensitivityTriple {
    double d_eta_d_t_in = 0.0;   ///< 1/K
    double d_eta_d_t_e = 0.0;    ///< 1/K
    double d_eta_d_t_amb = 0.0;  ///< 1/K
};

/// Exact partial derivatives of the temperature-ratio efficiency.
inline SensitivityTriple sensitivities(double t_in, double t_exhaust, double t_ambient) {
    const double lift = t_in - t_ambient;
    if (lift == 0.0)
        throw numeric_error("sensitivities: degenerate lift, T_in equals T_ambient");
    SensitivityTriple s;
    s.d_eta_d_t_in = (t_exhaust - t_ambient) / (lift * lift);
    s.d_eta_d_t_e = -1.0 / lift;
    s.d_eta_d_t_amb = (t_in - t_exhaust) / (lift * lift);
    return s;
}

struct ElasticityTriple {
    double e_t_in = 0.0;
    double e_t_e = 0.0;
    double e_t_amb = 0.0;

    double sum() const { return e_t_in + e_t_e + e_t_amb; }
};

/// Normalized sensitivities (d eta / dT) * (T / eta). Their sum vanishes
/// identically: the efficiency is a ratio of temperature differences and is
/// invariant under uniform scaling of all three temperatures.
inline ElasticityTriple elasticities(double t_in, double t_exhaust, double t_ambient) {
    const double lift = t_in - t_ambient;
    const double drop = t_in - t_exhaust;
    if (lift == 0.0 || drop == 0.0)
        throw numeric_error("elasticities: degenerate configuration (T_in equals T_ambient "
                            "or T_in equals T_e)");
    ElasticityTriple e;
    e.e_t_in = t_in * (t_exhaust - t_ambient) / (lift * drop);
    e.e_t_e = -t_exhaust / drop;
    e.e_t_amb = t_ambient / lift;
    return e;
}

/// Signal values and time derivatives needed by the efficiency rate.
struct EfficiencySignals {
    double f_solids, x_in, x_out, mdot_fuel, mdot_stack, t_exhaust;
    double d_f_solids, d_x_in, d_x_out, d_mdot_fuel, d_mdot_stack, d_t_exhaust;
};

/// Time derivative of the full efficiency along a trace, grouped into the
/// feed/moisture term, the fuel term and the stack-loss term of the chain
/// rule. Exact product-rule factors are carried so the result matches a
/// finite difference of efficiency_full.
inline double efficiency_rate(const EfficiencySignals& s, double t_ambient,
                              const PlantParameters& p) {
    if (!(s.mdot_fuel > 0.0))
        throw numeric_error("efficiency_rate: undefined for mdot_fuel <= 0");
    const double q_in = p.heating_value * s.mdot_fuel;
    const double q_useful = p.latent_heat * s.f_solids * (s.x_in - s.x_out);
    const double q_loss = p.cp_exhaust_gas * s.mdot_stack * (s.t_exhaust - t_ambient);
    const double loss_frac = q_loss / q_in;

    const double d_evap = s.d_f_solids * (s.x_in - s.x_out) + s.f_solids * (s.d_x_in - s.d_x_out);
    const double feed_term = p.latent_heat * d_evap / q_in * (1.0 - loss_frac);

    const double d_q_in = p.heating_value * s.d_mdot_fuel;
    const double fuel_term = -(q_useful * d_q_in) / (q_in * q_in) * (1.0 - 2.0 * loss_frac);

    const double d_q_loss = p.cp_exhaust_gas *
                            (s.d_mdot_stack * (s.t_exhaust - t_ambient) + s.mdot_stack * s.d_t_exhaust);
    const double loss_term = -(q_useful / q_in) * d_q_loss / q_in;

    return feed_term + fuel_term + loss_term;
}

enum class SurfaceMode { fix_t_amb, fix_t_e, fix_t_in };
enum class SurfaceQuantity { eta, d_eta_d_t_in, d_eta_d_t_e };

struct SurfaceGrid {
    SurfaceMode mode;
    SurfaceQuantity quantity;
    std::string axis1_name, axis2_name, fixed_name;
    double fixed_value = 0.0;
    std::vector<double> axis1, axis2;
    std::vector<std::vector<double>> values;   ///< [i][j] over axis1 x axis2
    std::vector<std::vector<bool>> degenerate; ///< masked cells carry no value
};

/// Cellwise evaluation of the efficiency or one of its sensitivities over a
/// rectangular temperature grid. Cells where the lift T_in - T_amb vanishes
/// are masked degenerate.
inline SurfaceGrid surface_sweep(SurfaceMode mode, double fixed_value,
                                 const std::vector<double>& axis1,
                                 const std::vector<double>& axis2,
                                 SurfaceQuantity quantity) {
    if (axis1.empty() || axis2.empty())
        throw config_error("surface_sweep: grid axes must be nonempty");
    for (const auto* ax : {&axis1, &axis2})
        for (size_t i = 1; i < ax->size(); ++i)
            if (!((*ax)[i] > (*ax)[i - 1]))
                throw config_error("surface_sweep: grid axes must be strictly increasing");

    SurfaceGrid g;
    g.mode = mode;
    g.quantity = quantity;
    g.fixed_value = fixed_value;
    g.axis1 = axis1;
    g.axis2 = axis2;
    switch (mode) {
        case SurfaceMode::fix_t_amb:
            g.axis1_name = "t_in"; g.axis2_name = "t_e"; g.fixed_name = "t_amb"; break;
        case SurfaceMode::fix_t_e:
            g.axis1_name = "t_in"; g.axis2_name = "t_amb"; g.fixed_name = "t_e"; break;
        case SurfaceMode::fix_t_in:
            g.axis1_name = "t_e"; g.axis2_name = "t_amb"; g.fixed_name = "t_in"; break;
    }

    g.values.assign(axis1.size(), std::vector<double>(axis2.size(), 0.0));
    g.degenerate.assign(axis1.size(), std::vector<bool>(axis2.size(), false));
    for (size_t i = 0; i < axis1.size(); ++i) {
        for (size_t j = 0; j < axis2.size(); ++j) {
            double t_in = 0.0, t_e = 0.0, t_amb = 0.0;
            switch (mode) {
                case SurfaceMode::fix_t_amb: t_in = axis1[i]; t_e = axis2[j]; t_amb = fixed_value; break;
                case SurfaceMode::fix_t_e:   t_in = axis1[i]; t_amb = axis2[j]; t_e = fixed_value; break;
                case SurfaceMode::fix_t_in:  t_e = axis1[i];  t_amb = axis2[j]; t_in = fixed_value; break;
            }
            if (t_in == t_amb) {
                g.degenerate[i][j] = true;
                continue;
            }
            switch (quantity) {
                case SurfaceQuantity::eta:
                    g.values[i][j] = efficiency_simplified(t_in, t_e, t_amb);
                    break;
                case SurfaceQuantity::d_eta_d_t_in:
                    g.values[i][j] = sensitivities(t_in, t_e, t_amb).d_eta_d_t_in;
                    break;
                case SurfaceQuantity::d_eta_d_t_e:
                    g.values[i][j] = sensitivities(t_in, t_e, t_amb).d_eta_d_t_e;
                    break;
            }
        }
    }
    return g;
}

} // namespace dryerctl
