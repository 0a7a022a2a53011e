#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dryerctl/errors.hpp"
#include "dryerctl/params.hpp"
#include "dryerctl/state.hpp"

namespace dryerctl {

/// The published balance set omits the windbox inflow in the dryer-gas mass
/// balance. PaperVerbatim reproduces that row as printed; MassConsistent adds
/// the inflow so the gas inventory is conserved.
enum class ModelVariant { PaperVerbatim, MassConsistent };

/// Wet-basis outlet moisture of the bed, M_w / (M_s + M_w).
inline double outlet_moisture(double m_bedwater, double m_solid) {
    const double total = m_solid + m_bedwater;
    if (!(total > 0.0))
        throw numeric_error("outlet_moisture: undefined, M_solid + M_bedwater must be positive");
    return m_bedwater / total;
}

struct EvaporationRate {
    double value = 0.0; ///< kg/s, may be negative
    bool condensation_warning = false;
};

/// Net water removal demanded by the feed moisture drop, F_s*(X_in - X_out).
/// Negative values (X_out > X_in) are returned with a warning flag.
inline EvaporationRate evaporation_rate(double f_solids, double x_in, double x_out) {
    if (f_solids < 0.0)
        throw config_error("evaporation_rate: F_solids must be nonnegative");
    EvaporationRate r;
    r.value = f_solids * (x_in - x_out);
    r.condensation_warning = x_out > x_in && f_solids > 0.0;
    return r;
}

namespace detail {

inline void check_gas_masses(const PlantState& x) {
    struct Entry { double v; const char* name; };
    const Entry masses[] = {{x.m_chamber, "m_chamber"},
                            {x.m_windbox, "m_windbox"},
                            {x.m_dryergas, "m_dryergas"},
                            {x.m_exhaust, "m_exhaust"}};
    for (const auto& m : masses) {
        if (!(m.v > 0.0))
            throw numeric_error(std::string("nonlinear_rhs: singular state, ") + m.name +
                                " must be strictly positive (got " + std::to_string(m.v) + ")");
    }
}

} // namespace detail

/// Right-hand side of the ten coupled balances: chamber mass/energy, windbox
/// mass/energy, bed water, dryer-gas mass/energy, exhaust mass/energy, draft
/// pressure. The pressure row is the ideal-gas law applied to the exhaust
/// inventory, dP/dt = (R/V_e) * d(m_e*T_e)/dt, expanded with the exhaust mass
/// and energy rows.
inline StateDerivative nonlinear_rhs(const PlantState& x, const ExogenousInputs& u,
                                     const DerivedConstants& k,
                                     ModelVariant variant = ModelVariant::PaperVerbatim,
                                     double t_ambient = 293.0) {
    detail::check_gas_masses(x);

    const double mc = x.m_chamber, tc = x.t_chamber;
    const double mw = x.m_windbox, tw = x.t_windbox;
    const double mg = x.m_dryergas, tg = x.t_dryergas;
    const double me = x.m_exhaust, te = x.t_exhaust;

    const double mf = u.mdot_fuel, ma = u.mdot_air;
    const double mcw = u.mdot_chamber_to_windbox, mwd = u.mdot_windbox_to_dryer;
    const double ta = u.t_air_in, tdin = u.t_dryer_in, tdout = u.t_dryer_out;
    const double fs = u.f_solids, xin = u.x_in, xout = u.x_out_cmd;
    const double mgout = u.mdot_gas_out, mstk = u.mdot_stack;
    const double ts = x.t_bed ? *x.t_bed : u.t_bed_input;
    const double tamb = t_ambient;

    StateDerivative d;

    // chamber mass balance
    d.dm_chamber = mf + ma - mcw;

    // chamber energy balance, enthalpy form expanded over the gas mass
    d.dt_chamber = k.k12 * mf / mc - (mf / mc) * tc + k.k22 * (ma / mc) * (ta - tc) -
                   (ma / mc) * tc - (mcw / mc) * (tc - tw);

    // windbox mass balance
    d.dm_windbox = mcw - mwd;

    // windbox energy balance
    d.dt_windbox = k.k14 * (mcw / mw) * (tc - tw) - k.k24 * (mcw / mw) * tw -
                   k.k34 * (mwd / mw) * (tw - tdin) + (mwd / mw) * tw;

    // bed water balance
    d.dm_bedwater = fs * (xin - xout);

    // dryer gas mass balance; the verbatim row carries only the evaporation
    // inflow, the consistent variant adds the windbox throughput
    d.dm_dryergas = fs * (xin - xout) - mgout;
    if (variant == ModelVariant::MassConsistent)
        d.dm_dryergas += mwd;

    // dryer gas energy balance with the convective bed sink
    d.dt_dryergas = (mwd / mg) * (tw - tg) - (fs * (xin - xout) / mg) * tg -
                    (mgout / mg) * (tg - te) + (mgout / mg) * tg -
                    k.k17 * (tg - ts) / mg;

    // exhaust mass balance
    d.dm_exhaust = mgout - mstk;

    // exhaust energy balance including the duct loss
    d.dt_exhaust = (mgout / me) * (tdout - te) - (mgout / me) * te -
                   (mstk / me) * (te - tamb) + (mstk / me) * te -
                   (mstk / me) * (te - tamb) - k.k18 * (tdout - tamb) / me;

    // draft pressure: ideal-gas coupling to the exhaust inventory
    d.dp_draft = k.k19 * (te * d.dm_exhaust + me * d.dt_exhaust);

    return d;
}

/// Bed temperature rate from the bed energy balance: convective gain from the
/// gas, latent sink of the evaporating water, enthalpy carried out with the
/// solids stream, all over the combined solid/water thermal capacity. The
/// latent term defaults to the feed-moisture drop F_s (X_in - X_out); callers
/// that sustain evaporation independently of the feed pass the rate directly.
inline double bed_energy_rhs(const PlantState& x, const ExogenousInputs& u,
                             const PlantParameters& p,
                             std::optional<double> evaporation = std::nullopt) {
    const double capacity = p.cp_solid * p.m_solid + p.cp_liquid_water * x.m_bedwater;
    if (!(capacity > 0.0))
        throw numeric_error("bed_energy_rhs: singular state, bed thermal capacity must be positive");

    const double ts = x.t_bed ? *x.t_bed : u.t_bed_input;
    const double evap = evaporation ? *evaporation : u.f_solids * (u.x_in - u.x_out_cmd);
    const double convective = p.ua_bed * (x.t_dryergas - ts);
    const double latent = p.latent_heat * evap;
    // solids leave at bed temperature; feed solids and feed water enter at ambient
    const double outflow = u.f_solids * (p.cp_solid * (ts - p.t_ambient) +
                                         p.cp_liquid_water * u.x_out_cmd * (ts - p.t_ambient));
    return (convective - latent - outflow) / capacity;
}

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Reports invariant violations (hard errors) and physical inconsistencies
/// (warnings). Never throws; callers decide what to do with the findings.
inline ValidationReport validate_parameters(const PlantParameters& p, const ExogenousInputs& u) {
    ValidationReport rep;
    auto err = [&rep](const std::string& m) { rep.errors.push_back(m); };
    auto warn = [&rep](const std::string& m) { rep.warnings.push_back(m); };

    struct Entry { double v; const char* name; };
    const Entry positives[] = {
        {p.heating_value, "heating_value"}, {p.latent_heat, "latent_heat"},
        {p.cp_chamber, "cp_chamber"}, {p.cp_air, "cp_air"},
        {p.cp_windbox_gas, "cp_windbox_gas"}, {p.cp_dryer_gas, "cp_dryer_gas"},
        {p.cp_exhaust_gas, "cp_exhaust_gas"}, {p.cp_solid, "cp_solid"},
        {p.cp_liquid_water, "cp_liquid_water"}, {p.ua_bed, "ua_bed"},
        {p.ueae_duct, "ueae_duct"}, {p.r_gas, "r_gas"}, {p.v_exhaust, "v_exhaust"},
        {p.m_solid, "m_solid"}, {p.t_ambient, "t_ambient"},
        {p.k_air_actuator, "k_air_actuator"}, {p.k_fan, "k_fan"}};
    for (const auto& e : positives)
        if (!(e.v > 0.0)) err(std::string(e.name) + " must be strictly positive");

    const Entry flows[] = {
        {u.mdot_fuel, "mdot_fuel"}, {u.mdot_air, "mdot_air"},
        {u.mdot_chamber_to_windbox, "mdot_chamber_to_windbox"},
        {u.mdot_evap_to_windbox, "mdot_evap_to_windbox"},
        {u.mdot_windbox_to_dryer, "mdot_windbox_to_dryer"}, {u.f_solids, "f_solids"},
        {u.mdot_gas_out, "mdot_gas_out"}, {u.mdot_stack, "mdot_stack"}};
    for (const auto& e : flows)
        if (e.v < 0.0) err(std::string(e.name) + " must be nonnegative");

    for (const Entry& e : {Entry{u.x_in, "x_in"}, Entry{u.x_out_cmd, "x_out_cmd"}})
        if (e.v < 0.0 || e.v > 1.0) err(std::string(e.name) + " must lie in [0, 1]");

    if (rep.errors.empty()) {
        // useful evaporation power cannot exceed the fuel power
        const double useful = p.latent_heat * u.f_solids * (u.x_in - u.x_out_cmd);
        const double fuel = p.heating_value * u.mdot_fuel;
        if (useful > fuel) {
            warn("useful evaporation power " + std::to_string(useful / 1e3) +
                 " kW exceeds fuel power " + std::to_string(fuel / 1e3) + " kW");
        }
        if (u.x_out_cmd > u.x_in)
            warn("x_out_cmd above x_in implies condensation rather than drying");
    }
    return rep;
}

} // namespace dryerctl
