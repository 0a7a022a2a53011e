#pragma once

#include <string>
#include <vector>

#include "dryerctl/errors.hpp"

namespace dryerctl {

/// Physical constants of the plant. Defaults are standard handbook values for a
/// fuel-oil fired pebble dryer; every field is overridable from the config file.
/// All temperatures absolute (K), all energies SI.
struct PlantParameters {
    double heating_value = 42.5e6;    ///< fuel lower heating value, J/kg
    double latent_heat = 2.26e6;      ///< latent heat of vaporization, J/kg
    double cp_chamber = 1100.0;       ///< combustion gas specific heat, J/(kg K)
    double cp_air = 1005.0;           ///< inlet air specific heat, J/(kg K)
    double cp_windbox_gas = 1100.0;   ///< windbox gas specific heat, J/(kg K)
    double cp_dryer_gas = 1100.0;     ///< dryer gas specific heat, J/(kg K)
    double cp_exhaust_gas = 1100.0;   ///< exhaust gas specific heat, J/(kg K)
    double cp_solid = 900.0;          ///< pebble specific heat, J/(kg K)
    double cp_liquid_water = 4186.0;  ///< liquid water specific heat, J/(kg K)
    double ua_bed = 500.0;            ///< gas-to-bed heat transfer conductance, W/K
    double ueae_duct = 50.0;          ///< exhaust duct loss conductance, W/K
    double r_gas = 287.0;             ///< specific gas constant, J/(kg K)
    double v_exhaust = 2.0;           ///< exhaust duct volume, m^3
    double m_solid = 750.0;           ///< dry pebble bed mass, kg (constant)
    double t_ambient = 293.0;         ///< ambient temperature, K
    double k_air_actuator = 0.05;     ///< air-flow actuator gain, (kg/s)/signal-unit
    double k_fan = 0.03;              ///< ID-fan coefficient, (kg/s)/(signal-unit*sqrt(Pa))
};

/// Ratios of plant parameters used throughout the balance equations.
struct DerivedConstants {
    double k12; ///< heating value over chamber gas cp, K
    double k22; ///< air cp over chamber gas cp
    double k14; ///< chamber gas cp over windbox gas cp
    double k24; ///< air cp over windbox gas cp
    double k34; ///< identically 1
    double k17; ///< bed conductance over windbox gas cp, kg/s
    double k18; ///< duct loss conductance over exhaust gas cp, kg/s
    double k19; ///< gas constant over exhaust volume, J/(kg K m^3)
    double k29; ///< k19 * k18
};

namespace detail {

inline void require_positive(double v, const char* name) {
    if (!(v > 0.0))
        throw config_error(std::string("invalid parameter: ") + name + " must be strictly positive");
}

} // namespace detail

inline DerivedConstants derive_constants(const PlantParameters& p) {
    detail::require_positive(p.heating_value, "heating_value");
    detail::require_positive(p.latent_heat, "latent_heat");
    detail::require_positive(p.cp_chamber, "cp_chamber");
    detail::require_positive(p.cp_air, "cp_air");
    detail::require_positive(p.cp_windbox_gas, "cp_windbox_gas");
    detail::require_positive(p.cp_dryer_gas, "cp_dryer_gas");
    detail::require_positive(p.cp_exhaust_gas, "cp_exhaust_gas");
    detail::require_positive(p.cp_solid, "cp_solid");
    detail::require_positive(p.cp_liquid_water, "cp_liquid_water");
    detail::require_positive(p.ua_bed, "ua_bed");
    detail::require_positive(p.ueae_duct, "ueae_duct");
    detail::require_positive(p.r_gas, "r_gas");
    detail::require_positive(p.v_exhaust, "v_exhaust");
    detail::require_positive(p.m_solid, "m_solid");
    detail::require_positive(p.t_ambient, "t_ambient");

    DerivedConstants k{};
    k.k12 = p.heating_value / p.cp_chamber;
    k.k22 = p.cp_air / p.cp_chamber;
    k.k14 = p.cp_chamber / p.cp_windbox_gas;
    k.k24 = p.cp_air / p.cp_windbox_gas;
    k.k34 = 1.0;
    k.k17 = p.ua_bed / p.cp_windbox_gas;
    k.k18 = p.ueae_duct / p.cp_exhaust_gas;
    k.k19 = p.r_gas / p.v_exhaust;
    k.k29 = p.r_gas * p.ueae_duct / (p.v_exhaust * p.cp_exhaust_gas);
    return k;
}

} // namespace dryerctl
