#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace dryerctl {

inline constexpr int kNumStates = 10;
inline constexpr int kNumInputs = 14;

using StateVec = Eigen::Matrix<double, kNumStates, 1>;
using InputVec = Eigen::Matrix<double, kNumInputs, 1>;
using StateMat = Eigen::Matrix<double, kNumStates, kNumStates>;
using InputMat = Eigen::Matrix<double, kNumStates, kNumInputs>;

/// Dynamic states of the plant. Order of the vector form:
/// [m_chamber, T_chamber, m_windbox, T_windbox, M_bedwater,
///  m_dryergas, T_dryergas, m_exhaust, T_exhaust, P_draft].
struct PlantState {
    double m_chamber = 1.0;     ///< combustion chamber gas mass, kg
    double t_chamber = 1173.15; ///< chamber gas temperature, K
    double m_windbox = 1.0;     ///< windbox gas mass, kg
    double t_windbox = 1173.15; ///< windbox gas temperature, K
    double m_bedwater = 110.0;  ///< water inventory in the bed, kg
    double m_dryergas = 2.0;    ///< dryer gas mass, kg
    double t_dryergas = 693.15; ///< dryer gas temperature, K
    double m_exhaust = 2.0;     ///< exhaust duct gas mass, kg
    double t_exhaust = 693.15;  ///< exhaust gas temperature, K
    double p_draft = -100e3;    ///< draft gauge pressure, Pa (negative under vacuum)

    /// Bed temperature, K. Present only when the bed-energy augmentation is on.
    std::optional<double> t_bed;

    StateVec to_vector() const {
        StateVec v;
        v << m_chamber, t_chamber, m_windbox, t_windbox, m_bedwater,
             m_dryergas, t_dryergas, m_exhaust, t_exhaust, p_draft;
        return v;
    }

    static PlantState from_vector(const StateVec& v) {
        PlantState s;
        s.m_chamber = v(0); s.t_chamber = v(1); s.m_windbox = v(2); s.t_windbox = v(3);
        s.m_bedwater = v(4); s.m_dryergas = v(5); s.t_dryergas = v(6);
        s.m_exhaust = v(7); s.t_exhaust = v(8); s.p_draft = v(9);
        return s;
    }
};

/// Exogenous inputs. Order of the vector form:
/// [mdot_fuel, mdot_air, mdot_chamber_to_windbox, mdot_evap_to_windbox, T_air_in,
///  mdot_windbox_to_dryer, T_dryer_in, F_solids, X_in, X_out_cmd,
///  mdot_gas_out, T_bed_input, mdot_stack, T_dryer_out].
struct ExogenousInputs {
    double mdot_fuel = 0.012;               ///< kg/s
    double mdot_air = 0.25;                 ///< kg/s
    double mdot_chamber_to_windbox = 0.262; ///< kg/s
    double mdot_evap_to_windbox = 0.2;      ///< kg/s
    double t_air_in = 298.0;                ///< K
    double mdot_windbox_to_dryer = 0.262;   ///< kg/s
    double t_dryer_in = 993.15;             ///< K
    double f_solids = 2.5;                  ///< kg/s
    double x_in = 0.15;                     ///< wet-basis fraction
    double x_out_cmd = 0.05;                ///< wet-basis fraction
    double mdot_gas_out = 0.25;             ///< kg/s
    double t_bed_input = 643.15;            ///< K
    double mdot_stack = 0.25;               ///< kg/s
    double t_dryer_out = 643.15;            ///< K

    InputVec to_vector() const {
        InputVec v;
        v << mdot_fuel, mdot_air, mdot_chamber_to_windbox, mdot_evap_to_windbox, t_air_in,
             mdot_windbox_to_dryer, t_dryer_in, f_solids, x_in, x_out_cmd,
             mdot_gas_out, t_bed_input, mdot_stack, t_dryer_out;
        return v;
    }

    static ExogenousInputs from_vector(const InputVec& v) {
        ExogenousInputs u;
        u.mdot_fuel = v(0); u.mdot_air = v(1); u.mdot_chamber_to_windbox = v(2);
        u.mdot_evap_to_windbox = v(3); u.t_air_in = v(4); u.mdot_windbox_to_dryer = v(5);
        u.t_dryer_in = v(6); u.f_solids = v(7); u.x_in = v(8); u.x_out_cmd = v(9);
        u.mdot_gas_out = v(10); u.t_bed_input = v(11); u.mdot_stack = v(12);
        u.t_dryer_out = v(13);
        return u;
    }
};

/// Time derivative of PlantState, same layout, per-second units.
struct StateDerivative {
    double dm_chamber = 0.0;
    double dt_chamber = 0.0;
    double dm_windbox = 0.0;
    double dt_windbox = 0.0;
    double dm_bedwater = 0.0;
    double dm_dryergas = 0.0;
    double dt_dryergas = 0.0;
    double dm_exhaust = 0.0;
    double dt_exhaust = 0.0;
    double dp_draft = 0.0;

    StateVec to_vector() const {
        StateVec v;
        v << dm_chamber, dt_chamber, dm_windbox, dt_windbox, dm_bedwater,
             dm_dryergas, dt_dryergas, dm_exhaust, dt_exhaust, dp_draft;
        return v;
    }
};

inline const std::array<std::string, kNumStates>& state_labels() {
    static const std::array<std::string, kNumStates> labels = {
        "m_chamber", "t_chamber", "m_windbox", "t_windbox", "m_bedwater",
        "m_dryergas", "t_dryergas", "m_exhaust", "t_exhaust", "p_draft"};
    return labels;
}

inline const std::array<std::string, kNumInputs>& input_labels() {
    static const std::array<std::string, kNumInputs> labels = {
        "mdot_fuel", "mdot_air", "mdot_chamber_to_windbox", "mdot_evap_to_windbox",
        "t_air_in", "mdot_windbox_to_dryer", "t_dryer_in", "f_solids", "x_in",
        "x_out_cmd", "mdot_gas_out", "t_bed_input", "mdot_stack", "t_dryer_out"};
    return labels;
}

} // namespace dryerctl
