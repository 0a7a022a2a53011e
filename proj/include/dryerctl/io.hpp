#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dryerctl/efficiency.hpp"
#include "dryerctl/errors.hpp"
#include "dryerctl/linearize.hpp"
#include "dryerctl/params.hpp"
#include "dryerctl/sim.hpp"
#include "dryerctl/steady.hpp"

namespace dryerctl {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// run configuration
// ---------------------------------------------------------------------------

struct SimulationConfig {
    bool bed_energy_augmentation = false;
    double trace_sample_s = 0.1;
    std::optional<double> evaporation_design_rate; ///< kg/s; defaults to the steady rate
    double critical_moisture = 0.10;
};

struct TuningConfig {
    std::optional<double> tau_c_s;
    std::optional<double> lambda2_s;
    std::optional<double> lambda3_s;
    int filter_order3 = 2;
    bool pi_antiwindup = false;
};

struct ReferenceFoms {
    double ise_moisture = 0.021;
    double ise_temperature = 1.84e5;
    double ise_pressure = 3.10e8;
};

struct RunConfig {
    PlantParameters plant;
    KnownVariables steady;
    SteadyMasses masses;
    LoopSetpoints setpoints;
    TuningConfig tuning;
    SimulationConfig simulation;
    ReferenceFoms reference_foms;
    ModelVariant variant = ModelVariant::PaperVerbatim;
    double integrator_step_s = 0.01;
    std::string scenario_path;

    double evaporation_design_rate() const {
        if (simulation.evaporation_design_rate) return *simulation.evaporation_design_rate;
        return steady.f_solids * (steady.x_in - steady.x_out);
    }
};

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    if (!j.is_object()) throw config_error(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) { known = true; break; }
        if (!known) throw config_error("unknown key '" + item.key() + "' in " + where);
    }
}

inline double get_num(const json& j, const char* key, double fallback,
                      const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw config_error(std::string(key) + " in " + where + " must be a number");
    return j[key].get<double>();
}

inline std::optional<double> get_opt(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) throw config_error(std::string(key) + " in " + where + " must be a number");
    return j[key].get<double>();
}

} // namespace detail

inline RunConfig parse_config(const json& j) {
    using detail::get_num;
    using detail::get_opt;
    using detail::reject_unknown_keys;

    RunConfig c;
    reject_unknown_keys(j, {"plant", "steady", "steady_masses", "setpoints", "tuning",
                            "simulation", "reference_foms", "model_variant",
                            "integrator_step_s", "scenario_path"}, "config");

    if (j.contains("plant")) {
        const json& p = j["plant"];
        reject_unknown_keys(p, {"heating_value_J_per_kg", "latent_heat_J_per_kg",
                                "cp_chamber_J_per_kgK", "cp_air_J_per_kgK",
                                "cp_windbox_gas_J_per_kgK", "cp_dryer_gas_J_per_kgK",
                                "cp_exhaust_gas_J_per_kgK", "cp_solid_J_per_kgK",
                                "cp_liquid_water_J_per_kgK", "ua_bed_W_per_K",
                                "ueae_duct_W_per_K", "r_gas_J_per_kgK", "v_exhaust_m3",
                                "m_solid_kg", "t_ambient_K", "k_air_actuator", "k_fan"},
                           "config.plant");
        PlantParameters& pp = c.plant;
        pp.heating_value = get_num(p, "heating_value_J_per_kg", pp.heating_value, "plant");
        pp.latent_heat = get_num(p, "latent_heat_J_per_kg", pp.latent_heat, "plant");
        pp.cp_chamber = get_num(p, "cp_chamber_J_per_kgK", pp.cp_chamber, "plant");
        pp.cp_air = get_num(p, "cp_air_J_per_kgK", pp.cp_air, "plant");
        pp.cp_windbox_gas = get_num(p, "cp_windbox_gas_J_per_kgK", pp.cp_windbox_gas, "plant");
        pp.cp_dryer_gas = get_num(p, "cp_dryer_gas_J_per_kgK", pp.cp_dryer_gas, "plant");
        pp.cp_exhaust_gas = get_num(p, "cp_exhaust_gas_J_per_kgK", pp.cp_exhaust_gas, "plant");
        pp.cp_solid = get_num(p, "cp_solid_J_per_kgK", pp.cp_solid, "plant");
        pp.cp_liquid_water = get_num(p, "cp_liquid_water_J_per_kgK", pp.cp_liquid_water, "plant");
        pp.ua_bed = get_num(p, "ua_bed_W_per_K", pp.ua_bed, "plant");
        pp.ueae_duct = get_num(p, "ueae_duct_W_per_K", pp.ueae_duct, "plant");
        pp.r_gas = get_num(p, "r_gas_J_per_kgK", pp.r_gas, "plant");
        pp.v_exhaust = get_num(p, "v_exhaust_m3", pp.v_exhaust, "plant");
        pp.m_solid = get_num(p, "m_solid_kg", pp.m_solid, "plant");
        pp.t_ambient = get_num(p, "t_ambient_K", pp.t_ambient, "plant");
        pp.k_air_actuator = get_num(p, "k_air_actuator", pp.k_air_actuator, "plant");
        pp.k_fan = get_num(p, "k_fan", pp.k_fan, "plant");
    }

    if (j.contains("steady")) {
        const json& s = j["steady"];
        reject_unknown_keys(s, {"mdot_fuel_kg_per_s", "mdot_air_kg_per_s", "f_solids_kg_per_s",
                                "x_in", "x_out", "t_air_in_K", "t_dryer_in_K", "t_bed_K"},
                           "config.steady");
        KnownVariables& kv = c.steady;
        kv.mdot_fuel = get_num(s, "mdot_fuel_kg_per_s", kv.mdot_fuel, "steady");
        kv.mdot_air = get_num(s, "mdot_air_kg_per_s", kv.mdot_air, "steady");
        kv.f_solids = get_num(s, "f_solids_kg_per_s", kv.f_solids, "steady");
        kv.x_in = get_num(s, "x_in", kv.x_in, "steady");
        kv.x_out = get_num(s, "x_out", kv.x_out, "steady");
        kv.t_air_in = get_num(s, "t_air_in_K", kv.t_air_in, "steady");
        kv.t_dryer_in_ss = get_num(s, "t_dryer_in_K", kv.t_dryer_in_ss, "steady");
        kv.t_bed_ss = get_num(s, "t_bed_K", kv.t_bed_ss, "steady");
    }
    c.steady.t_ambient = c.plant.t_ambient;

    if (j.contains("steady_masses")) {
        const json& m = j["steady_masses"];
        reject_unknown_keys(m, {"m_chamber_kg", "m_windbox_kg", "m_dryergas_kg", "m_exhaust_kg",
                                "m_bedwater_kg"}, "config.steady_masses");
        c.masses.m_chamber = get_num(m, "m_chamber_kg", c.masses.m_chamber, "steady_masses");
        c.masses.m_windbox = get_num(m, "m_windbox_kg", c.masses.m_windbox, "steady_masses");
        c.masses.m_dryergas = get_num(m, "m_dryergas_kg", c.masses.m_dryergas, "steady_masses");
        c.masses.m_exhaust = get_num(m, "m_exhaust_kg", c.masses.m_exhaust, "steady_masses");
        c.masses.m_bedwater = get_num(m, "m_bedwater_kg", c.masses.m_bedwater, "steady_masses");
    }

    if (j.contains("setpoints")) {
        const json& s = j["setpoints"];
        reject_unknown_keys(s, {"x_out", "t_chamber_K", "p_draft_Pa"}, "config.setpoints");
        c.setpoints.x_out = get_num(s, "x_out", c.setpoints.x_out, "setpoints");
        c.setpoints.t_chamber = get_num(s, "t_chamber_K", c.setpoints.t_chamber, "setpoints");
        c.setpoints.p_draft = get_num(s, "p_draft_Pa", c.setpoints.p_draft, "setpoints");
    }

    if (j.contains("tuning")) {
        const json& t = j["tuning"];
        reject_unknown_keys(t, {"tau_c_s", "lambda2_s", "lambda3_s", "filter_order3",
                                "pi_antiwindup"}, "config.tuning");
        c.tuning.tau_c_s = get_opt(t, "tau_c_s", "tuning");
        c.tuning.lambda2_s = get_opt(t, "lambda2_s", "tuning");
        c.tuning.lambda3_s = get_opt(t, "lambda3_s", "tuning");
        c.tuning.filter_order3 = static_cast<int>(get_num(t, "filter_order3", 2, "tuning"));
        if (t.contains("pi_antiwindup")) {
            if (!t["pi_antiwindup"].is_boolean())
                throw config_error("pi_antiwindup must be a boolean");
            c.tuning.pi_antiwindup = t["pi_antiwindup"].get<bool>();
        }
    }

    if (j.contains("simulation")) {
        const json& s = j["simulation"];
        reject_unknown_keys(s, {"bed_energy_augmentation", "trace_sample_s",
                                "evaporation_design_rate_kg_per_s", "critical_moisture"},
                           "config.simulation");
        if (s.contains("bed_energy_augmentation")) {
            if (!s["bed_energy_augmentation"].is_boolean())
                throw config_error("bed_energy_augmentation must be a boolean");
            c.simulation.bed_energy_augmentation = s["bed_energy_augmentation"].get<bool>();
        }
        c.simulation.trace_sample_s = get_num(s, "trace_sample_s", 0.1, "simulation");
        c.simulation.evaporation_design_rate =
            get_opt(s, "evaporation_design_rate_kg_per_s", "simulation");
        c.simulation.critical_moisture = get_num(s, "critical_moisture", 0.10, "simulation");
    }

    if (j.contains("reference_foms")) {
        const json& r = j["reference_foms"];
        reject_unknown_keys(r, {"ise_moisture", "ise_temperature", "ise_pressure"},
                           "config.reference_foms");
        c.reference_foms.ise_moisture = get_num(r, "ise_moisture", 0.021, "reference_foms");
        c.reference_foms.ise_temperature = get_num(r, "ise_temperature", 1.84e5, "reference_foms");
        c.reference_foms.ise_pressure = get_num(r, "ise_pressure", 3.10e8, "reference_foms");
    }

    if (j.contains("model_variant")) {
        const std::string v = j["model_variant"].get<std::string>();
        if (v == "paper") c.variant = ModelVariant::PaperVerbatim;
        else if (v == "consistent") c.variant = ModelVariant::MassConsistent;
        else throw config_error("model_variant must be 'paper' or 'consistent'");
    }
    c.integrator_step_s = detail::get_num(j, "integrator_step_s", 0.01, "config");
    if (!(c.integrator_step_s > 0.0)) throw config_error("integrator_step_s must be positive");
    if (j.contains("scenario_path")) c.scenario_path = j["scenario_path"].get<std::string>();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw config_error("malformed config JSON in " + path + ": " + e.what());
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// scenario files
// ---------------------------------------------------------------------------

inline EventTarget event_target_from_string(const std::string& s) {
    if (s == "fuel_flow") return EventTarget::fuel_flow;
    if (s == "dryer_inlet_temp") return EventTarget::dryer_inlet_temp;
    if (s == "inlet_moisture") return EventTarget::inlet_moisture;
    if (s == "moisture_setpoint") return EventTarget::moisture_setpoint;
    if (s == "pressure_setpoint") return EventTarget::pressure_setpoint;
    if (s == "chamber_temp_setpoint") return EventTarget::chamber_temp_setpoint;
    throw config_error("unknown event target: " + s);
}

inline std::string to_string(EventTarget t) {
    switch (t) {
        case EventTarget::fuel_flow: return "fuel_flow";
        case EventTarget::dryer_inlet_temp: return "dryer_inlet_temp";
        case EventTarget::inlet_moisture: return "inlet_moisture";
        case EventTarget::moisture_setpoint: return "moisture_setpoint";
        case EventTarget::pressure_setpoint: return "pressure_setpoint";
        case EventTarget::chamber_temp_setpoint: return "chamber_temp_setpoint";
    }
    return "?";
}

inline json scenario_to_json(const Scenario& sc) {
    json j;
    j["horizon_s"] = sc.horizon_s;
    j["step_s"] = sc.step_s;
    json st;
    st["m_chamber_kg"] = sc.initial_state.m_chamber;
    st["t_chamber_K"] = sc.initial_state.t_chamber;
    st["m_windbox_kg"] = sc.initial_state.m_windbox;
    st["t_windbox_K"] = sc.initial_state.t_windbox;
    st["m_bedwater_kg"] = sc.initial_state.m_bedwater;
    st["m_dryergas_kg"] = sc.initial_state.m_dryergas;
    st["t_dryergas_K"] = sc.initial_state.t_dryergas;
    st["m_exhaust_kg"] = sc.initial_state.m_exhaust;
    st["t_exhaust_K"] = sc.initial_state.t_exhaust;
    st["p_draft_Pa"] = sc.initial_state.p_draft;
    if (sc.initial_state.t_bed) st["t_bed_K"] = *sc.initial_state.t_bed;
    j["initial_state"] = st;
    json in;
    in["mdot_fuel_kg_per_s"] = sc.initial_inputs.mdot_fuel;
    in["mdot_air_kg_per_s"] = sc.initial_inputs.mdot_air;
    in["mdot_chamber_to_windbox_kg_per_s"] = sc.initial_inputs.mdot_chamber_to_windbox;
    in["mdot_evap_to_windbox_kg_per_s"] = sc.initial_inputs.mdot_evap_to_windbox;
    in["t_air_in_K"] = sc.initial_inputs.t_air_in;
    in["mdot_windbox_to_dryer_kg_per_s"] = sc.initial_inputs.mdot_windbox_to_dryer;
    in["t_dryer_in_K"] = sc.initial_inputs.t_dryer_in;
    in["f_solids_kg_per_s"] = sc.initial_inputs.f_solids;
    in["x_in"] = sc.initial_inputs.x_in;
    in["x_out_cmd"] = sc.initial_inputs.x_out_cmd;
    in["mdot_gas_out_kg_per_s"] = sc.initial_inputs.mdot_gas_out;
    in["t_bed_input_K"] = sc.initial_inputs.t_bed_input;
    in["mdot_stack_kg_per_s"] = sc.initial_inputs.mdot_stack;
    in["t_dryer_out_K"] = sc.initial_inputs.t_dryer_out;
    j["initial_inputs"] = in;
    j["events"] = json::array();
    for (const auto& e : sc.events)
        j["events"].push_back({{"t_s", e.t_s}, {"target", to_string(e.target)}, {"value", e.value}});
    return j;
}

inline Scenario scenario_from_json(const json& j) {
    using detail::get_num;
    using detail::reject_unknown_keys;
    reject_unknown_keys(j, {"horizon_s", "step_s", "initial_state", "initial_inputs", "events"},
                        "scenario");
    Scenario sc;
    sc.horizon_s = get_num(j, "horizon_s", sc.horizon_s, "scenario");
    sc.step_s = get_num(j, "step_s", sc.step_s, "scenario");
    if (j.contains("initial_state")) {
        const json& st = j["initial_state"];
        reject_unknown_keys(st, {"m_chamber_kg", "t_chamber_K", "m_windbox_kg", "t_windbox_K",
                                 "m_bedwater_kg", "m_dryergas_kg", "t_dryergas_K",
                                 "m_exhaust_kg", "t_exhaust_K", "p_draft_Pa", "t_bed_K"},
                            "scenario.initial_state");
        PlantState& s = sc.initial_state;
        s.m_chamber = get_num(st, "m_chamber_kg", s.m_chamber, "initial_state");
        s.t_chamber = get_num(st, "t_chamber_K", s.t_chamber, "initial_state");
        s.m_windbox = get_num(st, "m_windbox_kg", s.m_windbox, "initial_state");
        s.t_windbox = get_num(st, "t_windbox_K", s.t_windbox, "initial_state");
        s.m_bedwater = get_num(st, "m_bedwater_kg", s.m_bedwater, "initial_state");
        s.m_dryergas = get_num(st, "m_dryergas_kg", s.m_dryergas, "initial_state");
        s.t_dryergas = get_num(st, "t_dryergas_K", s.t_dryergas, "initial_state");
        s.m_exhaust = get_num(st, "m_exhaust_kg", s.m_exhaust, "initial_state");
        s.t_exhaust = get_num(st, "t_exhaust_K", s.t_exhaust, "initial_state");
        s.p_draft = get_num(st, "p_draft_Pa", s.p_draft, "initial_state");
        if (st.contains("t_bed_K")) s.t_bed = st["t_bed_K"].get<double>();
    }
    if (j.contains("initial_inputs")) {
        const json& in = j["initial_inputs"];
        reject_unknown_keys(in, {"mdot_fuel_kg_per_s", "mdot_air_kg_per_s",
                                 "mdot_chamber_to_windbox_kg_per_s",
                                 "mdot_evap_to_windbox_kg_per_s", "t_air_in_K",
                                 "mdot_windbox_to_dryer_kg_per_s", "t_dryer_in_K",
                                 "f_solids_kg_per_s", "x_in", "x_out_cmd",
                                 "mdot_gas_out_kg_per_s", "t_bed_input_K",
                                 "mdot_stack_kg_per_s", "t_dryer_out_K"},
                            "scenario.initial_inputs");
        ExogenousInputs& u = sc.initial_inputs;
        u.mdot_fuel = get_num(in, "mdot_fuel_kg_per_s", u.mdot_fuel, "initial_inputs");
        u.mdot_air = get_num(in, "mdot_air_kg_per_s", u.mdot_air, "initial_inputs");
        u.mdot_chamber_to_windbox =
            get_num(in, "mdot_chamber_to_windbox_kg_per_s", u.mdot_chamber_to_windbox, "initial_inputs");
        u.mdot_evap_to_windbox =
            get_num(in, "mdot_evap_to_windbox_kg_per_s", u.mdot_evap_to_windbox, "initial_inputs");
        u.t_air_in = get_num(in, "t_air_in_K", u.t_air_in, "initial_inputs");
        u.mdot_windbox_to_dryer =
            get_num(in, "mdot_windbox_to_dryer_kg_per_s", u.mdot_windbox_to_dryer, "initial_inputs");
        u.t_dryer_in = get_num(in, "t_dryer_in_K", u.t_dryer_in, "initial_inputs");
        u.f_solids = get_num(in, "f_solids_kg_per_s", u.f_solids, "initial_inputs");
        u.x_in = get_num(in, "x_in", u.x_in, "initial_inputs");
        u.x_out_cmd = get_num(in, "x_out_cmd", u.x_out_cmd, "initial_inputs");
        u.mdot_gas_out = get_num(in, "mdot_gas_out_kg_per_s", u.mdot_gas_out, "initial_inputs");
        u.t_bed_input = get_num(in, "t_bed_input_K", u.t_bed_input, "initial_inputs");
        u.mdot_stack = get_num(in, "mdot_stack_kg_per_s", u.mdot_stack, "initial_inputs");
        u.t_dryer_out = get_num(in, "t_dryer_out_K", u.t_dryer_out, "initial_inputs");
    }
    if (j.contains("events")) {
        for (const auto& e : j["events"]) {
            reject_unknown_keys(e, {"t_s", "target", "value"}, "scenario.events[]");
            ScenarioEvent ev;
            ev.t_s = e.at("t_s").get<double>();
            ev.target = event_target_from_string(e.at("target").get<std::string>());
            ev.value = e.at("value").get<double>();
            sc.events.push_back(ev);
        }
    }
    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open scenario file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw config_error("malformed scenario JSON in " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// trace CSV
// ---------------------------------------------------------------------------

inline const char* trace_header() {
    return "t,m_chamber,t_chamber,m_windbox,t_windbox,m_bedwater,m_dryergas,t_dryergas,"
           "m_exhaust,t_exhaust,p_draft,x_out,sp_xout,sp_tc,sp_p,f_s,c2,mdot_air,c3,"
           "mdot_stack,eta_d";
}

inline void write_trace_csv(const Trace& trace, std::ostream& os) {
    os << trace_header() << "\n";
    char buf[640];
    for (const auto& r : trace.rows) {
        const PlantState& s = r.state;
        std::snprintf(buf, sizeof(buf),
                      "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                      "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      r.t, s.m_chamber, s.t_chamber, s.m_windbox, s.t_windbox, s.m_bedwater,
                      s.m_dryergas, s.t_dryergas, s.m_exhaust, s.t_exhaust, s.p_draft,
                      r.x_out, r.sp_xout, r.sp_tc, r.sp_p, r.f_s, r.c2, r.mdot_air, r.c3,
                      r.mdot_stack, r.eta_d);
        os << buf;
    }
}

inline void write_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot open trace output file: " + path);
    write_trace_csv(trace, f);
}

inline Trace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw config_error("trace CSV: empty file");
    if (line != trace_header())
        throw config_error("trace CSV: unexpected header");
    Trace trace;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        if (v.size() != 21) throw config_error("trace CSV: wrong column count");
        TraceRow r;
        r.t = v[0];
        r.state.m_chamber = v[1]; r.state.t_chamber = v[2]; r.state.m_windbox = v[3];
        r.state.t_windbox = v[4]; r.state.m_bedwater = v[5]; r.state.m_dryergas = v[6];
        r.state.t_dryergas = v[7]; r.state.m_exhaust = v[8]; r.state.t_exhaust = v[9];
        r.state.p_draft = v[10];
        r.x_out = v[11]; r.sp_xout = v[12]; r.sp_tc = v[13]; r.sp_p = v[14];
        r.f_s = v[15]; r.c2 = v[16]; r.mdot_air = v[17]; r.c3 = v[18];
        r.mdot_stack = v[19]; r.eta_d = v[20];
        trace.rows.push_back(r);
    }
    if (trace.rows.size() > 1) trace.sample_s = trace.rows[1].t - trace.rows[0].t;
    return trace;
}

inline Trace read_trace_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open trace file: " + path);
    return read_trace_csv(f);
}

// ---------------------------------------------------------------------------
// labeled matrix CSV (linear model emission)
// ---------------------------------------------------------------------------

template <typename Mat>
void write_matrix_csv(const Mat& m, const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels, std::ostream& os) {
    os << "state";
    for (const auto& c : col_labels) os << ',' << c;
    os << '\n';
    char buf[64];
    for (int i = 0; i < m.rows(); ++i) {
        os << row_labels[i];
        for (int j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), ",%.12g", m(i, j));
            os << buf;
        }
        os << '\n';
    }
}

struct LabeledMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> row_labels, col_labels;
};

inline LabeledMatrix read_matrix_csv(std::istream& is) {
    LabeledMatrix lm;
    std::string line;
    if (!std::getline(is, line)) throw config_error("matrix CSV: empty file");
    {
        std::stringstream ss(line);
        std::string cell;
        bool first = true;
        while (std::getline(ss, cell, ',')) {
            if (!first) lm.col_labels.push_back(cell);
            first = false;
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        lm.row_labels.push_back(cell);
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != lm.col_labels.size())
            throw config_error("matrix CSV: ragged row");
        rows.push_back(std::move(row));
    }
    lm.values.resize(static_cast<int>(rows.size()), static_cast<int>(lm.col_labels.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            lm.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return lm;
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

inline json fom_to_json(const FoM& f) {
    return {{"ise", f.ise}, {"overshoot_pct", f.overshoot_pct}, {"ess_pct", f.ess_pct}};
}

/// FoM report keyed by loop name, with the reference-magnitude comparison.
/// When an ISE falls outside one order of magnitude of its reference, a
/// deviation note is attached explaining that the reference magnitudes assume
/// tuning constants and integration settings that are not part of this
/// configuration.
inline json fom_report_to_json(const FoMReport& rep, const Trace& trace,
                               const ReferenceFoms* reference = nullptr) {
    json j;
    j["window"] = {{"start_s", rep.window_start}, {"end_s", rep.window_end}};
    j["moisture"] = fom_to_json(rep.moisture);
    j["temperature"] = fom_to_json(rep.temperature);
    j["pressure"] = fom_to_json(rep.pressure);
    json sat = json::array();
    for (const auto& s : trace.saturations)
        sat.push_back({{"t_s", s.t}, {"actuator", s.actuator}, {"engaged", s.engaged}});
    j["saturation_events"] = sat;

    if (reference) {
        json cmp;
        auto compare = [&](const char* name, double ise, double ref) {
            const double ratio = ref > 0.0 ? ise / ref : 0.0;
            json e = {{"ise", ise}, {"reference_ise", ref}, {"ratio", ratio}};
            e["within_order_of_magnitude"] = ratio >= 0.1 && ratio <= 10.0;
            if (!(ratio >= 0.1 && ratio <= 10.0)) {
                e["deviation_note"] =
                    "ISE differs from the reference magnitude by more than one order of "
                    "magnitude; the reference values depend on tuning constants, actuator "
                    "gains and integration settings that are not published, so they are "
                    "reference magnitudes rather than targets.";
            }
            cmp[name] = e;
        };
        compare("moisture", rep.moisture.ise, reference->ise_moisture);
        compare("temperature", rep.temperature.ise, reference->ise_temperature);
        compare("pressure", rep.pressure.ise, reference->ise_pressure);
        j["reference_comparison"] = cmp;
    }
    return j;
}

inline json discrepancy_to_json(const DiscrepancyReport& rep) {
    json j;
    j["tol"] = rep.tol;
    j["count"] = rep.entries.size();
    j["entries"] = json::array();
    for (const auto& e : rep.entries) {
        j["entries"].push_back({{"matrix", std::string(1, e.matrix)},
                                {"row", e.row},
                                {"col", e.col},
                                {"row_label", e.row_label},
                                {"col_label", e.col_label},
                                {"lhs", e.lhs},
                                {"rhs", e.rhs},
                                {"abs_diff", e.abs_diff()}});
    }
    return j;
}

inline json operating_point_to_json(const OperatingPoint& op) {
    json j;
    j["known"] = {{"mdot_fuel_kg_per_s", op.kv.mdot_fuel},
                  {"mdot_air_kg_per_s", op.kv.mdot_air},
                  {"f_solids_kg_per_s", op.kv.f_solids},
                  {"x_in", op.kv.x_in},
                  {"x_out", op.kv.x_out},
                  {"t_air_in_K", op.kv.t_air_in},
                  {"t_dryer_in_K", op.kv.t_dryer_in_ss},
                  {"t_bed_K", op.kv.t_bed_ss},
                  {"t_ambient_K", op.kv.t_ambient}};
    j["unknown"] = {{"mdot_chamber_to_windbox_kg_per_s", op.uv.mdot_chamber_to_windbox},
                    {"mdot_windbox_to_dryer_kg_per_s", op.uv.mdot_windbox_to_dryer},
                    {"mdot_gas_out_kg_per_s", op.uv.mdot_gas_out},
                    {"mdot_stack_kg_per_s", op.uv.mdot_stack},
                    {"t_chamber_K", op.uv.t_chamber},
                    {"t_windbox_K", op.uv.t_windbox},
                    {"t_dryergas_K", op.uv.t_dryergas},
                    {"t_exhaust_K", op.uv.t_exhaust},
                    {"t_dryer_out_K", op.uv.t_dryer_out}};
    json rows = json::array();
    for (int i = 0; i < kNumStates; ++i) rows.push_back(op.residual_rows(i));
    j["residual_rows"] = rows;
    j["residual_norm"] = op.residual_norm;
    return j;
}

inline void write_surface_csv(const SurfaceGrid& g, std::ostream& os) {
    os << g.axis1_name << ',' << g.axis2_name << ",value,degenerate\n";
    char buf[160];
    for (size_t i = 0; i < g.axis1.size(); ++i) {
        for (size_t j = 0; j < g.axis2.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%d\n", g.axis1[i], g.axis2[j],
                          g.degenerate[i][j] ? 0.0 : g.values[i][j],
                          g.degenerate[i][j] ? 1 : 0);
            os << buf;
        }
    }
}

struct SurfacePoint {
    double axis1, axis2, value;
    bool degenerate;
};

struct SurfaceTable {
    std::string axis1_name, axis2_name;
    std::vector<SurfacePoint> points;
};

inline SurfaceTable read_surface_csv(std::istream& is) {
    SurfaceTable t;
    std::string line;
    if (!std::getline(is, line)) throw config_error("surface CSV: empty file");
    {
        std::stringstream ss(line);
        std::string a, b, c, d;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
            !std::getline(ss, c, ',') || !std::getline(ss, d, ',') || c != "value" ||
            d != "degenerate")
            throw config_error("surface CSV: unexpected header");
        t.axis1_name = a;
        t.axis2_name = b;
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        if (v.size() != 4) throw config_error("surface CSV: wrong column count");
        t.points.push_back({v[0], v[1], v[2], v[3] != 0.0});
    }
    return t;
}

// ---------------------------------------------------------------------------
// shipped scenarios
// ---------------------------------------------------------------------------

/// The baseline disturbance schedule: fuel cut at 200 s, hotter dryer inlet at
/// 300 s, wetter feed at 500 s, tighter moisture spec at 600 s, doubled vacuum
/// at 800 s, higher chamber setpoint at 1000 s, over a 2000 s horizon starting
/// from the stock non-equilibrium initial state.
inline Scenario baseline_scenario(const RunConfig& cfg) {
    Scenario sc;
    sc.horizon_s = 2000.0;
    sc.step_s = cfg.integrator_step_s;
    sc.initial_state = PlantState{};          // stock initial inventory and temperatures
    sc.initial_inputs = ExogenousInputs{};    // design-point inputs
    sc.initial_inputs.t_dryer_in = cfg.steady.t_dryer_in_ss;
    sc.initial_inputs.t_air_in = cfg.steady.t_air_in;
    sc.initial_inputs.mdot_fuel = cfg.steady.mdot_fuel;
    sc.initial_inputs.mdot_air = cfg.steady.mdot_air;
    sc.initial_inputs.f_solids = cfg.steady.f_solids;
    sc.initial_inputs.x_in = cfg.steady.x_in;
    sc.initial_inputs.x_out_cmd = cfg.steady.x_out;
    sc.initial_inputs.t_bed_input = cfg.steady.t_bed_ss;
    sc.events = {
        {200.0, EventTarget::fuel_flow, 0.006},
        {300.0, EventTarget::dryer_inlet_temp, 1065.15},
        {500.0, EventTarget::inlet_moisture, 0.23},
        {600.0, EventTarget::moisture_setpoint, 0.04},
        {800.0, EventTarget::pressure_setpoint, -200e3},
        {1000.0, EventTarget::chamber_temp_setpoint, 1273.15},
    };
    return sc;
}

/// Equilibrium check scenario: start exactly at the operating point with
/// moisture-consistent bed water and no events.
inline Scenario equilibrium_scenario(const RunConfig& cfg, const OperatingPoint& op,
                                     double horizon_s = 200.0) {
    Scenario sc;
    sc.horizon_s = horizon_s;
    sc.step_s = cfg.integrator_step_s;
    sc.initial_state = op_state(op, cfg.setpoints.p_draft);
    sc.initial_state.m_bedwater =
        cfg.plant.m_solid * op.kv.x_out / (1.0 - op.kv.x_out);
    sc.initial_inputs = op_inputs(op);
    return sc;
}

/// Undisturbed dry-down scenario for the bed-energy study: stock initial
/// state, no events, loops holding their setpoints over the full horizon.
inline Scenario drydown_scenario(const RunConfig& cfg) {
    Scenario sc = baseline_scenario(cfg);
    sc.events.clear();
    sc.initial_state.t_bed = cfg.steady.t_bed_ss;
    return sc;
}

} // namespace dryerctl
