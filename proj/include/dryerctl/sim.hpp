#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dryerctl/control.hpp"
#include "dryerctl/efficiency.hpp"
#include "dryerctl/errors.hpp"
#include "dryerctl/model.hpp"
#include "dryerctl/realize.hpp"
#include "dryerctl/state.hpp"

namespace dryerctl {

// ---------------------------------------------------------------------------
// fixed-step integrator
// ---------------------------------------------------------------------------

enum class IntegrationMethod { rk4 };

struct IntegrationResult {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> x;
};

/// Classic fixed-step RK4 over a generic state vector. Inputs are sampled at
/// the step start and held across the stages, so an input override never acts
/// before its sample time. Aborts on the first non-finite state.
template <typename Rhs, typename InputsFn>
IntegrationResult integrate(Rhs&& rhs, const Eigen::VectorXd& x0, InputsFn&& inputs_fn,
                            double step, double horizon,
                            IntegrationMethod method = IntegrationMethod::rk4) {
    if (!(step > 0.0)) throw config_error("integrate: step must be positive");
    if (!(horizon >= step)) throw config_error("integrate: horizon must be at least one step");
    (void)method; // single method; the parameter pins the contract

    const auto n_steps = static_cast<long>(std::llround(horizon / step));
    IntegrationResult out;
    out.t.reserve(n_steps + 1);
    out.x.reserve(n_steps + 1);

    Eigen::VectorXd x = x0;
    out.t.push_back(0.0);
    out.x.push_back(x);
    for (long k = 0; k < n_steps; ++k) {
        const double t = k * step;
        const auto u = inputs_fn(t);
        const Eigen::VectorXd k1 = rhs(x, u);
        const Eigen::VectorXd k2 = rhs(x + 0.5 * step * k1, u);
        const Eigen::VectorXd k3 = rhs(x + 0.5 * step * k2, u);
        const Eigen::VectorXd k4 = rhs(x + step * k3, u);
        x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite())
            throw numeric_error("integrate: non-finite state at t = " +
                                std::to_string((k + 1) * step) + " s (integration blow-up)");
        out.t.push_back((k + 1) * step);
        out.x.push_back(x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// scenario
// ---------------------------------------------------------------------------

enum class EventTarget {
    fuel_flow,
    dryer_inlet_temp,
    inlet_moisture,
    moisture_setpoint,
    pressure_setpoint,
    chamber_temp_setpoint
};

struct ScenarioEvent {
    double t_s = 0.0;
    EventTarget target = EventTarget::fuel_flow;
    double value = 0.0; ///< SI units of the target
};

struct Scenario {
    double horizon_s = 2000.0;
    double step_s = 0.01;
    PlantState initial_state;
    ExogenousInputs initial_inputs;
    std::vector<ScenarioEvent> events;

    void validate() const {
        if (!(step_s > 0.0)) throw config_error("scenario: step_s must be positive");
        if (!(horizon_s >= step_s)) throw config_error("scenario: horizon shorter than one step");
        double last = 0.0;
        for (const auto& e : events) {
            if (e.t_s < 0.0 || e.t_s > horizon_s)
                throw config_error("scenario: event time outside [0, horizon]");
            if (e.t_s < last) throw config_error("scenario: event times must be nondecreasing");
            last = e.t_s;
        }
    }
};

struct LoopSetpoints {
    double x_out = 0.08;
    double t_chamber = 1073.15;
    double p_draft = -100e3;
};

// ---------------------------------------------------------------------------
// closed-loop engine
// ---------------------------------------------------------------------------

/// Realized compensators plus the operating-point biases the drive signals sit
/// on. Continuous designs are discretized inside the simulation at the
/// scenario step.
struct LoopCompensators {
    PIGains moisture_pi;
    double f_solids_bias = 2.5;
    Realization temperature; ///< drive form, outputs c2 increments
    double c2_bias = 5.0;
    Realization pressure;    ///< drive form, outputs c3 increments
    double c3_bias = 0.0;
    double k_air_actuator = 0.05;
    double k_fan = 0.03;
    double p_draft_ss = -100e3; ///< sets the fan gain
    bool pi_antiwindup = false;
    double pi_tracking_time_s = 0.0; ///< back-calculation time constant; 0 means tau_I
};

struct ClosedLoopOptions {
    ModelVariant variant = ModelVariant::PaperVerbatim;
    bool bed_energy_augmentation = false;
    /// Water removal rate the thermal side sustains at the design point, kg/s.
    double evaporation_design_rate = 0.25;
    /// Wet-basis moisture below which the removal rate falls off linearly
    /// (falling-rate regime); used only with the bed-energy augmentation.
    double critical_moisture = 0.10;
    double trace_sample_s = 0.1;
};

struct TraceRow {
    double t = 0.0;
    PlantState state;
    double x_out = 0.0;
    double sp_xout = 0.0, sp_tc = 0.0, sp_p = 0.0;
    double f_s = 0.0, c2 = 0.0, mdot_air = 0.0, c3 = 0.0, mdot_stack = 0.0;
    double eta_d = 0.0;
};

struct SaturationEvent {
    double t = 0.0;
    std::string actuator;
    bool engaged = false; ///< transition direction
};

struct Trace {
    double sample_s = 0.1;
    std::vector<TraceRow> rows;
    std::vector<SaturationEvent> saturations;
};

namespace detail {

struct PIState {
    double integral = 0.0;
};

inline double pi_step(const PIGains& g, PIState& s, double error, double bias, double h,
                      bool antiwindup, double tracking_time, bool* saturated) {
    const double raw = bias + g.kc * (error + s.integral / g.tau_i);
    double out = raw;
    *saturated = false;
    if (out < 0.0) {
        out = 0.0;
        *saturated = true;
    }
    s.integral += error * h;
    if (antiwindup && *saturated) {
        const double tt = tracking_time > 0.0 ? tracking_time : g.tau_i;
        s.integral += (h / tt) * (out - raw) * (g.tau_i / g.kc);
    }
    return out;
}

inline void note_saturation(Trace& trace, double t, const char* actuator, bool now,
                            bool& previous) {
    if (now != previous) {
        trace.saturations.push_back({t, actuator, now});
        previous = now;
    }
}

} // namespace detail

/// Integrates the plant under the three feedback loops and the scripted
/// disturbance schedule.
///
/// Flow closures applied every step: the chamber outflow follows the fuel and
/// air feed, the windbox passes it through, the dryer gas outflow carries the
/// evaporated water, and the exhaust receives gas at the dryer gas
/// temperature. The outlet-moisture input channel carries the measured bed
/// moisture (the well-mixed closure X_out = M_w/(M_s + M_w)).
///
/// The evaporation rate E is sustained by the thermal side independently of
/// the instantaneous feed: E is the design rate, falling off linearly below
/// the critical moisture when the bed-energy augmentation is on. The balance
/// rows that couple the feed to the vapor release are corrected from the
/// feed-borne net water F_s (X_in - X_out) to E; the corrections vanish
/// identically at the operating point, where the two rates coincide.
inline Trace closed_loop_simulate(const PlantParameters& params, const DerivedConstants& consts,
                                  const LoopCompensators& comps, const Scenario& scenario,
                                  const LoopSetpoints& initial_setpoints,
                                  const ClosedLoopOptions& options = {}) {
    scenario.validate();
    const double h = scenario.step_s;
    const auto n_steps = static_cast<long>(std::llround(scenario.horizon_s / h));
    const long decim = std::max<long>(1, std::llround(options.trace_sample_s / h));

    PlantState state = scenario.initial_state;
    const bool augmented = options.bed_energy_augmentation;
    if (augmented && !state.t_bed) state.t_bed = scenario.initial_inputs.t_bed_input;
    if (!augmented) state.t_bed.reset();

    ExogenousInputs base = scenario.initial_inputs;
    LoopSetpoints sp = initial_setpoints;

    detail::PIState pi_state;
    DiscreteFilter gc2(comps.temperature, h);
    DiscreteFilter gc3(comps.pressure, h);
    const double fan = fan_gain(comps.k_fan, comps.p_draft_ss);

    Trace trace;
    trace.sample_s = decim * h;
    trace.rows.reserve(static_cast<size_t>(n_steps / decim) + 2);
    bool sat_feed = false, sat_air = false, sat_stack = false;

    size_t next_event = 0;
    auto events = scenario.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.t_s < b.t_s; });

    for (long k = 0; k <= n_steps; ++k) {
        const double t = k * h;

        // overrides take effect at the first sample >= event time, never before
        while (next_event < events.size() && events[next_event].t_s <= t + 1e-12 * h) {
            const auto& e = events[next_event++];
            switch (e.target) {
                case EventTarget::fuel_flow: base.mdot_fuel = e.value; break;
                case EventTarget::dryer_inlet_temp: base.t_dryer_in = e.value; break;
                case EventTarget::inlet_moisture: base.x_in = e.value; break;
                case EventTarget::moisture_setpoint: sp.x_out = e.value; break;
                case EventTarget::pressure_setpoint: sp.p_draft = e.value; break;
                case EventTarget::chamber_temp_setpoint: sp.t_chamber = e.value; break;
            }
        }

        const double x_out_meas = outlet_moisture(state.m_bedwater, params.m_solid);

        bool pi_sat = false;
        const double f_s = detail::pi_step(comps.moisture_pi, pi_state, sp.x_out - x_out_meas,
                                           comps.f_solids_bias, h, comps.pi_antiwindup,
                                           comps.pi_tracking_time_s, &pi_sat);
        const double c2 = comps.c2_bias + gc2.step(sp.t_chamber - state.t_chamber);
        const ActuatorOutput air = air_actuator(c2, comps.k_air_actuator);
        const double c3 = comps.c3_bias + gc3.step(sp.p_draft - state.p_draft);
        const double stack_raw = fan * c3;
        const ActuatorOutput stack{std::max(0.0, stack_raw), stack_raw < 0.0};

        detail::note_saturation(trace, t, "f_solids", pi_sat, sat_feed);
        detail::note_saturation(trace, t, "mdot_air", air.saturated, sat_air);
        detail::note_saturation(trace, t, "mdot_stack", stack.saturated, sat_stack);

        ExogenousInputs u = base;
        u.f_solids = f_s;
        u.mdot_air = air.flow;
        u.mdot_stack = stack.flow;
        u.mdot_chamber_to_windbox = u.mdot_fuel + u.mdot_air;
        u.mdot_windbox_to_dryer = u.mdot_chamber_to_windbox;

        double evap = options.evaporation_design_rate;
        if (augmented && x_out_meas < options.critical_moisture)
            evap *= std::max(0.0, x_out_meas) / options.critical_moisture;
        // a near-empty bed cannot sustain the rate (inventory per second)
        evap = std::min(evap, std::max(0.0, state.m_bedwater));
        u.x_out_cmd = x_out_meas;
        u.mdot_gas_out = evap;
        if (options.variant == ModelVariant::MassConsistent)
            u.mdot_gas_out += u.mdot_windbox_to_dryer;
        u.t_dryer_out = state.t_dryergas;
        if (augmented) u.t_bed_input = *state.t_bed;

        if (k % decim == 0 || k == n_steps) {
            TraceRow row;
            row.t = t;
            row.state = state;
            row.x_out = x_out_meas;
            row.sp_xout = sp.x_out;
            row.sp_tc = sp.t_chamber;
            row.sp_p = sp.p_draft;
            row.f_s = f_s;
            row.c2 = c2;
            row.mdot_air = air.flow;
            row.c3 = c3;
            row.mdot_stack = stack.flow;
            row.eta_d = efficiency_simplified(u.t_dryer_in, state.t_exhaust, params.t_ambient);
            trace.rows.push_back(row);
        }
        if (k == n_steps) break;

        // one RK4 step with the inputs held; the outlet-moisture channel rides
        // the instantaneous bed moisture, and the vapor-coupled rows are
        // corrected from the feed-borne net water to the sustained rate
        auto plant_rhs = [&](const PlantState& x) {
            ExogenousInputs uu = u;
            const double moisture = outlet_moisture(x.m_bedwater, params.m_solid);
            uu.x_out_cmd = moisture;
            StateDerivative d = nonlinear_rhs(x, uu, consts, options.variant, params.t_ambient);
            const double feed_net = uu.f_solids * (uu.x_in - moisture);
            d.dm_bedwater = feed_net - evap;
            d.dm_dryergas += evap - feed_net;
            d.dt_dryergas -= (evap - feed_net) * x.t_dryergas / x.m_dryergas;
            return d;
        };
        auto advance = [&](const PlantState& x, double scale, const StateDerivative& d,
                           double dtb) {
            PlantState y = x;
            const StateVec v = x.to_vector() + scale * d.to_vector();
            y = PlantState::from_vector(v);
            if (augmented) y.t_bed = *x.t_bed + scale * dtb;
            return y;
        };

        auto bed_rhs = [&](const PlantState& x) {
            if (!augmented) return 0.0;
            ExogenousInputs uu = u;
            uu.x_out_cmd = outlet_moisture(x.m_bedwater, params.m_solid);
            return bed_energy_rhs(x, uu, params, evap);
        };

        const StateDerivative d1 = plant_rhs(state);
        const double b1 = bed_rhs(state);
        const PlantState s2 = advance(state, 0.5 * h, d1, b1);
        const StateDerivative d2 = plant_rhs(s2);
        const double b2 = bed_rhs(s2);
        const PlantState s3 = advance(state, 0.5 * h, d2, b2);
        const StateDerivative d3 = plant_rhs(s3);
        const double b3 = bed_rhs(s3);
        const PlantState s4 = advance(state, h, d3, b3);
        const StateDerivative d4 = plant_rhs(s4);
        const double b4 = bed_rhs(s4);

        const StateVec xnext = state.to_vector() +
                               (h / 6.0) * (d1.to_vector() + 2.0 * d2.to_vector() +
                                            2.0 * d3.to_vector() + d4.to_vector());
        PlantState next = PlantState::from_vector(xnext);
        if (augmented) next.t_bed = *state.t_bed + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        if (!xnext.allFinite() || (augmented && !std::isfinite(*next.t_bed)))
            throw numeric_error("closed_loop_simulate: non-finite state at t = " +
                                std::to_string(t + h) + " s (integration blow-up)");
        state = next;
    }
    return trace;
}

// ---------------------------------------------------------------------------
// figures of merit
// ---------------------------------------------------------------------------

struct FoM {
    double ise = 0.0;           ///< squared-error integral over the window
    double overshoot_pct = 0.0; ///< max across setpoint-step events
    double ess_pct = 0.0;       ///< mean error over the final 5%, relative
};

/// ISE, percent overshoot and steady-state error for one channel. Overshoot is
/// measured per setpoint-step event as the excursion beyond the new setpoint
/// in the step direction, normalized by the step magnitude. The steady-state
/// error averages the final 5% of the window against the final setpoint.
inline FoM compute_channel_fom(const std::vector<double>& t, const std::vector<double>& y,
                               const std::vector<double>& sp, double window_start,
                               double window_end) {
    if (t.size() != y.size() || t.size() != sp.size() || t.empty())
        throw config_error("compute_channel_fom: inconsistent series lengths");
    if (!(window_end > window_start))
        throw config_error("compute_channel_fom: zero-length window");

    FoM fom;
    size_t i0 = 0, i1 = t.size() - 1;
    while (i0 < t.size() && t[i0] < window_start) ++i0;
    while (i1 > 0 && t[i1] > window_end) --i1;
    if (i1 <= i0) throw config_error("compute_channel_fom: window contains no samples");

    for (size_t i = i0; i < i1; ++i) {
        const double e0 = sp[i] - y[i], e1 = sp[i + 1] - y[i + 1];
        fom.ise += 0.5 * (e0 * e0 + e1 * e1) * (t[i + 1] - t[i]);
    }

    // setpoint-step events inside the window
    for (size_t i = i0 + 1; i <= i1; ++i) {
        if (sp[i] == sp[i - 1]) continue;
        const double step = sp[i] - sp[i - 1];
        const double target = sp[i];
        size_t end = i1;
        for (size_t j = i + 1; j <= i1; ++j) {
            if (sp[j] != sp[i]) { end = j - 1; break; }
        }
        double worst = 0.0;
        for (size_t j = i; j <= end; ++j) {
            const double beyond = (y[j] - target) * (step > 0.0 ? 1.0 : -1.0);
            worst = std::max(worst, beyond);
        }
        fom.overshoot_pct = std::max(fom.overshoot_pct, 100.0 * worst / std::abs(step));
    }

    // steady-state error over the final 5% of the window
    const double tail_start = window_end - 0.05 * (window_end - window_start);
    double acc = 0.0;
    size_t count = 0;
    double last_step = 0.0;
    for (size_t i = i0 + 1; i <= i1; ++i)
        if (sp[i] != sp[i - 1]) last_step = sp[i] - sp[i - 1];
    for (size_t i = i0; i <= i1; ++i) {
        if (t[i] < tail_start) continue;
        acc += std::abs(sp[i] - y[i]);
        ++count;
    }
    const double mean_err = count ? acc / count : 0.0;
    const double final_sp = sp[i1];
    const double denom = final_sp != 0.0 ? std::abs(final_sp)
                                         : (last_step != 0.0 ? std::abs(last_step) : 1.0);
    fom.ess_pct = 100.0 * mean_err / denom;
    return fom;
}

struct FoMReport {
    FoM moisture, temperature, pressure;
    double window_start = 0.0, window_end = 0.0;
};

inline FoMReport compute_foms(const Trace& trace, double window_start, double window_end) {
    std::vector<double> t, xo, sxo, tc, stc, p, spp;
    t.reserve(trace.rows.size());
    for (const auto& r : trace.rows) {
        t.push_back(r.t);
        xo.push_back(r.x_out);   sxo.push_back(r.sp_xout);
        tc.push_back(r.state.t_chamber); stc.push_back(r.sp_tc);
        p.push_back(r.state.p_draft);    spp.push_back(r.sp_p);
    }
    FoMReport rep;
    rep.window_start = window_start;
    rep.window_end = window_end;
    rep.moisture = compute_channel_fom(t, xo, sxo, window_start, window_end);
    rep.temperature = compute_channel_fom(t, tc, stc, window_start, window_end);
    rep.pressure = compute_channel_fom(t, p, spp, window_start, window_end);
    return rep;
}

inline FoMReport compute_foms(const Trace& trace) {
    if (trace.rows.empty()) throw config_error("compute_foms: empty trace");
    return compute_foms(trace, trace.rows.front().t, trace.rows.back().t);
}

} // namespace dryerctl
