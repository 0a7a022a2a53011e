// Command-line front end: operating-point solving, linearization, compensator
// tuning, closed-loop scenario runs and efficiency surfaces.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dryerctl/control.hpp"
#include "dryerctl/efficiency.hpp"
#include "dryerctl/errors.hpp"
#include "dryerctl/io.hpp"
#include "dryerctl/linearize.hpp"
#include "dryerctl/loop_design.hpp"
#include "dryerctl/model.hpp"
#include "dryerctl/sim.hpp"
#include "dryerctl/steady.hpp"

namespace fs = std::filesystem;
using namespace dryerctl;

namespace {

std::string out_path(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot open output file: " + path);
    f << j.dump(2) << "\n";
}

json tf_to_json(const RationalTF& tf) {
    json j;
    j["num_ascending"] = tf.num;
    j["den_ascending"] = tf.den;
    json poles = json::array(), zeros = json::array();
    for (const auto& p : tf.poles()) poles.push_back({{"re", p.real()}, {"im", p.imag()}});
    for (const auto& z : tf.zeros()) zeros.push_back({{"re", z.real()}, {"im", z.imag()}});
    j["poles"] = poles;
    j["zeros"] = zeros;
    return j;
}

struct Toolkit {
    RunConfig cfg;
    DerivedConstants consts;
    OperatingPoint op;
    ExogenousInputs inputs_ss;

    explicit Toolkit(const RunConfig& config) : cfg(config) {
        consts = derive_constants(cfg.plant);
        op = make_operating_point(cfg.steady, consts, cfg.masses);
        inputs_ss = op_inputs(op);
    }

    StateSpaceModel jacobian() const {
        return numeric_jacobian(op, inputs_ss, consts, cfg.plant, cfg.variant);
    }

    AlphaCoefficients alphas() const {
        return alpha_coefficients(op, consts, inputs_ss.mdot_evap_to_windbox);
    }

    LoopTuning loop_tuning() const {
        LoopTuning t;
        t.tau_c = cfg.tuning.tau_c_s;
        t.lambda2 = cfg.tuning.lambda2_s;
        t.lambda3 = cfg.tuning.lambda3_s;
        t.filter_order3 = cfg.tuning.filter_order3;
        t.pi_antiwindup = cfg.tuning.pi_antiwindup;
        return t;
    }
};

int cmd_steady(const RunConfig& cfg, const std::string& out_dir) {
    Toolkit tk(cfg);

    const ValidationReport vr = validate_parameters(cfg.plant, tk.inputs_ss);
    for (const auto& w : vr.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& e : vr.errors) std::cerr << "error: " << e << "\n";

    NewtonReport nrep;
    const UnknownVariables root = newton_solve(cfg.steady, tk.consts, tk.op.uv, {}, &nrep);
    const double agreement =
        (root.to_vector() - tk.op.uv.to_vector()).cwiseAbs().maxCoeff() /
        tk.op.uv.to_vector().cwiseAbs().maxCoeff();

    json j = operating_point_to_json(tk.op);
    j["newton_check"] = {{"iterations", nrep.iterations},
                         {"final_norm", nrep.final_norm},
                         {"max_relative_disagreement", agreement}};
    write_json_file(j, out_path(out_dir, "operating_point.json"));

    std::cout << "operating point solved; residual norm " << tk.op.residual_norm << "\n";
    std::cout << "  mdot_chamber_to_windbox = " << tk.op.uv.mdot_chamber_to_windbox << " kg/s\n";
    std::cout << "  mdot_gas_out = mdot_stack = " << tk.op.uv.mdot_gas_out << " kg/s\n";
    std::cout << "  t_chamber = " << tk.op.uv.t_chamber << " K, t_windbox = "
              << tk.op.uv.t_windbox << " K\n";
    std::cout << "  t_dryergas = t_dryer_out = " << tk.op.uv.t_dryergas << " K, t_exhaust = "
              << tk.op.uv.t_exhaust << " K\n";
    std::cout << "  newton agreement " << agreement << " in " << nrep.iterations
              << " iteration(s)\n";
    std::cout << "wrote " << out_path(out_dir, "operating_point.json") << "\n";
    return 0;
}

int cmd_linearize(const RunConfig& cfg, const std::string& out_dir, const std::string& source,
                  double tol) {
    Toolkit tk(cfg);
    const StateSpaceModel jac = tk.jacobian();
    const StateSpaceModel paper = assemble_paper_model(tk.alphas());
    const StateSpaceModel& chosen = source == "paper" ? paper : jac;

    const std::vector<std::string> rows(state_labels().begin(), state_labels().end());
    const std::vector<std::string> cols_a(state_labels().begin(), state_labels().end());
    const std::vector<std::string> cols_b(input_labels().begin(), input_labels().end());
    {
        std::ofstream fa(out_path(out_dir, "A.csv"));
        write_matrix_csv(chosen.A, rows, cols_a, fa);
        std::ofstream fb(out_path(out_dir, "B.csv"));
        write_matrix_csv(chosen.B, rows, cols_b, fb);
    }

    const DiscrepancyReport rep = compare_models(paper, jac, tol);
    write_json_file(discrepancy_to_json(rep), out_path(out_dir, "discrepancy.json"));

    std::cout << "wrote A.csv (10x10) and B.csv (10x14), source = " << source << "\n";
    std::cout << "discrepancy report: " << rep.entries.size()
              << " element(s) differ beyond tol " << tol << "\n";
    for (size_t i = 0; i < rep.entries.size() && i < 8; ++i) {
        const auto& e = rep.entries[i];
        std::cout << "  " << e.matrix << "(" << e.row_label << ", " << e.col_label
                  << "): " << e.lhs << " vs " << e.rhs << "\n";
    }
    if (rep.entries.size() > 8)
        std::cout << "  ... " << rep.entries.size() - 8 << " more in discrepancy.json\n";
    return 0;
}

int cmd_tune(const RunConfig& cfg, const std::string& out_dir, const std::string& loop) {
    Toolkit tk(cfg);
    json j;
    j["loop"] = loop;

    if (loop == "g1") {
        const MoistureLoopModel m = g1_model(tk.op, cfg.plant.m_solid);
        const double tau_c = cfg.tuning.tau_c_s ? *cfg.tuning.tau_c_s : m.tau / 3.0;
        const PIGains g = pi_direct_synthesis(m, tau_c);
        j["model"] = {{"k_x_per_kg", m.k_x}, {"gain", m.gain}, {"tau_s", m.tau}};
        j["tau_c_s"] = tau_c;
        j["pi"] = {{"kc", g.kc}, {"tau_i_s", g.tau_i}};
        j["compensator"] = tf_to_json(pi_tf(g));
    } else if (loop == "g2") {
        const AlphaCoefficients a = tk.alphas();
        double lambda2 = 0.0;
        try {
            const Lambda2Tuning t = lambda2_tuning(a);
            lambda2 = cfg.tuning.lambda2_s ? *cfg.tuning.lambda2_s : t.lambda2;
            j["lambda2_rule"] = {{"omega_n", t.omega_n},
                                 {"t_dom_s", t.t_dom},
                                 {"lambda2_s", t.lambda2}};
            if (t.rhp_floor) j["lambda2_rule"]["rhp_floor_s"] = *t.rhp_floor;
            else j["lambda2_rule"]["rhp_floor_s"] = nullptr;
        } catch (const numeric_error& e) {
            LoopTuning lt;
            lambda2 = cfg.tuning.lambda2_s ? *cfg.tuning.lambda2_s : lt.lambda2_fallback;
            j["lambda2_rule"] = {{"error", e.what()}, {"fallback_lambda2_s", lambda2}};
        }
        j["lambda2_s"] = lambda2;
        j["rhp_zero"] = {{"value", a[12]}, {"is_rhp", a[12] > 0.0}};
        const IMCDesign d = imc_compensator_g2(a, lambda2, cfg.plant.k_air_actuator);
        j["plant"] = tf_to_json(d.plant);
        j["noninvertible"] = tf_to_json(d.noninvertible);
        j["invertible"] = tf_to_json(d.invertible);
        j["compensator"] = tf_to_json(d.compensator);
        j["drive_compensator"] = tf_to_json(d.drive_compensator);
        j["warnings"] = d.warnings;
        const StateSpaceModel jac = tk.jacobian();
        const double l2 = cfg.tuning.lambda2_s ? *cfg.tuning.lambda2_s : LoopTuning{}.lambda2_fallback;
        j["loop_design"] = {{"lambda2_s", l2},
                            {"compensator",
                             tf_to_json(design_temperature_compensator(jac, l2))}};
    } else if (loop == "g3") {
        const AlphaCoefficients a = tk.alphas();
        const double lambda3 =
            cfg.tuning.lambda3_s ? *cfg.tuning.lambda3_s : (a[29] > 0.0 ? 3.0 / a[29] : 12.0);
        j["lambda3_s"] = lambda3;
        const G3Model m = g3_model(a);
        if (m.rhp_zero) j["rhp_zero"] = *m.rhp_zero;
        else j["rhp_zero"] = nullptr;
        const IMCDesign d = imc_compensator_g3(a, lambda3, cfg.tuning.filter_order3);
        j["plant"] = tf_to_json(d.plant);
        j["noninvertible"] = tf_to_json(d.noninvertible);
        j["invertible"] = tf_to_json(d.invertible);
        j["compensator"] = tf_to_json(d.compensator);
        j["warnings"] = d.warnings;
        const StateSpaceModel jac = tk.jacobian();
        j["loop_design"] = {{"lambda3_s", lambda3},
                            {"compensator",
                             tf_to_json(design_pressure_compensator(jac, lambda3))}};
    }

    const std::string path = out_path(out_dir, "tune_" + loop + ".json");
    write_json_file(j, path);
    std::cout << j.dump(2) << "\n";
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir,
                 const std::string& scenario_path, bool no_events, bool bed_energy,
                 bool check_step) {
    Toolkit tk(cfg);

    Scenario sc;
    LoopSetpoints sp = cfg.setpoints;
    if (no_events) {
        sc = equilibrium_scenario(cfg, tk.op);
        sp.x_out = cfg.steady.x_out;
        sp.t_chamber = tk.op.uv.t_chamber;
    } else if (!scenario_path.empty()) {
        sc = load_scenario(scenario_path);
    } else if (!cfg.scenario_path.empty()) {
        sc = load_scenario(cfg.scenario_path);
    } else {
        sc = baseline_scenario(cfg);
    }

    const StateSpaceModel jac = tk.jacobian();
    const DesignedLoops loops = design_loops(tk.op, jac, tk.alphas(), cfg.plant,
                                             tk.loop_tuning(), cfg.setpoints.p_draft);

    ClosedLoopOptions opt;
    opt.variant = cfg.variant;
    opt.bed_energy_augmentation = bed_energy || cfg.simulation.bed_energy_augmentation;
    opt.evaporation_design_rate = cfg.evaporation_design_rate();
    opt.critical_moisture = cfg.simulation.critical_moisture;
    opt.trace_sample_s = cfg.simulation.trace_sample_s;

    const auto t0 = std::chrono::steady_clock::now();
    const Trace trace = closed_loop_simulate(cfg.plant, tk.consts, loops.runtime, sc, sp, opt);
    const auto t1 = std::chrono::steady_clock::now();
    const double wall_s = std::chrono::duration<double>(t1 - t0).count();

    if (check_step) {
        Scenario halved = sc;
        halved.step_s = sc.step_s / 2.0;
        const Trace fine = closed_loop_simulate(cfg.plant, tk.consts, loops.runtime, halved,
                                                sp, opt);
        double worst = 0.0;
        const size_t n = std::min(trace.rows.size(), fine.rows.size());
        for (size_t i = 0; i < n; ++i) {
            const StateVec a = trace.rows[i].state.to_vector();
            const StateVec b = fine.rows[i].state.to_vector();
            for (int j = 0; j < kNumStates; ++j)
                worst = std::max(worst,
                                 std::abs(a(j) - b(j)) / std::max(1.0, std::abs(b(j))));
        }
        if (worst > 1e-3)
            std::cerr << "warning: step halving moves the trajectory by " << worst
                      << " relative; the fixed step may be too coarse for this scenario\n";
        else
            std::cout << "step check: halving the step changes the trajectory by " << worst
                      << " relative\n";
    }

    write_trace_csv(trace, out_path(out_dir, "trace.csv"));
    const FoMReport foms = compute_foms(trace);
    const json jf = fom_report_to_json(foms, trace, &cfg.reference_foms);
    write_json_file(jf, out_path(out_dir, "foms.json"));

    std::cout << "simulated " << sc.horizon_s << " s at step " << sc.step_s << " s in "
              << wall_s << " s wall time\n";
    auto report = [](const char* name, const FoM& f) {
        std::cout << "  " << name << ": ISE " << f.ise << ", ov " << f.overshoot_pct
                  << " %, ess " << f.ess_pct << " %\n";
    };
    report("moisture   ", foms.moisture);
    report("temperature", foms.temperature);
    report("pressure   ", foms.pressure);
    if (!trace.saturations.empty())
        std::cout << "  " << trace.saturations.size() << " actuator saturation transition(s), "
                  << "see foms.json\n";
    std::cout << "wrote " << out_path(out_dir, "trace.csv") << " and "
              << out_path(out_dir, "foms.json") << "\n";
    return 0;
}

int cmd_foms(const RunConfig& cfg, const std::string& out_dir, const std::string& trace_path) {
    const Trace trace = read_trace_csv_file(trace_path);
    const FoMReport rep = compute_foms(trace);
    const json j = fom_report_to_json(rep, trace, &cfg.reference_foms);
    write_json_file(j, out_path(out_dir, "foms.json"));
    std::cout << j.dump(2) << "\n";
    return 0;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    if (n == 1) return {lo};
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1.0));
    return v;
}

int cmd_surface(const RunConfig& cfg, const std::string& out_dir, const std::string& mode_s,
                const std::string& quantity_s, double fixed, int n1, int n2) {
    (void)cfg;
    SurfaceMode mode;
    std::vector<double> a1, a2;
    // default grids span the operating envelope
    if (mode_s == "fix_tamb") {
        mode = SurfaceMode::fix_t_amb;
        a1 = linspace(500.0, 1300.0, n1);
        a2 = linspace(350.0, 900.0, n2);
        if (!(fixed == fixed)) fixed = 293.0;
    } else if (mode_s == "fix_te") {
        mode = SurfaceMode::fix_t_e;
        a1 = linspace(500.0, 1300.0, n1);
        a2 = linspace(263.0, 323.0, n2);
        if (!(fixed == fixed)) fixed = 643.15;
    } else {
        mode = SurfaceMode::fix_t_in;
        a1 = linspace(350.0, 900.0, n1);
        a2 = linspace(263.0, 323.0, n2);
        if (!(fixed == fixed)) fixed = 993.15;
    }
    SurfaceQuantity q;
    if (quantity_s == "eta") q = SurfaceQuantity::eta;
    else if (quantity_s == "deta_dtin") q = SurfaceQuantity::d_eta_d_t_in;
    else q = SurfaceQuantity::d_eta_d_t_e;

    const SurfaceGrid g = surface_sweep(mode, fixed, a1, a2, q);
    const std::string path = out_path(out_dir, "surface_" + quantity_s + ".csv");
    std::ofstream f(path);
    write_surface_csv(g, f);
    std::cout << "wrote " << path << " (" << a1.size() * a2.size() << " cells)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phosphate-pebble rotary dryer: simulation and control design toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", variant_flag;
    app.add_option("--config", config_path, "configuration JSON file");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--variant", variant_flag, "model variant override")
        ->check(CLI::IsMember({"paper", "consistent"}));

    auto* c_steady = app.add_subcommand("steady", "solve and verify the steady operating point");

    auto* c_lin = app.add_subcommand("linearize", "emit the linear model and discrepancy report");
    std::string source = "jacobian";
    c_lin->add_option("--source", source, "which model goes to A.csv/B.csv")
        ->check(CLI::IsMember({"paper", "jacobian"}))->capture_default_str();
    double lin_tol = 1e-6;
    c_lin->add_option("--tol", lin_tol, "discrepancy tolerance")->capture_default_str();

    auto* c_tune = app.add_subcommand("tune", "synthesize one loop compensator");
    std::string loop;
    c_tune->add_option("--loop", loop, "which loop")->required()
        ->check(CLI::IsMember({"g1", "g2", "g3"}));

    auto* c_sim = app.add_subcommand("simulate", "run a closed-loop scenario");
    std::string scenario_path;
    bool no_events = false, bed_energy = false;
    c_sim->add_option("--scenario", scenario_path, "scenario JSON file");
    c_sim->add_flag("--no-events", no_events, "run the equilibrium scenario at the operating point");
    c_sim->add_flag("--bed-energy", bed_energy, "integrate the bed temperature as an extra state");
    bool check_step = false;
    c_sim->add_flag("--check-step", check_step,
                    "rerun at half step and warn when trajectories move by more than 1e-3");

    auto* c_foms = app.add_subcommand("foms", "figures of merit from an existing trace");
    std::string trace_path;
    c_foms->add_option("--trace", trace_path, "trace CSV file")->required();

    auto* c_surf = app.add_subcommand("surface", "efficiency / sensitivity surface sweep");
    std::string mode_s = "fix_tamb", quantity_s = "eta";
    double fixed = std::numeric_limits<double>::quiet_NaN();
    int n1 = 50, n2 = 50;
    c_surf->add_option("--mode", mode_s)->check(CLI::IsMember({"fix_tamb", "fix_te", "fix_tin"}))
        ->capture_default_str();
    c_surf->add_option("--quantity", quantity_s)
        ->check(CLI::IsMember({"eta", "deta_dtin", "deta_dte"}))->capture_default_str();
    c_surf->add_option("--fixed", fixed, "fixed temperature value, K");
    c_surf->add_option("--n1", n1, "axis-1 grid size")->capture_default_str();
    c_surf->add_option("--n2", n2, "axis-2 grid size")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (variant_flag == "paper") cfg.variant = ModelVariant::PaperVerbatim;
        else if (variant_flag == "consistent") cfg.variant = ModelVariant::MassConsistent;
        if (c_steady->parsed()) return cmd_steady(cfg, out_dir);
        if (c_lin->parsed()) return cmd_linearize(cfg, out_dir, source, lin_tol);
        if (c_tune->parsed()) return cmd_tune(cfg, out_dir, loop);
        if (c_sim->parsed())
            return cmd_simulate(cfg, out_dir, scenario_path, no_events, bed_energy, check_step);
        if (c_foms->parsed()) return cmd_foms(cfg, out_dir, trace_path);
        if (c_surf->parsed()) return cmd_surface(cfg, out_dir, mode_s, quantity_s, fixed, n1, n2);
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
