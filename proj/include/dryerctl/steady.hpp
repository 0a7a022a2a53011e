#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "dryerctl/errors.hpp"
#include "dryerctl/model.hpp"
#include "dryerctl/params.hpp"
#include "dryerctl/state.hpp"

namespace dryerctl {

/// Imposed quantities of the steady-state problem plus the boundary values the
/// algebraic system needs.
struct KnownVariables {
    double mdot_fuel = 0.012;
    double mdot_air = 0.25;
    double f_solids = 2.5;
    double x_in = 0.15;
    double x_out = 0.05;
    double t_air_in = 298.0;
    double t_dryer_in_ss = 993.15;
    double t_bed_ss = 643.15;
    double t_ambient = 293.0;
};

/// The nine steady-state unknowns.
struct UnknownVariables {
    double mdot_chamber_to_windbox = 0.0;
    double mdot_windbox_to_dryer = 0.0;
    double mdot_gas_out = 0.0;
    double mdot_stack = 0.0;
    double t_chamber = 0.0;
    double t_windbox = 0.0;
    double t_dryergas = 0.0;
    double t_exhaust = 0.0;
    double t_dryer_out = 0.0;

    Eigen::Matrix<double, 9, 1> to_vector() const {
        Eigen::Matrix<double, 9, 1> v;
        v << mdot_chamber_to_windbox, mdot_windbox_to_dryer, mdot_gas_out, mdot_stack,
             t_chamber, t_windbox, t_dryergas, t_exhaust, t_dryer_out;
        return v;
    }

    static UnknownVariables from_vector(const Eigen::Matrix<double, 9, 1>& v) {
        UnknownVariables u;
        u.mdot_chamber_to_windbox = v(0); u.mdot_windbox_to_dryer = v(1);
        u.mdot_gas_out = v(2); u.mdot_stack = v(3); u.t_chamber = v(4);
        u.t_windbox = v(5); u.t_dryergas = v(6); u.t_exhaust = v(7);
        u.t_dryer_out = v(8);
        return u;
    }
};

/// Steady gas inventories. These are not determined by the algebraic system
/// (the mass rows only constrain flows); they are configuration.
struct SteadyMasses {
    double m_chamber = 1.0;
    double m_windbox = 1.0;
    double m_dryergas = 2.0;
    double m_exhaust = 2.0;
    double m_bedwater = 110.0;
};

struct OperatingPoint {
    KnownVariables kv;
    UnknownVariables uv;
    SteadyMasses masses;
    StateVec residual_rows = StateVec::Zero();
    double residual_norm = 0.0; ///< scaled max over the rows in the convergence set
};

namespace detail {

/// One steady-state balance row as its additive terms; the residual is their
/// sum, the scale is the largest magnitude among them.
struct RowTerms {
    double sum = 0.0;
    double scale = 1.0;

    void add(double term) {
        sum += term;
        scale = std::max(scale, std::abs(term));
    }
};

} // namespace detail

/// The ten steady-state rows evaluated at an operating point, in state order.
/// Row 5 is the bed-water row F_s*(X_in - X_out); at any drying point it equals
/// the evaporation rate, not zero, and is excluded from the convergence norm
/// unless requested.
struct SteadyResiduals {
    StateVec rows = StateVec::Zero();
    StateVec scales = StateVec::Ones();

    double scaled_norm(bool include_bed_water_row = false) const {
        double norm = 0.0;
        for (int i = 0; i < kNumStates; ++i) {
            if (i == 4 && !include_bed_water_row) continue;
            norm = std::max(norm, std::abs(rows(i)) / scales(i));
        }
        return norm;
    }
};

inline SteadyResiduals steady_residuals(const KnownVariables& kv, const UnknownVariables& uv,
                                        const DerivedConstants& k) {
    using detail::RowTerms;
    const double mf = kv.mdot_fuel, ma = kv.mdot_air, fs = kv.f_solids;
    const double xin = kv.x_in, xout = kv.x_out, ta = kv.t_air_in;
    const double tdin = kv.t_dryer_in_ss, ts = kv.t_bed_ss, tamb = kv.t_ambient;
    const double mcw = uv.mdot_chamber_to_windbox, mwd = uv.mdot_windbox_to_dryer;
    const double mgo = uv.mdot_gas_out, mstk = uv.mdot_stack;
    const double tc = uv.t_chamber, tw = uv.t_windbox, tg = uv.t_dryergas;
    const double te = uv.t_exhaust, tdout = uv.t_dryer_out;

    std::array<RowTerms, kNumStates> rows{};

    rows[0].add(mf); rows[0].add(ma); rows[0].add(-mcw);

    rows[1].add(k.k12 * mf); rows[1].add(-mf * tc); rows[1].add(k.k22 * ma * (ta - tc));
    rows[1].add(-ma * tc); rows[1].add(-mcw * (tc - tw));

    rows[2].add(mcw); rows[2].add(-mwd);

    rows[3].add(k.k14 * mcw * (tc - tw)); rows[3].add(-k.k24 * mcw * tw);
    rows[3].add(-k.k34 * mwd * (tw - tdin)); rows[3].add(mwd * tw);

    rows[4].add(fs * (xin - xout));

    rows[5].add(fs * (xin - xout)); rows[5].add(-mgo);

    rows[6].add(mwd * (tw - tg)); rows[6].add(-fs * (xin - xout) * tg);
    rows[6].add(-mgo * (tg - te)); rows[6].add(mgo * tg); rows[6].add(-k.k17 * (tg - ts));

    rows[7].add(mgo); rows[7].add(-mstk);

    rows[8].add(mgo * (tdout - te)); rows[8].add(-mgo * te); rows[8].add(-mstk * (te - tamb));
    rows[8].add(mstk * te); rows[8].add(-mstk * (te - tamb)); rows[8].add(-k.k18 * (tdout - tamb));

    // pressure row: ideal-gas coupling of the exhaust mass and energy rows
    rows[9].add(k.k19 * te * rows[7].sum);
    rows[9].add(k.k19 * rows[8].sum);
    rows[9].scale = std::max(1.0, k.k19 * std::max(std::abs(te) * rows[7].scale, rows[8].scale));

    SteadyResiduals r;
    for (int i = 0; i < kNumStates; ++i) {
        r.rows(i) = rows[i].sum;
        r.scales(i) = rows[i].scale;
    }
    return r;
}

/// Closed-form operating point: the flow chain is immediate, the chamber and
/// windbox temperatures solve a 2x2 linear system, and the dryer-gas, exhaust
/// and dryer-outlet temperatures close through T_dryer_out = T_dryergas.
inline UnknownVariables closed_form_op(const KnownVariables& kv, const DerivedConstants& k) {
    UnknownVariables uv;
    const double mf = kv.mdot_fuel, ma = kv.mdot_air;

    uv.mdot_chamber_to_windbox = mf + ma;
    uv.mdot_windbox_to_dryer = uv.mdot_chamber_to_windbox;
    uv.mdot_gas_out = kv.f_solids * (kv.x_in - kv.x_out);
    uv.mdot_stack = uv.mdot_gas_out;

    const double mcw = uv.mdot_chamber_to_windbox;
    const double mwd = uv.mdot_windbox_to_dryer;
    const double mgo = uv.mdot_gas_out;
    const double mstk = uv.mdot_stack;

    // chamber/windbox energy rows as [a1 -b1; a2 -b2] [Tc; Tw] = [r1; r2]
    const double a1 = mf + k.k22 * ma + ma + mcw;
    const double b1 = mcw;
    const double r1 = k.k12 * mf + k.k22 * ma * kv.t_air_in;
    const double a2 = k.k14 * mcw;
    const double b2 = k.k14 * mcw + k.k24 * mcw;
    const double r2 = -k.k34 * mwd * kv.t_dryer_in_ss;

    const double det = -a1 * b2 + b1 * a2;
    if (std::abs(det) < 1e-14 * std::max(1.0, std::abs(a1 * b2)))
        throw numeric_error("closed_form_op: zero denominator in the chamber/windbox "
                            "temperature system (degenerate fuel and air flows)");
    uv.t_chamber = (r1 * (-b2) + b1 * r2) / det;
    uv.t_windbox = (a1 * r2 - a2 * r1) / det;

    // exhaust row gives T_exhaust as a function of T_dryer_out; the dryer-gas
    // row then closes on T_dryergas with T_dryer_out = T_dryergas
    const double te_den = 2.0 * mgo + mstk;
    if (std::abs(te_den) < 1e-14)
        throw numeric_error("closed_form_op: zero denominator in the exhaust temperature "
                            "quotient (no steady evaporation flow)");
    const double te_slope = (mgo - k.k18) / te_den;
    const double te_const = (2.0 * mstk * kv.t_ambient + k.k18 * kv.t_ambient) / te_den;

    const double tg_den = (mwd + mgo + k.k17) - mgo * te_slope;
    if (std::abs(tg_den) < 1e-14)
        throw numeric_error("closed_form_op: zero denominator in the dryer-gas temperature "
                            "quotient");
    uv.t_dryergas = (mwd * uv.t_windbox + k.k17 * kv.t_bed_ss + mgo * te_const) / tg_den;
    uv.t_dryer_out = uv.t_dryergas;
    uv.t_exhaust = te_slope * uv.t_dryer_out + te_const;
    return uv;
}

/// Full operating point with residual bookkeeping.
inline OperatingPoint make_operating_point(const KnownVariables& kv, const DerivedConstants& k,
                                           const SteadyMasses& masses = {}) {
    OperatingPoint op;
    op.kv = kv;
    op.masses = masses;
    op.uv = closed_form_op(kv, k);
    const SteadyResiduals r = steady_residuals(kv, op.uv, k);
    op.residual_rows = r.rows;
    op.residual_norm = r.scaled_norm();
    return op;
}

/// Inputs consistent with an operating point, for linearization and simulation.
inline ExogenousInputs op_inputs(const OperatingPoint& op, double mdot_evap_to_windbox = 0.2) {
    ExogenousInputs u;
    u.mdot_fuel = op.kv.mdot_fuel;
    u.mdot_air = op.kv.mdot_air;
    u.mdot_chamber_to_windbox = op.uv.mdot_chamber_to_windbox;
    u.mdot_evap_to_windbox = mdot_evap_to_windbox;
    u.t_air_in = op.kv.t_air_in;
    u.mdot_windbox_to_dryer = op.uv.mdot_windbox_to_dryer;
    u.t_dryer_in = op.kv.t_dryer_in_ss;
    u.f_solids = op.kv.f_solids;
    u.x_in = op.kv.x_in;
    u.x_out_cmd = op.kv.x_out;
    u.mdot_gas_out = op.uv.mdot_gas_out;
    u.t_bed_input = op.kv.t_bed_ss;
    u.mdot_stack = op.uv.mdot_stack;
    u.t_dryer_out = op.uv.t_dryer_out;
    return u;
}

/// Plant state at an operating point. The draft pressure is not constrained by
/// the steady system; callers supply the held vacuum level.
inline PlantState op_state(const OperatingPoint& op, double p_draft = -100e3) {
    PlantState s;
    s.m_chamber = op.masses.m_chamber;
    s.t_chamber = op.uv.t_chamber;
    s.m_windbox = op.masses.m_windbox;
    s.t_windbox = op.uv.t_windbox;
    s.m_bedwater = op.masses.m_bedwater;
    s.m_dryergas = op.masses.m_dryergas;
    s.t_dryergas = op.uv.t_dryergas;
    s.m_exhaust = op.masses.m_exhaust;
    s.t_exhaust = op.uv.t_exhaust;
    s.p_draft = p_draft;
    return s;
}

struct NewtonOptions {
    double tol = 1e-10;     ///< scaled residual norm target
    int max_iter = 50;
    int max_backtrack = 30;
    double fd_step = 1e-7;  ///< relative finite-difference step
};

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    double final_norm = 0.0;
    double condition_estimate = 0.0; ///< |max pivot| / |min pivot| of the last Jacobian
};

namespace detail {

/// Newton system: the eight balance rows that constrain the unknowns plus the
/// dryer-outlet closure T_dryer_out = T_dryergas. The bed-water row and the
/// pressure row are omitted (the first is the evaporation closure, the second
/// is a linear combination of the exhaust rows).
inline Eigen::Matrix<double, 9, 1> newton_equations(const KnownVariables& kv,
                                                    const UnknownVariables& uv,
                                                    const DerivedConstants& k) {
    const SteadyResiduals r = steady_residuals(kv, uv, k);
    Eigen::Matrix<double, 9, 1> f;
    f << r.rows(0), r.rows(1), r.rows(2), r.rows(3), r.rows(5), r.rows(6), r.rows(7),
         r.rows(8), uv.t_dryergas - uv.t_dryer_out;
    return f;
}

inline double newton_norm(const KnownVariables& kv, const UnknownVariables& uv,
                          const DerivedConstants& k) {
    const SteadyResiduals r = steady_residuals(kv, uv, k);
    double norm = r.scaled_norm();
    norm = std::max(norm, std::abs(uv.t_dryergas - uv.t_dryer_out) /
                              std::max(1.0, std::abs(uv.t_dryergas)));
    return norm;
}

} // namespace detail

/// Damped Newton root-finder on the steady-state system, the independent
/// numerical oracle for the closed form. Finite-difference Jacobian, LU solve,
/// simple backtracking on residual-norm increase.
inline UnknownVariables newton_solve(const KnownVariables& kv, const DerivedConstants& k,
                                     const UnknownVariables& guess,
                                     const NewtonOptions& opt = {},
                                     NewtonReport* report = nullptr) {
    using Vec9 = Eigen::Matrix<double, 9, 1>;
    using Mat9 = Eigen::Matrix<double, 9, 9>;

    if (!(opt.tol > 0.0)) throw config_error("newton_solve: tol must be positive");
    Vec9 x = guess.to_vector();
    if (!x.allFinite()) throw config_error("newton_solve: guess must be finite");

    NewtonReport rep;
    double norm = detail::newton_norm(kv, UnknownVariables::from_vector(x), k);

    for (int it = 0; it < opt.max_iter && norm >= opt.tol; ++it) {
        const Vec9 f0 = detail::newton_equations(kv, UnknownVariables::from_vector(x), k);

        Mat9 jac;
        for (int j = 0; j < 9; ++j) {
            const double h = opt.fd_step * std::max(1.0, std::abs(x(j)));
            Vec9 xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            const Vec9 fp = detail::newton_equations(kv, UnknownVariables::from_vector(xp), k);
            const Vec9 fm = detail::newton_equations(kv, UnknownVariables::from_vector(xm), k);
            jac.col(j) = (fp - fm) / (2.0 * h);
        }

        Eigen::FullPivLU<Mat9> lu(jac);
        const auto& lumat = lu.matrixLU();
        double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 9; ++i) {
            const double piv = std::abs(lumat(i, i));
            pmax = std::max(pmax, piv);
            pmin = std::min(pmin, piv);
        }
        rep.condition_estimate = pmin > 0.0 ? pmax / pmin : std::numeric_limits<double>::infinity();
        if (!lu.isInvertible()) {
            rep.final_norm = norm;
            if (report) *report = rep;
            throw numeric_error("newton_solve: singular Jacobian, pivot ratio estimate " +
                                std::to_string(rep.condition_estimate));
        }

        const Vec9 step = lu.solve(-f0);
        double lambda = 1.0;
        Vec9 x_next = x + step;
        double norm_next = detail::newton_norm(kv, UnknownVariables::from_vector(x_next), k);
        for (int bt = 0; bt < opt.max_backtrack && !(norm_next < norm); ++bt) {
            lambda *= 0.5;
            x_next = x + lambda * step;
            norm_next = detail::newton_norm(kv, UnknownVariables::from_vector(x_next), k);
        }
        if (!(norm_next < norm)) {
            rep.final_norm = norm;
            rep.iterations = it;
            if (report) *report = rep;
            throw numeric_error("newton_solve: no residual decrease after backtracking, "
                                "last scaled norm " + std::to_string(norm));
        }
        x = x_next;
        norm = norm_next;
        rep.iterations = it + 1;
    }

    rep.converged = norm < opt.tol;
    rep.final_norm = norm;
    if (report) *report = rep;
    if (!rep.converged)
        throw numeric_error("newton_solve: not converged in " + std::to_string(opt.max_iter) +
                            " iterations, last scaled norm " + std::to_string(norm));
    return UnknownVariables::from_vector(x);
}

} // namespace dryerctl
