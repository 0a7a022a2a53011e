#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dryerctl/errors.hpp"
#include "dryerctl/model.hpp"
#include "dryerctl/params.hpp"
#include "dryerctl/state.hpp"
#include "dryerctl/steady.hpp"

namespace dryerctl {

/// The 33 small-signal coupling coefficients of the published linear model,
/// evaluated at an operating point. Transcribed as printed, including the
/// places where they disagree with the Jacobian of the nonlinear balances;
/// compare_models surfaces those disagreements.
struct AlphaCoefficients {
    double a[34] = {0.0}; // 1-based, a[0] unused

    double operator[](int i) const { return a[i]; }
};

inline AlphaCoefficients alpha_coefficients(const OperatingPoint& op, const DerivedConstants& k,
                                            double mdot_evap_to_windbox = 0.2) {
    const double mc = op.masses.m_chamber, mw = op.masses.m_windbox;
    const double mg = op.masses.m_dryergas, me = op.masses.m_exhaust;
    if (!(mc != 0.0) || !(mw != 0.0) || !(mg != 0.0) || !(me != 0.0))
        throw numeric_error("alpha_coefficients: steady gas masses must be nonzero");

    const double mf = op.kv.mdot_fuel, ma = op.kv.mdot_air, fs = op.kv.f_solids;
    const double xin = op.kv.x_in, xout = op.kv.x_out, ta = op.kv.t_air_in;
    const double tdin = op.kv.t_dryer_in_ss, ts = op.kv.t_bed_ss, tamb = op.kv.t_ambient;
    const double mcw = op.uv.mdot_chamber_to_windbox, mwd = op.uv.mdot_windbox_to_dryer;
    const double mgo = op.uv.mdot_gas_out, mstk = op.uv.mdot_stack;
    const double tc = op.uv.t_chamber, tw = op.uv.t_windbox, tg = op.uv.t_dryergas;
    const double te = op.uv.t_exhaust, tdout = op.uv.t_dryer_out;
    const double mew = mdot_evap_to_windbox;

    AlphaCoefficients c;
    double* a = c.a;
    a[1] = (k.k12 - tc) / mc;
    a[2] = (k.k22 * (ta - tc) - tc) / mc;
    a[3] = -(te - tc) / mc;
    a[4] = (-k.k12 * mf + mf * tc - k.k22 * ma * (ta - tc) + ma * tc + mew * (tc - tw)) / (mc * mc);
    a[5] = (mf + k.k22 * ma + ma + mew) / (mc * mc);
    a[6] = k.k22 * ma / mc;
    a[7] = mew / mc;
    a[8] = (k.k14 * (tc - tw) - k.k24 * tw) / mw;
    a[9] = (-k.k34 * (tw - tdin) + k.k24 * tw) / (mw * mw);
    a[10] = (-k.k14 * mcw * (tc - tw) + k.k24 * mcw * tw + k.k34 * mwd * (tw - tdin) -
             k.k24 * mwd * tw) / (mw * mw);
    a[11] = k.k14 * mcw / mw;
    a[12] = (-k.k14 * mcw - k.k24 * mcw) / mw + (k.k24 * mwd - k.k34 * mwd) / mw;
    a[13] = k.k34 * mwd / mw;
    a[14] = xin - xout;
    a[15] = fs;
    a[16] = (tw - tg) / mg;
    a[17] = te / mg;
    a[18] = (mwd * (tw - tg)) / (mg * mg) +
            (fs * (xin - xout) * tg - mgo * te + k.k17 * (tg - ts)) / (mg * mg);
    a[19] = mwd / mg;
    a[20] = (mwd + fs * (xin - xout) + k.k17) / mg;
    a[21] = mgo / mg;
    a[22] = k.k17 / mg;
    a[23] = tg * (xin - xout) / mg;
    a[24] = fs * tg / mg;
    a[25] = (tdin - 2.0 * te) / me;
    a[26] = (-te + 2.0 * tamb) / me;
    a[27] = (-mgo * tdin + 2.0 * te * mgo - 2.0 * tamb * mstk) / (me * me) +
            (te * mstk + k.k18 * (tdout - tamb)) / (me * me);
    a[28] = (mgo - k.k18) / me;
    a[29] = 2.0 * mgo / me;
    a[30] = k.k19 * (tdout - te);
    a[31] = -2.0 * k.k19 * te + (1.0 + k.k19) * tamb;
    a[32] = k.k19 * (2.0 * mstk + mgo);
    a[33] = k.k19 * mgo - k.k29;
    return c;
}

/// Deviation-variable linear model. Outputs are the states, so C = I and D = 0.
struct StateSpaceModel {
    StateMat A = StateMat::Zero();
    InputMat B = InputMat::Zero();
    StateMat C = StateMat::Identity();
    InputMat D = InputMat::Zero();

    bool output_is_state() const { return C.isIdentity(0.0) && D.isZero(0.0); }
};

/// The published A/B stencils, populated sign-for-sign as printed.
inline StateSpaceModel assemble_paper_model(const AlphaCoefficients& c) {
    StateSpaceModel m;
    const double* a = c.a;

    m.A(1, 0) = a[4];  m.A(1, 1) = -a[5];  m.A(1, 3) = a[7];
    m.A(3, 1) = a[11]; m.A(3, 2) = a[10];  m.A(3, 3) = a[12];
    m.A(6, 3) = a[19]; m.A(6, 5) = a[18];  m.A(6, 6) = -a[20]; m.A(6, 8) = a[21];
    m.A(8, 7) = a[27]; m.A(8, 8) = -a[29];
    m.A(9, 8) = -a[32];

    m.B(0, 0) = 1.0;   m.B(0, 1) = 1.0;    m.B(0, 2) = -1.0;
    m.B(1, 0) = a[1];  m.B(1, 1) = a[2];   m.B(1, 3) = -a[3];  m.B(1, 4) = a[6];
    m.B(2, 2) = 1.0;   m.B(2, 3) = -1.0;   m.B(2, 6) = -1.0;
    m.B(3, 2) = a[8];  m.B(3, 5) = a[9];   m.B(3, 6) = a[13];
    m.B(4, 7) = a[14]; m.B(4, 8) = a[15];  m.B(4, 9) = -a[15];
    m.B(5, 7) = a[16]; m.B(5, 8) = a[15];  m.B(5, 9) = -a[15]; m.B(5, 10) = -1.0;
    m.B(6, 5) = a[16]; m.B(6, 7) = -a[23]; m.B(6, 8) = -a[24]; m.B(6, 9) = a[24];
    m.B(6, 10) = a[17]; m.B(6, 11) = a[22];
    m.B(7, 10) = 1.0;  m.B(7, 12) = -1.0;
    m.B(8, 10) = a[25]; m.B(8, 12) = a[26]; m.B(8, 13) = a[28];
    m.B(9, 10) = a[30]; m.B(9, 12) = a[31]; m.B(9, 13) = a[33];
    return m;
}

/// Central-difference Jacobian of an arbitrary rhs(x, u) around (x0, u0).
template <typename Rhs>
StateSpaceModel numeric_jacobian_fn(Rhs&& rhs, const StateVec& x0, const InputVec& u0,
                                    double rel_step = 1e-6, double abs_floor = 1e-9) {
    if (!(rel_step > 0.0)) throw config_error("numeric_jacobian: step must be positive");
    StateSpaceModel m;
    for (int j = 0; j < kNumStates; ++j) {
        const double h = std::max(rel_step * std::abs(x0(j)), abs_floor);
        StateVec xp = x0, xm = x0;
        xp(j) += h;
        xm(j) -= h;
        m.A.col(j) = (rhs(xp, u0) - rhs(xm, u0)) / (2.0 * h);
    }
    for (int j = 0; j < kNumInputs; ++j) {
        const double h = std::max(rel_step * std::abs(u0(j)), abs_floor);
        InputVec up = u0, um = u0;
        up(j) += h;
        um(j) -= h;
        m.B.col(j) = (rhs(x0, up) - rhs(x0, um)) / (2.0 * h);
    }
    return m;
}

/// Central-difference Jacobian of the nonlinear balances at an operating
/// point. Refuses to linearize around a point that does not satisfy the steady
/// system.
inline StateSpaceModel numeric_jacobian(const OperatingPoint& op, const ExogenousInputs& inputs_ss,
                                        const DerivedConstants& k, const PlantParameters& p,
                                        ModelVariant variant = ModelVariant::PaperVerbatim,
                                        double rel_step = 1e-6, double residual_tol = 1e-7) {
    const SteadyResiduals r = steady_residuals(op.kv, op.uv, k);
    if (r.scaled_norm() > residual_tol)
        throw numeric_error("numeric_jacobian: operating point residual norm " +
                            std::to_string(r.scaled_norm()) + " above tolerance " +
                            std::to_string(residual_tol) + ", linearization point invalid");

    const PlantState x_ss = op_state(op);
    auto rhs = [&](const StateVec& xv, const InputVec& uv) -> StateVec {
        PlantState x = PlantState::from_vector(xv);
        const ExogenousInputs u = ExogenousInputs::from_vector(uv);
        return nonlinear_rhs(x, u, k, variant, p.t_ambient).to_vector();
    };
    return numeric_jacobian_fn(rhs, x_ss.to_vector(), inputs_ss.to_vector(), rel_step);
}

struct Discrepancy {
    char matrix; ///< 'A' or 'B'
    int row, col;
    double lhs, rhs;
    std::string row_label, col_label;

    double abs_diff() const { return std::abs(lhs - rhs); }
};

/// Element-wise comparison of two models. An element is listed when
/// |a - b| > tol * max(1, |a|, |b|).
struct DiscrepancyReport {
    double tol = 0.0;
    std::vector<Discrepancy> entries;

    bool empty() const { return entries.empty(); }
};

inline DiscrepancyReport compare_models(const StateSpaceModel& a, const StateSpaceModel& b,
                                        double tol) {
    DiscrepancyReport rep;
    rep.tol = tol;
    auto compare = [&](char which, const auto& ma, const auto& mb, const auto& col_names) {
        for (int i = 0; i < ma.rows(); ++i) {
            for (int j = 0; j < ma.cols(); ++j) {
                const double x = ma(i, j), y = mb(i, j);
                const double scale = std::max({1.0, std::abs(x), std::abs(y)});
                if (std::abs(x - y) > tol * scale) {
                    rep.entries.push_back({which, i, j, x, y, state_labels()[i],
                                           std::string(col_names[j])});
                }
            }
        }
    };
    compare('A', a.A, b.A, state_labels());
    compare('B', a.B, b.B, input_labels());
    return rep;
}

/// Deviation transform x - X_ss and its inverse.
inline StateVec to_deviation(const PlantState& x, const PlantState& x_ref) {
    return x.to_vector() - x_ref.to_vector();
}

inline PlantState from_deviation(const StateVec& dv, const PlantState& x_ref) {
    return PlantState::from_vector(x_ref.to_vector() + dv);
}

inline StateVec to_deviation(const PlantState& x, const OperatingPoint& op,
                             double p_draft_ss = -100e3) {
    return to_deviation(x, op_state(op, p_draft_ss));
}

inline PlantState from_deviation(const StateVec& dv, const OperatingPoint& op,
                                 double p_draft_ss = -100e3) {
    return from_deviation(dv, op_state(op, p_draft_ss));
}

} // namespace dryerctl
