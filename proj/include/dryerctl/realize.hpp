#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "dryerctl/errors.hpp"
#include "dryerctl/tf.hpp"

namespace dryerctl {

/// Minimal controllable-canonical realization of a proper SISO rational
/// function: y = C x + D u, x' = A x + B u.
struct Realization {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;

    int order() const { return static_cast<int>(A.rows()); }
};

inline Realization tf_realize(const RationalTF& tf_in) {
    const RationalTF tf(poly::trim(tf_in.num), poly::trim(tf_in.den));
    if (!tf.proper())
        throw config_error("tf_realize: improper transfer function (deg num > deg den)");

    const int n = poly::degree(tf.den);
    const double lead = tf.den[n];

    // monic denominator and numerator padded to degree n
    Poly den(n + 1), num(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) den[i] = tf.den[i] / lead;
    for (size_t i = 0; i < tf.num.size(); ++i) num[i] = tf.num[i] / lead;

    Realization r;
    r.D = num[n]; // feedthrough of the biproper part
    if (n == 0) {
        r.A.resize(0, 0);
        r.B.resize(0);
        r.C.resize(0);
        return r;
    }

    r.A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) r.A(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) r.A(n - 1, j) = -den[j];

    r.B = Eigen::VectorXd::Zero(n);
    r.B(n - 1) = 1.0;

    // strictly proper remainder: N(s) - D * Dden(s)
    r.C.resize(n);
    for (int i = 0; i < n; ++i) r.C(i) = num[i] - r.D * den[i];
    return r;
}

/// Transfer function of a realization via the Faddeev-LeVerrier resolvent
/// expansion. Used to verify realizations and to extract subsystem plants
/// from a Jacobian.
inline RationalTF tf_of_realization(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                    const Eigen::RowVectorXd& C, double D) {
    const int n = static_cast<int>(A.rows());
    if (n == 0) return RationalTF({D}, {1.0});

    // char(s) = s^n + c[n-1] s^{n-1} + ... + c[0]
    // adj(sI - A) = sum_k s^{n-1-k} M_k
    std::vector<Eigen::MatrixXd> M(n);
    Poly charpoly(n + 1, 0.0);
    charpoly[n] = 1.0;
    M[0] = Eigen::MatrixXd::Identity(n, n);
    double ck = -(A * M[0]).trace();
    charpoly[n - 1] = ck;
    for (int k = 1; k < n; ++k) {
        M[k] = A * M[k - 1] + ck * Eigen::MatrixXd::Identity(n, n);
        ck = -(A * M[k]).trace() / (k + 1.0);
        charpoly[n - 1 - k] = ck;
    }

    Poly num(n + 1, 0.0);
    for (int k = 0; k < n; ++k) {
        const double coeff = (C * M[k] * B)(0, 0);
        num[n - 1 - k] = coeff;
    }
    for (int i = 0; i <= n; ++i) num[i] += D * charpoly[i];
    return RationalTF(poly::trim(num), charpoly);
}

inline RationalTF tf_of_realization(const Realization& r) {
    return tf_of_realization(r.A, r.B, r.C, r.D);
}

/// Discrete single-input single-output filter obtained from a continuous
/// realization by the trapezoidal map, with the input held over each step.
class DiscreteFilter {
public:
    DiscreteFilter() = default;

    DiscreteFilter(const Realization& r, double step_s) {
        const int n = r.order();
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd M = I - 0.5 * step_s * r.A;
        const auto lu = M.partialPivLu();
        ad_ = lu.solve(I + 0.5 * step_s * r.A);
        bd_ = lu.solve(step_s * r.B);
        c_ = r.C;
        d_ = r.D;
        x_ = Eigen::VectorXd::Zero(n);
    }

    double step(double u) {
        const double y = (c_.size() ? (c_ * x_)(0, 0) : 0.0) + d_ * u;
        if (x_.size()) x_ = ad_ * x_ + bd_ * u;
        return y;
    }

    void reset() { x_.setZero(); }

private:
    Eigen::MatrixXd ad_;
    Eigen::VectorXd bd_;
    Eigen::RowVectorXd c_;
    double d_ = 0.0;
    Eigen::VectorXd x_;
};

} // namespace dryerctl
