#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "dryerctl/errors.hpp"

namespace dryerctl {

/// Polynomials are coefficient lists in ascending powers of s.
using Poly = std::vector<double>;
using Complex = std::complex<double>;

namespace poly {

/// Coefficients below `rel_tol` of the largest magnitude are rationalization
/// dust; drop them from the high end so degrees are meaningful.
inline Poly trim(Poly p, double rel_tol = 1e-12) {
    double largest = 0.0;
    for (double c : p) largest = std::max(largest, std::abs(c));
    if (largest == 0.0) return {0.0};
    while (p.size() > 1 && std::abs(p.back()) <= rel_tol * largest) p.pop_back();
    return p;
}

inline int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

inline Poly add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

inline Poly scale(Poly p, double k) {
    for (double& c : p) c *= k;
    return p;
}

inline Poly mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline Complex eval(const Poly& p, Complex s) {
    Complex acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * s + *it;
    return acc;
}

inline double eval(const Poly& p, double s) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * s + *it;
    return acc;
}

/// Durand-Kerner simultaneous root iteration. Adequate for the low-degree
/// polynomials of compensator synthesis.
inline std::vector<Complex> roots(const Poly& p_in, int max_iter = 600, double tol = 1e-13) {
    const Poly p = trim(p_in);
    const int n = degree(p);
    if (n < 1) return {};
    // monic normalization
    std::vector<Complex> c(n + 1);
    for (int i = 0; i <= n; ++i) c[i] = p[i] / p[n];

    // Cauchy bound on root magnitude
    double bound = 0.0;
    for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[i]));
    bound = 1.0 + bound;

    std::vector<Complex> r(n);
    const Complex seed(0.4, 0.9);
    Complex w = 1.0;
    for (int i = 0; i < n; ++i) {
        w *= seed;
        r[i] = bound * w / std::abs(w) * (0.5 + 0.5 * (i + 1.0) / n);
    }

    auto eval_monic = [&](Complex s) {
        Complex acc = 1.0;
        for (int i = n - 1; i >= 0; --i) acc = acc * s + c[i];
        return acc;
    };

    for (int it = 0; it < max_iter; ++it) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            Complex denom = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= (r[i] - r[j]);
            if (denom == Complex(0.0)) denom = Complex(1e-30, 0.0);
            const Complex delta = eval_monic(r[i]) / denom;
            r[i] -= delta;
            worst = std::max(worst, std::abs(delta));
        }
        if (worst < tol * bound) break;
    }
    return r;
}

} // namespace poly

/// Real-coefficient rational function of s.
struct RationalTF {
    Poly num{0.0};
    Poly den{1.0};

    RationalTF() = default;
    RationalTF(Poly n, Poly d) : num(poly::trim(std::move(n))), den(poly::trim(std::move(d))) {
        if (poly::degree(den) == 0 && den[0] == 0.0)
            throw config_error("RationalTF: denominator is identically zero");
    }

    int relative_degree() const { return poly::degree(den) - poly::degree(num); }
    bool proper() const { return relative_degree() >= 0; }
    bool strictly_proper() const { return relative_degree() >= 1; }

    Complex eval(Complex s) const { return poly::eval(num, s) / poly::eval(den, s); }

    /// Scales both coefficient lists so the denominator's leading coefficient
    /// is one. Purely cosmetic; the value of the function is unchanged.
    RationalTF normalized() const {
        RationalTF r = *this;
        const double lead = r.den.back();
        for (double& c : r.num) c /= lead;
        for (double& c : r.den) c /= lead;
        return r;
    }

    std::vector<Complex> zeros() const { return poly::roots(num); }
    std::vector<Complex> poles() const { return poly::roots(den); }
};

inline RationalTF operator*(const RationalTF& a, const RationalTF& b) {
    return RationalTF(poly::mul(a.num, b.num), poly::mul(a.den, b.den));
}

inline RationalTF operator+(const RationalTF& a, const RationalTF& b) {
    return RationalTF(poly::add(poly::mul(a.num, b.den), poly::mul(b.num, a.den)),
                      poly::mul(a.den, b.den));
}

inline RationalTF operator-(const RationalTF& a, const RationalTF& b) {
    return a + RationalTF(poly::scale(b.num, -1.0), b.den);
}

inline RationalTF operator*(double k, const RationalTF& a) {
    return RationalTF(poly::scale(a.num, k), a.den);
}

inline RationalTF inverse(const RationalTF& a) {
    return RationalTF(a.den, a.num);
}

inline RationalTF operator/(const RationalTF& a, const RationalTF& b) {
    return a * inverse(b);
}

/// Two rational functions are the same map when num_a*den_b == num_b*den_a as
/// polynomials; compared after normalizing by the largest cross coefficient.
inline bool same_rational(const RationalTF& a, const RationalTF& b, double tol = 1e-9) {
    const Poly lhs = poly::mul(a.num, b.den);
    const Poly rhs = poly::mul(b.num, a.den);
    double scale = 0.0;
    for (double c : lhs) scale = std::max(scale, std::abs(c));
    for (double c : rhs) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return true;
    const size_t n = std::max(lhs.size(), rhs.size());
    for (size_t i = 0; i < n; ++i) {
        const double l = i < lhs.size() ? lhs[i] : 0.0;
        const double r = i < rhs.size() ? rhs[i] : 0.0;
        if (std::abs(l - r) > tol * scale) return false;
    }
    return true;
}

} // namespace dryerctl
