#pragma once

// Independent reference computations used only by the test suite. Everything
// here deliberately avoids the library's own algorithms: determinants by
// cofactor expansion, tridiagonal solves by the Thomas algorithm, Laguerre
// polynomials from explicit coefficients, plain bisection, and closed-form
// relativistic Coulomb levels.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "fv/linalg.hpp"

namespace test_oracles {

using fv::Complex;
using fv::linalg::ComplexMatrix;

inline Complex laplace_determinant(const ComplexMatrix& m) {
    const auto n = m.rows();
    if (n == 1) return m(0, 0);
    Complex det = 0.0;
    double sign = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        ComplexMatrix minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r) {
            Eigen::Index cc = 0;
            for (Eigen::Index c = 0; c < n; ++c) {
                if (c == j) continue;
                minor(r - 1, cc++) = m(r, c);
            }
        }
        det += sign * m(0, j) * laplace_determinant(minor);
        sign = -sign;
    }
    return det;
}

/// First `count` entries of column 0 of the inverse of a symmetric tridiagonal
/// matrix, by solving T x = e0 with the Thomas algorithm.
inline std::vector<double> thomas_inverse_first_columns(std::vector<double> diag,
                                                        std::vector<double> off, int count) {
    const std::size_t n = diag.size();
    std::vector<double> rhs(n, 0.0);
    rhs[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
    x.resize(count);
    return x;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (flo * fm <= 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

/// Associated Laguerre polynomial from its explicit coefficient sum,
/// L_n^{(a)}(x) = sum_k (-1)^k C(n+a, n-k) x^k / k!. Usable for small n only.
inline double laguerre_explicit(int n, int a, double x) {
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        double binom =
            std::exp(std::lgamma(n + a + 1.0) - std::lgamma(n - k + 1.0) - std::lgamma(a + k + 1.0));
        double term = binom * std::pow(x, k) / std::tgamma(k + 1.0);
        sum += (k % 2 ? -term : term);
    }
    return sum;
}

/// Klein-Gordon (spin-0) Coulomb level for V = -Z/r, reported as E - mc^2.
inline double klein_gordon_level(double z_over_c, double c, int n_r, int l) {
    double a = z_over_c;  // Z * alpha with alpha = 1/c in these units
    double lam = std::sqrt((l + 0.5) * (l + 0.5) - a * a);
    double d = n_r + 0.5 + lam;
    double e = c * c / std::sqrt(1.0 + a * a / (d * d));
    return e - c * c;
}

/// Dirac-Sommerfeld Coulomb level for V = -Z/r, reported as E - mc^2.
/// n is the principal quantum number, kappa the Dirac quantum number.
inline double dirac_sommerfeld_level(double z_over_c, double c, int n, int kappa) {
    double a = z_over_c;
    double lam = std::sqrt(static_cast<double>(kappa) * kappa - a * a);
    double d = n - std::abs(kappa) + lam;
    double e = c * c / std::sqrt(1.0 + a * a / (d * d));
    return e - c * c;
}

}  // namespace test_oracles
