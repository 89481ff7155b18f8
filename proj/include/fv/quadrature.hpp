#pragma once

#include <functional>
#include <vector>

#include "fv/common.hpp"

namespace fv::csbasis {

/// Generalized Gauss-Laguerre rule for integrals over r in (0, inf) whose
/// integrand behaves like (smooth) * r^alpha * exp(-beta r). Nodes are mapped
/// to physical r; weights absorb the kernel, so the rule is applied to the
/// full integrand directly:  integral f(r) dr  ~=  sum_i weights[i] * f(nodes[i]).
struct QuadratureRule {
    int order = 0;
    double alpha = 0.0;  ///< exponent of the r^alpha kernel factor
    double beta = 1.0;   ///< decay rate of the exp(-beta r) kernel factor
    std::vector<double> nodes;
    std::vector<double> weights;      ///< may be inf at far nodes; see weight_logs
    std::vector<double> weight_logs;  ///< natural logs, always finite
};

/// weights[i] * f_value, evaluated through logs when the plain weight
/// overflows (the integrand supplies the compensating decay there).
double weighted_term(const QuadratureRule& rule, int i, double f_value);

/// Golub-Welsch construction. The weights come from the Christoffel identity
/// written in terms of the bounded orthonormal Laguerre functions, which keeps
/// them finite at any order (classical weights underflow past order ~180).
QuadratureRule make_laguerre_rule(int order, double alpha, double beta);

/// Weighted sum of f over the rule's nodes. Throws DomainError on NaN values.
double integrate(const std::function<double(double)>& f, const QuadratureRule& rule);

/// Orthonormal Laguerre functions psi_n(x) = sqrt(n!/Gamma(n+a+1)) x^{a/2}
/// e^{-x/2} L_n^{(a)}(x) for n = 0..n_max, by forward recurrence. Bounded for
/// all x >= 0, so the evaluation never overflows.
std::vector<double> laguerre_functions(int n_max, double alpha, double x);

}  // namespace fv::csbasis
