#include "fv/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace fv::csbasis {

std::vector<double> laguerre_functions(int n_max, double alpha, double x) {
    std::vector<double> psi(n_max + 1, 0.0);
    if (x < 0.0) throw DomainError("laguerre_functions: x must be non-negative");
    double psi0;
    if (x == 0.0)
        psi0 = alpha == 0.0 ? std::exp(-0.5 * std::lgamma(alpha + 1.0)) : 0.0;
    else
        psi0 = std::exp(0.5 * (alpha * std::log(x) - x) - 0.5 * std::lgamma(alpha + 1.0));
    psi[0] = psi0;
    if (n_max == 0) return psi;
    psi[1] = (alpha + 1.0 - x) * psi0 / std::sqrt(alpha + 1.0);
    for (int n = 1; n < n_max; ++n) {
        double a_next = std::sqrt((n + 1.0) * (n + alpha + 1.0));
        double a_prev = std::sqrt(n * (n + alpha));
        psi[n + 1] = ((2.0 * n + alpha + 1.0 - x) * psi[n] - a_prev * psi[n - 1]) / a_next;
    }
    return psi;
}

namespace {

/// log of sum_{k<order} psi_k(x)^2, with the recurrence run on e^{+x/2}-scaled
/// values and renormalized on the fly so nothing over- or underflows.
double log_psi_square_sum(int order, double alpha, double x) {
    // start from p_0 = 1; the true psi_0 = e^{arg} with:
    double arg = 0.5 * (alpha * std::log(x) - x) - 0.5 * std::lgamma(alpha + 1.0);
    double p0 = 1.0;
    double p1 = (alpha + 1.0 - x) / std::sqrt(alpha + 1.0);
    double sum = p0 * p0 + p1 * p1;
    double logshift = 0.0;
    for (int n = 1; n < order - 1; ++n) {
        double a_next = std::sqrt((n + 1.0) * (n + alpha + 1.0));
        double a_prev = std::sqrt(n * (n + alpha));
        double p2 = ((2.0 * n + alpha + 1.0 - x) * p1 - a_prev * p0) / a_next;
        sum += p2 * p2;
        p0 = p1;
        p1 = p2;
        if (std::abs(p1) > 1e140 || sum > 1e280) {
            const double f = 1e-140;
            p0 *= f;
            p1 *= f;
            sum *= f * f;
            logshift += std::log(1e140);
        }
    }
    return 2.0 * (arg + logshift) + std::log(sum);
}

}  // namespace

QuadratureRule make_laguerre_rule(int order, double alpha, double beta) {
    if (order < 1) throw DomainError("make_laguerre_rule: order must be >= 1");
    if (alpha <= -1.0) throw DomainError("make_laguerre_rule: alpha must exceed -1");
    if (beta <= 0.0) throw DomainError("make_laguerre_rule: beta must be positive");

    Eigen::VectorXd diag(order), off(std::max(order - 1, 0));
    for (int k = 0; k < order; ++k) diag(k) = 2.0 * k + alpha + 1.0;
    for (int k = 0; k + 1 < order; ++k) off(k) = std::sqrt((k + 1.0) * (k + alpha + 1.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);

    QuadratureRule rule;
    rule.order = order;
    rule.alpha = alpha;
    rule.beta = beta;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    rule.weight_logs.resize(order);
    for (int i = 0; i < order; ++i) {
        double x = es.eigenvalues()(i);
        if (order == 1) x = alpha + 1.0;
        // Christoffel identity with the kernel folded out:
        // weight = 1 / (beta * sum_k psi_k(x)^2); grows like e^{+x} at far
        // nodes, where the kernel-matched integrand decays correspondingly.
        double lw = -log_psi_square_sum(order, alpha, x) - std::log(beta);
        rule.nodes[i] = x / beta;
        rule.weight_logs[i] = lw;
        rule.weights[i] = lw < 700.0 ? std::exp(lw) : std::numeric_limits<double>::infinity();
    }
    return rule;
}

double weighted_term(const QuadratureRule& rule, int i, double f_value) {
    if (std::isnan(f_value))
        throw DomainError("quadrature: integrand is NaN at node " + std::to_string(i));
    if (std::isfinite(rule.weights[i])) return rule.weights[i] * f_value;
    if (f_value == 0.0) return 0.0;
    double mag = rule.weight_logs[i] + std::log(std::abs(f_value));
    double v = mag < 700.0 ? std::exp(mag) : std::numeric_limits<double>::infinity();
    return f_value > 0.0 ? v : -v;
}

double integrate(const std::function<double(double)>& f, const QuadratureRule& rule) {
    double sum = 0.0;
    for (int i = 0; i < rule.order; ++i) sum += weighted_term(rule, i, f(rule.nodes[i]));
    return sum;
}

}  // namespace fv::csbasis
