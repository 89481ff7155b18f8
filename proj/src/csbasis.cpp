#include "fv/csbasis.hpp"

#include <cmath>
#include <sstream>

namespace fv::csbasis {

BasisSpec::BasisSpec(int l_, double b_, int n_max_) : l(l_), b(b_), n_max(n_max_) {
    if (l < 0) throw DomainError("BasisSpec: l must be non-negative");
    if (!(b > 0.0)) throw DomainError("BasisSpec: scale parameter b must be positive");
    if (n_max < 0) throw DomainError("BasisSpec: n_max must be non-negative");
}

double cs_function(int n, const BasisSpec& spec, double r) {
    if (n < 0) throw DomainError("cs_function: n must be non-negative");
    if (r < 0.0) throw DomainError("cs_function: r must be non-negative");
    double x = 2.0 * spec.b * r;
    std::vector<double> psi = laguerre_functions(n, 2.0 * spec.l + 1.0, x);
    return std::sqrt(x) * psi[n];
}

XPowers::XPowers(int l, int max_power, long lo, long hi) : max_power_(max_power) {
    if (lo < 0 || hi < lo) throw DomainError("XPowers: invalid index window");
    const long pad = max_power;
    base_ = std::max(0L, lo - pad);
    lo_ = lo;
    const long top = hi + pad;
    const long m = top - base_ + 1;
    const double alpha = 2.0 * l + 1.0;

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, m);
    for (long i = 0; i < m; ++i) {
        double n = static_cast<double>(base_ + i);
        x(i, i) = 2.0 * n + alpha + 1.0;
        if (i + 1 < m) {
            double off = -std::sqrt((n + 1.0) * (n + alpha + 1.0));
            x(i, i + 1) = off;
            x(i + 1, i) = off;
        }
    }
    // Truncating the band at base_-1 corrupts rows within `pad` of the lower
    // edge unless base_ is 0, where the matrix genuinely starts.
    pows_.resize(max_power_ + 1);
    pows_[0] = Eigen::MatrixXd::Identity(m, m);
    for (int p = 1; p <= max_power_; ++p) pows_[p] = pows_[p - 1] * x;
}

double XPowers::entry(int power, long n, long np) const {
    return pows_[power](n - base_, np - base_);
}

namespace {

int default_order(const BasisSpec& bra, const BasisSpec& ket, int hint) {
    if (hint > 0) return hint;
    return 3 * (std::max(bra.n_max, ket.n_max) + 20);
}

Eigen::MatrixXd quadrature_assemble(const BasisSpec& bra, const BasisSpec& ket,
                                    const std::function<double(double)>& f,
                                    const QuadratureRule& rule) {
    Eigen::MatrixXd phi_b = basis_value_table(bra, rule);
    Eigen::MatrixXd phi_k = basis_value_table(ket, rule);
    Eigen::VectorXd wf(rule.order);
    for (int i = 0; i < rule.order; ++i) {
        double v = f(rule.nodes[i]);
        if (std::isnan(v))
            throw DomainError("cross_l_matrix: integrand is NaN at a quadrature node");
        if (std::isfinite(rule.weights[i])) {
            wf(i) = rule.weights[i] * v;
        } else {
            // Far node: the basis values have underflowed to zero, and the
            // kernel-matched contribution is below double precision.
            wf(i) = 0.0;
        }
    }
    return phi_b * wf.asDiagonal() * phi_k.transpose();
}

}  // namespace

Eigen::MatrixXd basis_value_table(const BasisSpec& spec, const QuadratureRule& rule) {
    Eigen::MatrixXd phi(spec.size(), rule.order);
    const double alpha = 2.0 * spec.l + 1.0;
    for (int i = 0; i < rule.order; ++i) {
        double x = 2.0 * spec.b * rule.nodes[i];
        std::vector<double> psi = laguerre_functions(spec.n_max, alpha, x);
        double sx = std::sqrt(x);
        for (int n = 0; n <= spec.n_max; ++n) phi(n, i) = sx * psi[n];
    }
    return phi;
}

RadialMatrix overlap_matrix(const BasisSpec& spec) {
    const int m = spec.size();
    XPowers xp(spec.l, 1, 0, spec.n_max);
    RadialMatrix out{Eigen::MatrixXd::Zero(m, m), RadialOp::overlap, spec, spec, 1};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out.mat(i, j) = xp.entry(1, i, j) / (2.0 * spec.b);
    return out;
}

RadialMatrix inverse_r_matrix(const BasisSpec& spec) {
    const int m = spec.size();
    return {Eigen::MatrixXd::Identity(m, m), RadialOp::inverse_r, spec, spec, 0};
}

RadialMatrix kinetic_matrix(const BasisSpec& spec, double mass) {
    if (!(mass > 0.0)) throw DomainError("kinetic_matrix: mass must be positive");
    RadialMatrix s = overlap_matrix(spec);
    const int m = spec.size();
    RadialMatrix out{Eigen::MatrixXd::Zero(m, m), RadialOp::kinetic, spec, spec, 1};
    // Sturm-Liouville identity of the basis:
    // (-d^2/dr^2 + l(l+1)/r^2) phi_n = (2b(n+l+1)/r - b^2) phi_n.
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double t = -spec.b * spec.b * s.mat(i, j);
            if (i == j) t += 2.0 * spec.b * (i + spec.l + 1.0);
            out.mat(i, j) = t / (2.0 * mass);
        }
    return out;
}

RadialMatrix power_r_matrix(const BasisSpec& spec, int power) {
    if (power != 1 && power != 2) throw DomainError("power_r_matrix: power must be 1 or 2");
    const int m = spec.size();
    XPowers xp(spec.l, power + 1, 0, spec.n_max);
    double scale = std::pow(2.0 * spec.b, -(power + 1.0));
    RadialMatrix out{Eigen::MatrixXd::Zero(m, m), RadialOp::r_power, spec, spec, power + 1};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out.mat(i, j) = xp.entry(power + 1, i, j) * scale;
    return out;
}

RadialMatrix screened_coulomb_matrix(const BasisSpec& spec, double a, int order_hint) {
    if (!(a > 0.0)) throw DomainError("screened_coulomb_matrix: screening rate must be positive");
    const int order = default_order(spec, spec, order_hint);
    auto f = [a](double r) { return std::exp(-a * r) / r; };
    auto build = [&](int ord) {
        QuadratureRule rule = make_laguerre_rule(ord, 2.0 * spec.l + 1.0, 2.0 * spec.b + a);
        return quadrature_assemble(spec, spec, f, rule);
    };
    Eigen::MatrixXd coarse = build(order);
    Eigen::MatrixXd fine = build(2 * order);
    double scale = std::max(fine.cwiseAbs().maxCoeff(), 1e-300);
    double diff = (fine - coarse).cwiseAbs().maxCoeff() / scale;
    if (diff > 1e-9) {
        std::ostringstream os;
        os << "screened_coulomb_matrix: quadrature orders " << order << " and " << 2 * order
           << " disagree by " << diff;
        throw AccuracyError(os.str());
    }
    return {std::move(fine), RadialOp::screened, spec, spec, -1};
}

RadialMatrix cross_l_matrix(const BasisSpec& bra, const BasisSpec& ket,
                            const std::function<double(double)>& f, int origin_power,
                            int order_hint) {
    const int origin_exponent = bra.l + ket.l + 2 + origin_power;
    if (origin_exponent <= -1) {
        std::ostringstream os;
        os << "cross_l_matrix: integrand behaves like r^" << origin_exponent
           << " at the origin and is not integrable";
        throw DomainError(os.str());
    }
    const int order = default_order(bra, ket, order_hint);
    const double alpha = std::max(0.0, static_cast<double>(origin_exponent));
    const double beta = bra.b + ket.b;
    auto build = [&](int ord) {
        QuadratureRule rule = make_laguerre_rule(ord, alpha, beta);
        return quadrature_assemble(bra, ket, f, rule);
    };
    Eigen::MatrixXd coarse = build(order);
    Eigen::MatrixXd fine = build(2 * order);
    double scale = std::max(fine.cwiseAbs().maxCoeff(), 1e-300);
    double diff = (fine - coarse).cwiseAbs().maxCoeff() / scale;
    if (diff > 1e-9) {
        std::ostringstream os;
        os << "cross_l_matrix: quadrature orders " << order << " and " << 2 * order
           << " disagree by " << diff;
        throw AccuracyError(os.str());
    }
    return {std::move(fine), RadialOp::general, bra, ket, -1};
}

double cross_power_entry(int l_ket, double b, const XPowers& xp_bra, int power, long n_bra,
                         long n_ket) {
    const double alpha = 2.0 * l_ket + 1.0;
    const double s = std::pow(2.0 * b, -(power + 1.0));
    double v = std::sqrt((n_ket + alpha + 1.0) * (n_ket + alpha + 2.0)) *
               xp_bra.entry(power, n_bra, n_ket);
    if (n_ket >= 1)
        v -= 2.0 * std::sqrt(n_ket * (n_ket + alpha + 1.0)) *
             xp_bra.entry(power, n_bra, n_ket - 1);
    if (n_ket >= 2)
        v += std::sqrt(n_ket * (n_ket - 1.0)) * xp_bra.entry(power, n_bra, n_ket - 2);
    return s * v;
}

RadialMatrix cross_l_power_matrix(const BasisSpec& bra, const BasisSpec& ket, int power) {
    if (bra.l != ket.l + 1)
        throw DomainError("cross_l_power_matrix: requires bra.l == ket.l + 1");
    if (bra.b != ket.b) throw DomainError("cross_l_power_matrix: requires equal scale b");
    if (power < 0) throw DomainError("cross_l_power_matrix: power must be non-negative");
    XPowers xp(bra.l, power, 0, std::max(bra.n_max, ket.n_max) + 2);
    RadialMatrix out{Eigen::MatrixXd::Zero(bra.size(), ket.size()), RadialOp::cross_power, bra,
                     ket, power + 2};
    for (int i = 0; i <= bra.n_max; ++i)
        for (int j = 0; j <= ket.n_max; ++j)
            out.mat(i, j) = cross_power_entry(ket.l, ket.b, xp, power, i, j);
    return out;
}

}  // namespace fv::csbasis
