#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fv/csbasis.hpp"
#include "oracles.hpp"

using namespace fv;
using namespace fv::csbasis;

namespace {

// Independent quadrature of <n,bra| f |n',ket> straight from the defining
// integral, with basis values from cs_function.
double quad_element(const BasisSpec& bra, const BasisSpec& ket,
                    const std::function<double(double)>& f, int n, int np, double alpha,
                    int order = 400) {
    QuadratureRule rule = make_laguerre_rule(order, alpha, bra.b + ket.b);
    auto integrand = [&](double r) {
        return cs_function(n, bra, r) * f(r) * cs_function(np, ket, r);
    };
    return integrate(integrand, rule);
}

double one(double) { return 1.0; }

}  // namespace

TEST_CASE("quadrature rule reproduces its own kernel integral") {
    for (double alpha : {0.0, 1.0, 3.0, 7.0}) {
        for (double beta : {0.6, 1.0, 8.0}) {
            QuadratureRule rule = make_laguerre_rule(40, alpha, beta);
            double s = 0.0;
            for (int i = 0; i < rule.order; ++i)
                s += rule.weights[i] * std::pow(rule.nodes[i], alpha) *
                     std::exp(-beta * rule.nodes[i]);
            double exact = std::exp(std::lgamma(alpha + 1.0)) / std::pow(beta, alpha + 1.0);
            CHECK(std::abs(s - exact) <= 1e-13 * exact);
        }
    }
}

TEST_CASE("integrate basic examples") {
    QuadratureRule r1 = make_laguerre_rule(30, 0.0, 1.0);
    CHECK(std::abs(integrate([](double r) { return std::exp(-r); }, r1) - 1.0) < 1e-13);

    QuadratureRule r2 = make_laguerre_rule(30, 3.0, 2.0);
    double v = integrate([](double r) { return r * r * r * std::exp(-2.0 * r); }, r2);
    CHECK(std::abs(v - 0.375) < 1e-14);  // 3!/2^4

    QuadratureRule r3 = make_laguerre_rule(120, 1.0, 1.0);
    double w = integrate([](double r) { return r * std::exp(-r) * std::sin(r); }, r3);
    CHECK(std::abs(w - 0.5) < 1e-11);
}

TEST_CASE("integrate rejects NaN integrands") {
    QuadratureRule r = make_laguerre_rule(10, 0.0, 1.0);
    CHECK_THROWS_AS(integrate([](double) { return std::nan(""); }, r), DomainError);
}

TEST_CASE("high-order rules stay usable") {
    QuadratureRule r = make_laguerre_rule(500, 5.0, 2.0);
    for (double lw : r.weight_logs) CHECK(std::isfinite(lw));
    double s = integrate(
        [](double rr) { return std::pow(rr, 5.0) * std::exp(-2.0 * rr); }, r);
    double exact = std::tgamma(6.0) / 64.0;
    CHECK(std::abs(s - exact) < 1e-12 * exact);
}

TEST_CASE("cs_function values") {
    BasisSpec s00(0, 1.0, 10);
    CHECK(cs_function(0, s00, 0.0) == 0.0);
    CHECK(cs_function(4, BasisSpec(2, 0.7, 10), 0.0) == 0.0);
    CHECK(std::abs(cs_function(0, s00, 1.0) - 2.0 * std::exp(-1.0)) < 1e-14);

    // explicit-coefficient Laguerre oracle
    BasisSpec s31(1, 0.7, 10);
    double x = 2.0 * 0.7 * 2.5;
    double norm = std::sqrt(std::tgamma(4.0) / std::tgamma(7.0));  // sqrt(3!/6!)
    double oracle = norm * std::pow(x, 2) * std::exp(-x / 2.0) *
                    test_oracles::laguerre_explicit(3, 3, x);
    double val = cs_function(3, s31, 2.5);
    CHECK(std::abs(val - oracle) <= 1e-12 * std::abs(oracle));

    CHECK_THROWS_AS(cs_function(0, s00, -0.1), DomainError);
}

TEST_CASE("cs_function satisfies the Sturm-Liouville identity pointwise") {
    // (-f'' + l(l+1)/r^2 f + b^2 f) r = 2b(n+l+1) f, second derivative by
    // central differences.
    for (int l : {0, 2}) {
        BasisSpec spec(l, 0.8, 12);
        for (int n : {0, 3, 9}) {
            for (double r : {0.5, 1.7, 4.2}) {
                double h = 1e-4;
                double f0 = cs_function(n, spec, r);
                double fp = cs_function(n, spec, r + h);
                double fm = cs_function(n, spec, r - h);
                double d2 = (fp - 2.0 * f0 + fm) / (h * h);
                double lhs = (-d2 + (l * (l + 1.0)) / (r * r) * f0 + 0.64 * f0) * r;
                double rhs = 2.0 * 0.8 * (n + l + 1.0) * f0;
                CHECK(std::abs(lhs - rhs) < 1e-6 * std::max(1.0, std::abs(rhs)));
            }
        }
    }
}

TEST_CASE("overlap matrix closed form and examples") {
    BasisSpec spec(0, 1.0, 6);
    RadialMatrix s = overlap_matrix(spec);
    CHECK(s.half_bandwidth == 1);
    CHECK(std::abs(s.mat(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(s.mat(1, 0) + std::sqrt(2.0) / 2.0) < 1e-14);
    CHECK(s.mat(0, 2) == 0.0);
    CHECK(s.mat(5, 2) == 0.0);

    // quadrature oracle
    double q00 = quad_element(spec, spec, one, 0, 0, 2.0);
    CHECK(std::abs(s.mat(0, 0) - q00) < 1e-13);
    double q10 = quad_element(spec, spec, one, 1, 0, 2.0);
    CHECK(std::abs(s.mat(1, 0) - q10) < 1e-13);
    double q20 = quad_element(spec, spec, one, 2, 0, 2.0);
    CHECK(std::abs(q20) < 1e-13);
}

TEST_CASE("inverse_r matrix is the identity") {
    BasisSpec spec(1, 2.3, 8);
    RadialMatrix m = inverse_r_matrix(spec);
    CHECK(m.mat(0, 0) == 1.0);
    CHECK(m.mat(2, 5) == 0.0);
    CHECK(m.mat(4, 4) == 1.0);
    auto inv_r = [](double r) { return 1.0 / r; };
    CHECK(std::abs(quad_element(spec, spec, inv_r, 0, 0, 2.0 * 1 + 1) - 1.0) < 1e-12);
    CHECK(std::abs(quad_element(spec, spec, inv_r, 4, 4, 2.0 * 1 + 1) - 1.0) < 1e-12);
    CHECK(std::abs(quad_element(spec, spec, inv_r, 2, 5, 2.0 * 1 + 1)) < 1e-12);
}

TEST_CASE("kinetic matrix examples and b-scaling") {
    BasisSpec spec(0, 1.0, 6);
    RadialMatrix t = kinetic_matrix(spec, 1.0);
    CHECK(std::abs(t.mat(0, 0) - 0.5) < 1e-14);
    CHECK(std::abs(t.mat(0, 1) - 0.35355339) < 1e-8);

    // raw closed form scales linearly with b; the overlap-normalized diagonal
    // quotient scales like b^2 (a pure dilation of the differential operator)
    BasisSpec spec2(0, 2.0, 6);
    RadialMatrix t2 = kinetic_matrix(spec2, 1.0);
    RadialMatrix s1 = overlap_matrix(spec), s2 = overlap_matrix(spec2);
    for (int n : {0, 2, 5}) {
        CHECK(std::abs(t2.mat(n, n) - 2.0 * t.mat(n, n)) < 1e-12 * std::abs(t.mat(n, n)));
        double q1 = t.mat(n, n) / s1.mat(n, n);
        double q2 = t2.mat(n, n) / s2.mat(n, n);
        CHECK(std::abs(q2 - 4.0 * q1) < 1e-12 * std::abs(q1));
    }
}

TEST_CASE("kinetic matrix agrees with derivative-form quadrature") {
    // (1/2m) [ int f' g' dr + l(l+1) int f g / r^2 dr ], derivatives by
    // central differences on cs_function.
    BasisSpec spec(1, 0.9, 5);
    const double m = 1.7;
    RadialMatrix t = kinetic_matrix(spec, m);
    // phi' phi' and phi phi / r^2 both behave like r^{2l} at the origin
    QuadratureRule rule = make_laguerre_rule(220, 2.0 * spec.l, 2.0 * spec.b);
    auto deriv = [&](int n, double r) {
        double h = 1e-5;
        return (cs_function(n, spec, r + h) - cs_function(n, spec, r - h)) / (2.0 * h);
    };
    for (auto [n, np] : {std::pair{0, 0}, {0, 1}, {2, 3}, {4, 4}}) {
        auto integrand = [&](double r) {
            return deriv(n, r) * deriv(np, r) +
                   spec.l * (spec.l + 1.0) / (r * r) * cs_function(n, spec, r) *
                       cs_function(np, spec, r);
        };
        double q = integrate(integrand, rule) / (2.0 * m);
        CHECK(std::abs(q - t.mat(n, np)) < 1e-7 * std::max(1.0, std::abs(t.mat(n, np))));
    }
}

TEST_CASE("power_r matrices: examples, bandwidth, quadrature") {
    BasisSpec spec(0, 1.0, 8);
    RadialMatrix r1 = power_r_matrix(spec, 1);
    RadialMatrix r2 = power_r_matrix(spec, 2);
    CHECK(r1.half_bandwidth == 2);
    CHECK(r2.half_bandwidth == 3);
    CHECK(std::abs(r1.mat(0, 0) - 1.5) < 1e-13);
    CHECK(std::abs(r2.mat(0, 0) - 3.0) < 1e-13);
    CHECK(r1.mat(0, 3) == 0.0);
    CHECK(r1.mat(5, 1) == 0.0);
    CHECK(r2.mat(0, 4) == 0.0);
    CHECK(std::abs(r1.mat(2, 0)) > 1e-14);  // outermost band is populated
    CHECK(std::abs(r2.mat(3, 0)) > 1e-14);

    auto rr = [](double r) { return r; };
    auto rr2 = [](double r) { return r * r; };
    for (auto [n, np] : {std::pair{0, 0}, {1, 3}, {4, 2}, {6, 6}}) {
        CHECK(std::abs(r1.mat(n, np) - quad_element(spec, spec, rr, n, np, 3.0)) < 1e-11);
        CHECK(std::abs(r2.mat(n, np) - quad_element(spec, spec, rr2, n, np, 4.0)) < 1e-11);
    }
    CHECK_THROWS_AS(power_r_matrix(spec, 3), DomainError);
}

TEST_CASE("closed forms match quadrature across n, l, b") {
    for (int l : {0, 1, 3}) {
        for (double b : {0.3, 1.0, 4.0}) {
            BasisSpec spec(l, b, 30);
            RadialMatrix s = overlap_matrix(spec);
            RadialMatrix t = kinetic_matrix(spec, 1.0);
            RadialMatrix r1 = power_r_matrix(spec, 1);
            // alpha = 2l+1 makes every integrand below an exact polynomial
            // against the kernel (the kinetic one carries a 1/r factor)
            QuadratureRule rule = make_laguerre_rule(200, 2.0 * l + 1.0, 2.0 * b);
            double scale_s = std::max(1.0, s.mat.cwiseAbs().maxCoeff());
            double scale_r = std::max(1.0, r1.mat.cwiseAbs().maxCoeff());
            double scale_t = std::max(1.0, t.mat.cwiseAbs().maxCoeff());
            for (auto [n, np] : {std::pair{0, 0}, {7, 7}, {29, 28}, {30, 27}, {15, 30}}) {
                auto ovl = [&](double r) {
                    return cs_function(n, spec, r) * cs_function(np, spec, r);
                };
                auto rint = [&](double r) {
                    return cs_function(n, spec, r) * r * cs_function(np, spec, r);
                };
                double qs = integrate(ovl, rule);
                double qr = integrate(rint, rule);
                CHECK(std::abs(s.mat(n, np) - qs) < 1e-11 * scale_s);
                CHECK(std::abs(r1.mat(n, np) - qr) < 1e-11 * scale_r);
                // kinetic via Sturm-Liouville right-hand side, independent route:
                auto kin = [&](double r) {
                    return cs_function(n, spec, r) *
                           (2.0 * b * (np + l + 1.0) / r - b * b) * cs_function(np, spec, r) /
                           2.0;
                };
                double qt = integrate(kin, rule);
                CHECK(std::abs(t.mat(n, np) - qt) < 1e-11 * scale_t);
            }
        }
    }
}

TEST_CASE("overlap matrices are positive definite") {
    for (int l : {0, 2}) {
        for (double b : {0.3, 4.0}) {
            BasisSpec spec(l, b, 25);
            Eigen::LLT<Eigen::MatrixXd> llt(overlap_matrix(spec).mat);
            CHECK(llt.info() == Eigen::Success);
        }
    }
}

TEST_CASE("screened Coulomb matrix") {
    BasisSpec spec(0, 1.0, 10);
    RadialMatrix m = screened_coulomb_matrix(spec, 1.0);
    CHECK(std::abs(m.mat(0, 0) - 4.0 / 9.0) < 1e-13);

    // symmetry
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j < i; ++j) CHECK(std::abs(m.mat(i, j) - m.mat(j, i)) < 1e-13);

    // a -> 0 approaches the 1/r matrix (identity); the leading deviation is
    // a * <n|1|n'>, bounded by a * max overlap entry
    double a_small = 1e-6;
    RadialMatrix nearly = screened_coulomb_matrix(spec, a_small);
    double bound = 2.0 * a_small * overlap_matrix(spec).mat.cwiseAbs().maxCoeff();
    CHECK((nearly.mat - Eigen::MatrixXd::Identity(11, 11)).cwiseAbs().maxCoeff() < bound);

    CHECK_THROWS_AS(screened_coulomb_matrix(spec, -1.0), DomainError);
}

TEST_CASE("cross_l_matrix basics") {
    BasisSpec bra(1, 1.0, 6), ket(0, 1.0, 6);

    RadialMatrix zero = cross_l_matrix(bra, ket, [](double) { return 0.0; }, 0);
    CHECK(zero.mat.cwiseAbs().maxCoeff() == 0.0);

    BasisSpec same(1, 0.8, 8);
    RadialMatrix invr =
        cross_l_matrix(same, same, [](double r) { return 1.0 / r; }, -1);
    CHECK((invr.mat - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-11);

    // 1/r^2 between l=1 and l=0 vs doubled-order quadrature
    auto f = [](double r) { return 1.0 / (r * r); };
    RadialMatrix m = cross_l_matrix(bra, ket, f, -2);
    for (auto [n, np] : {std::pair{0, 0}, {2, 4}, {5, 1}}) {
        double q = quad_element(bra, ket, f, n, np, 1.0, 800);
        CHECK(std::abs(m.mat(n, np) - q) < 1e-11 * std::max(1.0, std::abs(q)));
    }

    // non-integrable singularity rejected: l=0 against l=0 with 1/r^3
    BasisSpec s0(0, 1.0, 4);
    CHECK_THROWS_AS(cross_l_matrix(s0, s0, f, -3), DomainError);
}

TEST_CASE("cross_l_power closed band matches quadrature") {
    for (int l : {0, 1}) {
        for (int p : {0, 1}) {
            BasisSpec bra(l + 1, 0.9, 8), ket(l, 0.9, 8);
            RadialMatrix closed = cross_l_power_matrix(bra, ket, p);
            auto f = [p](double r) { return std::pow(r, p); };
            RadialMatrix quad = cross_l_matrix(bra, ket, f, p);
            CHECK((closed.mat - quad.mat).cwiseAbs().maxCoeff() <
                  1e-11 * std::max(1.0, quad.mat.cwiseAbs().maxCoeff()));
            // declared band is tight
            for (int i = 0; i <= 8; ++i)
                for (int j = 0; j <= 8; ++j)
                    if (std::abs(i - j) > closed.half_bandwidth)
                        CHECK(std::abs(closed.mat(i, j)) < 1e-13);
        }
    }
}

TEST_CASE("XPowers windows agree with the full matrices") {
    BasisSpec spec(2, 1.3, 40);
    RadialMatrix r2 = power_r_matrix(spec, 2);
    XPowers xp(spec.l, 3, 20, 40);
    for (long n : {20L, 33L, 40L})
        for (long np : {20L, 31L, 38L}) {
            double closed = xp.entry(3, n, np) / std::pow(2.0 * spec.b, 3.0);
            CHECK(std::abs(closed - r2.mat(n, np)) < 1e-12 * std::max(1.0, std::abs(closed)));
        }
}
