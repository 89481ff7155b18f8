#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fv/potentials.hpp"

using namespace fv;
using namespace fv::potentials;

namespace {

PotentialModel couls_model() {
    return PotentialModel({PotentialTerm::coulomb(92.0), PotentialTerm::screened(-240.0, 1.0),
                           PotentialTerm::screened(320.0, 4.0)},
                          {});
}

}  // namespace

TEST_CASE("evaluate: screened-Coulomb model and trivial cases") {
    PotentialModel m = couls_model();
    double v1 = evaluate(m, Part::vector, 1.0);
    double expect = 92.0 - 240.0 * std::exp(-1.0) + 320.0 * std::exp(-4.0);
    CHECK(std::abs(v1 - expect) < 1e-12);
    CHECK(std::abs(v1 - 9.5699385) < 1e-6);

    PotentialModel empty;
    CHECK(evaluate(empty, Part::vector, 2.0) == 0.0);
    CHECK(evaluate(empty, Part::scalar, 2.0) == 0.0);

    PotentialModel hyd({PotentialTerm::coulomb(-1.0)}, {});
    CHECK(std::abs(evaluate(hyd, Part::vector, 2.0) + 0.5) < 1e-15);

    CHECK_THROWS_AS(evaluate(m, Part::vector, 0.0), DomainError);
    CHECK_THROWS_AS(evaluate(m, Part::vector, -1.0), DomainError);
}

TEST_CASE("duplicate coulomb/linear/quadratic terms merge") {
    PotentialModel m({PotentialTerm::coulomb(2.0), PotentialTerm::coulomb(-5.0),
                      PotentialTerm::linear(1.0), PotentialTerm::linear(0.5)},
                     {});
    int n_coul = 0, n_lin = 0;
    for (const auto& t : m.vector_terms) {
        if (t.kind == TermKind::coulomb) {
            ++n_coul;
            CHECK(t.strength == -3.0);
        }
        if (t.kind == TermKind::linear) {
            ++n_lin;
            CHECK(t.strength == 1.5);
        }
    }
    CHECK(n_coul == 1);
    CHECK(n_lin == 1);
}

TEST_CASE("vector_derivative: analytic values and finite differences") {
    PotentialModel hyd({PotentialTerm::coulomb(-1.0)}, {});
    CHECK(std::abs(vector_derivative(hyd, 2.0) - 0.25) < 1e-15);

    PotentialModel m = couls_model();
    double d1 = vector_derivative(m, 1.0);
    double expect = -92.0 + 480.0 * std::exp(-1.0) - 1600.0 * std::exp(-4.0);
    CHECK(std::abs(d1 - expect) < 1e-11);
    CHECK(std::abs(d1 - 55.27711) < 1e-5);

    for (double r : {0.3, 1.0, 2.7, 8.0}) {
        double h = 1e-6 * r;
        double fd = (evaluate(m, Part::vector, r + h) - evaluate(m, Part::vector, r - h)) /
                    (2.0 * h);
        CHECK(std::abs(vector_derivative(m, r) - fd) <
              1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("effective_scalar closed form") {
    auto s0 = effective_scalar([](double) { return 0.0; }, 1.0, 137.036);
    CHECK(s0(3.0) == 0.0);

    auto sr = effective_scalar([](double r) { return r; }, 1.0, 137.036);
    CHECK(std::abs(sr(1.0) - 1.0000266256) < 1e-9);

    auto sr2 = effective_scalar([](double r) { return r * r; }, 1.0, 137.036);
    CHECK(std::abs(sr2(2.0) - 4.00042601) < 1e-7);

    // monotone in S for S >= 0
    auto u = effective_scalar([](double r) { return r; }, 1.0, 10.0);
    auto u2 = effective_scalar([](double r) { return 2.0 * r; }, 1.0, 10.0);
    for (double r : {0.1, 1.0, 5.0}) CHECK(u2(r) > u(r));
}

TEST_CASE("split: pure coulomb vector model") {
    PotentialModel hyd({PotentialTerm::coulomb(-1.0)}, {});
    SplitModel s = split(hyd, 1.0, 137.036);
    CHECK(s.v_coulomb == -1.0);
    CHECK(!s.has_v_short);
    CHECK(s.v_short(2.0) == 0.0);
    CHECK(std::abs(s.coupling_short(2.0) - 0.25) < 1e-15);  // -Z/r^2 with Z=-1
    CHECK(s.coupling_poly[0] == 0.0);
    CHECK(s.coupling_poly[1] == 0.0);
}

TEST_CASE("split: screened-Coulomb model") {
    SplitModel s = split(couls_model(), 1.0, 137.036);
    CHECK(s.v_coulomb == 92.0);
    CHECK(s.has_v_short);
    double vs1 = s.v_short(1.0);
    double expect = -240.0 * std::exp(-1.0) + 320.0 * std::exp(-4.0);
    CHECK(std::abs(vs1 - expect) < 1e-12);
    CHECK(std::abs(vs1 + 82.4300615) < 1e-6);
    CHECK(s.v_short_origin_power == -1);
    CHECK(s.coupling_origin_power == -2);
}

TEST_CASE("split: bare linear scalar expands U exactly") {
    PotentialModel m({}, {PotentialTerm::linear(1.0)});
    const double c = 137.036;
    SplitModel s = split(m, 1.0, c);
    CHECK(s.u_poly[1] == 1.0);
    CHECK(std::abs(s.u_poly[2] - 1.0 / (2.0 * c * c)) < 1e-18);
    CHECK(std::abs(s.u_poly[2] - 2.6626e-5) < 1e-9);
    CHECK(s.u_poly[3] == 0.0);
    CHECK(!s.has_u_short);
    CHECK(s.u_short(3.0) == 0.0);
}

TEST_CASE("split: effective_u mode passes U through") {
    PotentialModel m({}, {PotentialTerm::linear(1.0)}, ScalarMeaning::effective_u);
    SplitModel s = split(m, 1.0, 137.036);
    CHECK(s.u_poly[1] == 1.0);
    CHECK(s.u_poly[2] == 0.0);
    CHECK(!s.has_u_short);
}

TEST_CASE("split reconstruction over log-spaced radii") {
    const double mass = 1.0, c = 137.036;
    PotentialModel models[] = {
        couls_model(),
        PotentialModel({PotentialTerm::coulomb(-1.0)}, {PotentialTerm::linear(1.0)}),
        PotentialModel({PotentialTerm::coulomb(-1.0)},
                       {PotentialTerm::quadratic(0.5)}, ScalarMeaning::effective_u),
        PotentialModel({PotentialTerm::linear(0.3), PotentialTerm::screened(2.0, 1.5)},
                       {PotentialTerm::coulomb(-0.2), PotentialTerm::linear(0.7),
                        PotentialTerm::screened(1.0, 2.0)}),
    };
    for (const auto& m : models) {
        SplitModel s = split(m, mass, c);
        auto u_full = model_effective_scalar(m, mass, c);
        for (int k = 0; k < 100; ++k) {
            double r = 1e-3 * std::pow(50.0 / 1e-3, k / 99.0);
            double v_ref = evaluate(m, Part::vector, r);
            double v_split = s.long_range_v(r) + s.v_short(r);
            CHECK(std::abs(v_split - v_ref) < 1e-13 * std::max(1.0, std::abs(v_ref)));
            double u_ref = u_full(r);
            double u_split = s.long_range_u(r) + s.u_short(r);
            CHECK(std::abs(u_split - u_ref) < 1e-13 * std::max(1.0, std::abs(u_ref)));
            double d_ref = vector_derivative(m, r);
            double d_split =
                s.coupling_short(r) + s.coupling_poly[0] + s.coupling_poly[1] * r;
            CHECK(std::abs(d_split - d_ref) < 1e-13 * std::max(1.0, std::abs(d_ref)));
        }
    }
}

TEST_CASE("tabulated terms: spline value and derivative") {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 40; ++i) {
        double x = 0.05 + i * 0.25;
        xs.push_back(x);
        ys.push_back(std::exp(-x) * x);
    }
    PotentialTerm t = PotentialTerm::tabulated(xs, ys);
    for (double r : {1.0, 3.3, 7.9}) {
        CHECK(std::abs(t.value(r) - std::exp(-r) * r) < 1e-4);
        double fd = (t.value(r + 1e-6) - t.value(r - 1e-6)) / 2e-6;
        CHECK(std::abs(t.derivative(r) - fd) < 1e-6);
    }
    CHECK(t.value(1e4) == 0.0);

    CHECK_THROWS_AS(PotentialTerm::tabulated({1.0, 1.0, 2.0}, {0.0, 0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(PotentialTerm::screened(1.0, -2.0), DomainError);
}
