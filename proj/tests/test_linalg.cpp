#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "fv/linalg.hpp"
#include "oracles.hpp"

using namespace fv;
using namespace fv::linalg;
using std::complex;

TEST_CASE("lu_determinant on identity and 2x2") {
    CHECK(std::abs(lu_determinant(ComplexMatrix::Identity(5, 5)) - 1.0) < 1e-14);
    ComplexMatrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    CHECK(std::abs(lu_determinant(m) - 3.0) < 1e-13);
}

TEST_CASE("lu_determinant matches cofactor expansion on random 6x6") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexMatrix m(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m(i, j) = Complex(u(rng), u(rng));
    Complex lu = lu_determinant(m);
    Complex laplace = test_oracles::laplace_determinant(m);
    CHECK(std::abs(lu - laplace) <= 1e-12 * std::abs(laplace));
}

TEST_CASE("lu_determinant rejects non-square input") {
    CHECK_THROWS_AS(lu_determinant(ComplexMatrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("determinant is multiplicative on random 5x5 pairs") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        ComplexMatrix a(5, 5), b(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                a(i, j) = Complex(u(rng), u(rng));
                b(i, j) = Complex(u(rng), u(rng));
            }
        Complex lhs = lu_determinant(a * b);
        Complex rhs = lu_determinant(a) * lu_determinant(b);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}

TEST_CASE("scaled determinant agrees with plain determinant") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    ComplexMatrix m(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) m(i, j) = Complex(u(rng), u(rng));
    Complex plain = lu_determinant(m);
    ScaledComplex scaled = lu_determinant_scaled(m);
    CHECK(std::abs(scaled.value() - plain) <= 1e-12 * std::abs(plain));
}

TEST_CASE("solve_linear trivial cases") {
    ComplexMatrix b(3, 1);
    b << 1.0, 2.0, 3.0;
    ComplexMatrix x = solve_linear(ComplexMatrix::Identity(3, 3), b);
    CHECK((x - b).cwiseAbs().maxCoeff() < 1e-14);

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    ComplexMatrix rhs(2, 1);
    rhs << 2.0, 4.0;
    ComplexMatrix y = solve_linear(d, rhs);
    CHECK(std::abs(y(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(y(1, 0) - 1.0) < 1e-14);
}

TEST_CASE("solve_linear residual on random 8x8 system") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexMatrix m(8, 8), rhs(8, 2);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) m(i, j) = Complex(u(rng), u(rng));
        rhs(i, 0) = Complex(u(rng), u(rng));
        rhs(i, 1) = Complex(u(rng), u(rng));
    }
    ComplexMatrix x = solve_linear(m, rhs);
    double resid = (m * x - rhs).cwiseAbs().maxCoeff();
    CHECK(resid <= 1e-10 * rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("solve_linear flags singular matrices with pivot magnitude") {
    ComplexMatrix s(2, 2);
    s << 1.0, 2.0, 2.0, 4.0;
    ComplexMatrix rhs(2, 1);
    rhs << 1.0, 1.0;
    try {
        solve_linear(s, rhs);
        FAIL("expected SingularityError");
    } catch (const SingularityError& e) {
        CHECK(e.pivot_magnitude < 1e-12);
    }
}

namespace {

BlockTridiagonalOperator scalar_toeplitz(double diag, double off) {
    auto d = [diag](std::size_t) { return ComplexMatrix::Constant(1, 1, diag); };
    auto o = [off](std::size_t) { return ComplexMatrix::Constant(1, 1, off); };
    return BlockTridiagonalOperator(1, d, o, o);
}

}  // namespace

TEST_CASE("corner of block-diagonal operator is blockwise inverse") {
    auto d = [](std::size_t i) {
        ComplexMatrix m(2, 2);
        double s = 1.0 + static_cast<double>(i);
        m << 2.0 * s, 0.5, 0.5, 3.0 * s;
        return m;
    };
    auto z = [](std::size_t) { return ComplexMatrix::Zero(2, 2); };
    BlockTridiagonalOperator op(2, d, z, z);
    auto res = continued_fraction_corner(op, 3, 1e-12, 10000);
    for (int i = 0; i < 3; ++i) {
        ComplexMatrix di = d(i);
        ComplexMatrix gi = res.corner.block(2 * i, 2 * i, 2, 2);
        CHECK((di * gi - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    }
    // off-diagonal corner blocks vanish
    CHECK(res.corner.block(0, 2, 2, 2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("infinite Toeplitz tridiagonal corner reproduces the fixed point") {
    // diag 2, off-diag -1: the (1,1) entry of the inverse solves x = 1/(2-x), x -> 1.
    auto op = scalar_toeplitz(2.0, -1.0);
    auto res = continued_fraction_corner(op, 1, 1e-9, 2000000);
    CHECK(std::abs(res.corner(0, 0).real() - 1.0) < 1e-4);
    CHECK(std::abs(res.corner(0, 0).imag()) < 1e-12);
}

TEST_CASE("corner agrees with direct truncation at K=2000") {
    // Strictly diagonally dominant tail so both routes converge fast.
    auto op = scalar_toeplitz(2.5, -1.0);
    auto res = continued_fraction_corner(op, 4, 1e-13, 1 << 22);
    std::vector<double> diag(2000, 2.5), off(1999, -1.0);
    std::vector<double> col = test_oracles::thomas_inverse_first_columns(diag, off, 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(res.corner(i, 0).real() - col[i]) < 1e-10);
}

TEST_CASE("corner_inverse matches dense inverse on a random prefix") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int bs = 3, p = 5;
    std::vector<ComplexMatrix> D(p), U(p), L(p);
    for (int i = 0; i < p; ++i) {
        D[i] = ComplexMatrix::Identity(bs, bs) * 4.0;
        U[i] = ComplexMatrix(bs, bs);
        L[i] = ComplexMatrix(bs, bs);
        for (int a = 0; a < bs; ++a)
            for (int b = 0; b < bs; ++b) {
                D[i](a, b) += Complex(0.3 * u(rng), 0.3 * u(rng));
                U[i](a, b) = Complex(u(rng), u(rng));
                L[i](a, b) = Complex(u(rng), u(rng));
            }
    }
    BlockTridiagonalOperator op(
        bs, [&](std::size_t i) { return D[i]; }, [&](std::size_t i) { return U[i]; },
        [&](std::size_t i) { return L[i]; });
    ComplexMatrix dense = ComplexMatrix::Zero(p * bs, p * bs);
    for (int i = 0; i < p; ++i) {
        dense.block(i * bs, i * bs, bs, bs) = D[i];
        if (i + 1 < p) {
            dense.block(i * bs, (i + 1) * bs, bs, bs) = U[i];
            dense.block((i + 1) * bs, i * bs, bs, bs) = L[i];
        }
    }
    ComplexMatrix g = corner_inverse(op, p, D[p - 1]);
    ComplexMatrix ref = dense.partialPivLu().solve(ComplexMatrix::Identity(p * bs, p * bs));
    CHECK((g - ref).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("continued-fraction corner satisfies the prefix residual bound") {
    auto op = scalar_toeplitz(2.5, -1.0);
    const double tol = 1e-13;
    auto res = continued_fraction_corner(op, 6, tol, 1 << 22);
    // Prefix with tail-corrected closing block.
    ComplexMatrix closing = tail_recursion(op, res.depth_used, 5);
    ComplexMatrix jp = ComplexMatrix::Zero(6, 6);
    for (int i = 0; i < 6; ++i) {
        jp(i, i) = 2.5;
        if (i + 1 < 6) {
            jp(i, i + 1) = -1.0;
            jp(i + 1, i) = -1.0;
        }
    }
    jp(5, 5) = closing(0, 0);
    CHECK((jp * res.corner - ComplexMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 10.0 * tol);
}

TEST_CASE("find_real_root basics") {
    auto lin = [](double x) { return x - 1.0; };
    RootBracket b1(0.0, 2.0, lin(0.0), lin(2.0));
    CHECK(std::abs(find_real_root(lin, b1, 1e-12) - 1.0) < 1e-10);

    auto sq = [](double x) { return x * x - 2.0; };
    RootBracket b2(1.0, 2.0, sq(1.0), sq(2.0));
    double r = find_real_root(sq, b2, 1e-10);
    double oracle = test_oracles::bisect(sq, 1.0, 2.0, 1e-12);
    CHECK(std::abs(r - 1.41421356) < 1e-8);
    CHECK(std::abs(r - oracle) < 1e-9);

    auto c = [](double x) { return std::cos(x); };
    RootBracket b3(1.0, 2.0, c(1.0), c(2.0));
    CHECK(std::abs(find_real_root(c, b3, 1e-12) - M_PI / 2.0) < 1e-8);
}

TEST_CASE("find_real_root rejects brackets without sign change") {
    CHECK_THROWS_AS(RootBracket(0.0, 1.0, 1.0, 2.0), DomainError);
}

TEST_CASE("Muller solves the stated examples") {
    auto f1 = [](Complex z) { return z * z + 1.0; };
    Complex r1 = find_complex_root(f1, Complex(0.2, 0.8), 1e-12, 100);
    CHECK(std::abs(r1 - Complex(0.0, 1.0)) < 1e-10);

    auto f2 = [](Complex z) { return z - Complex(3.0, -2.0); };
    Complex r2 = find_complex_root(f2, Complex(0.0, 0.0), 1e-12, 100);
    CHECK(std::abs(r2 - Complex(3.0, -2.0)) < 1e-10);

    auto f3 = [](Complex z) { return std::exp(z) - 2.0; };
    Complex r3 = find_complex_root(f3, Complex(1.0, 0.0), 1e-12, 100);
    CHECK(std::abs(r3 - std::log(2.0)) < 1e-10);
}

TEST_CASE("Muller is invariant under rescaling the function") {
    for (Complex scale : {Complex(1e8, 0.0), Complex(0.0, -3.0), Complex(1e-7, 2e-7)}) {
        auto f = [scale](Complex z) { return scale * (z * z + 1.0); };
        Complex r = find_complex_root(f, Complex(0.2, 0.8), 1e-11, 100);
        CHECK(std::abs(r - Complex(0.0, 1.0)) < 1e-9);
    }
}

TEST_CASE("Muller reports iterate history on failure") {
    auto f = [](Complex z) { return std::exp(z); };  // no zeros anywhere
    CHECK_THROWS_AS(find_complex_root(f, Complex(0.0, 0.0), 1e-14, 8), ConvergenceError);
}

TEST_CASE("wynn_epsilon sums a geometric tail exactly") {
    // partial sums of sum 0.5^k = 2
    std::vector<Complex> s;
    Complex acc = 0.0;
    double t = 1.0;
    for (int k = 0; k < 8; ++k) {
        acc += t;
        t *= 0.5;
        s.push_back(acc);
    }
    auto [val, err] = wynn_epsilon(s);
    CHECK(std::abs(val - 2.0) < 1e-12);
}

TEST_CASE("wynn_epsilon accelerates the alternating log series") {
    std::vector<Complex> s;
    Complex acc = 0.0;
    for (int k = 1; k <= 12; ++k) {
        acc += ((k % 2) ? 1.0 : -1.0) / static_cast<double>(k);
        s.push_back(acc);
    }
    auto [val, err] = wynn_epsilon(s);
    CHECK(std::abs(val - std::log(2.0)) < 1e-8);
}
