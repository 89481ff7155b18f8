#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "fv/common.hpp"

namespace fv::linalg {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// Complex value stored as mantissa * 2^exponent2, so determinants of large
/// matrices never overflow. The mantissa modulus is kept in [1, 2) unless the
/// value is exactly zero.
struct ScaledComplex {
    Complex mantissa{0.0, 0.0};
    long exponent2 = 0;

    static ScaledComplex normalized(Complex m, long e2 = 0);
    bool is_zero() const { return mantissa == Complex(0.0, 0.0); }
    /// Collapses to a plain complex; may overflow/underflow for extreme exponents.
    Complex value() const;
    /// this / other as a plain complex.
    Complex ratio(const ScaledComplex& other) const;
    ScaledComplex operator*(const ScaledComplex& other) const;
};

/// det(m) by partially pivoted LU (pivot of maximum modulus).
Complex lu_determinant(const ComplexMatrix& m);

/// Same as lu_determinant but with separate binary exponent, safe for any size.
ScaledComplex lu_determinant_scaled(const ComplexMatrix& m);

/// Solves m * X = rhs. Throws SingularityError (with the offending pivot
/// magnitude) when m is singular to working precision.
ComplexMatrix solve_linear(const ComplexMatrix& m, const ComplexMatrix& rhs);

/// Infinite block-tridiagonal operator. Blocks are produced on demand by the
/// generator rules; an explicit prefix may be stored for cheap repeated access.
/// diagonal(i) is block (i,i); super(i) is block (i,i+1); sub(i) is block (i+1,i).
class BlockTridiagonalOperator {
  public:
    using BlockRule = std::function<ComplexMatrix(std::size_t)>;

    BlockTridiagonalOperator(int block_size, BlockRule diagonal_rule, BlockRule super_rule,
                             BlockRule sub_rule);

    /// Stores blocks 0..count-1 so the prefix is not regenerated on every access.
    void cache_prefix(std::size_t count);

    int block_size() const { return block_size_; }
    ComplexMatrix diagonal(std::size_t i) const;
    ComplexMatrix super(std::size_t i) const;
    ComplexMatrix sub(std::size_t i) const;

  private:
    int block_size_;
    BlockRule diagonal_rule_, super_rule_, sub_rule_;
    std::vector<ComplexMatrix> diagonal_blocks_, super_blocks_, sub_blocks_;
};

/// Backward tail recursion C_K = D_K, C_i = D_i - U_i C_{i+1}^{-1} L_{i+1},
/// run from depth K down to block index `stop`. Returns C_stop.
ComplexMatrix tail_recursion(const BlockTridiagonalOperator& op, std::size_t depth,
                             std::size_t stop);

struct CornerResult {
    ComplexMatrix corner;
    std::size_t depth_used = 0;
    double change = 0.0;    ///< last max-norm relative change between iterates
    bool accelerated = false;
};

/// Top-left corner of op^{-1}, spanning `corner_blocks` blocks. The tail depth
/// is doubled until the corner changes by less than tol in max norm; if the
/// doubling schedule stalls, a Wynn epsilon extrapolation of the corner
/// iterates is attempted before giving up.
CornerResult continued_fraction_corner(const BlockTridiagonalOperator& op,
                                       std::size_t corner_blocks, double tol,
                                       std::size_t max_depth);

/// Inverse of the leading (blocks x blocks) section of op, with the last
/// diagonal block replaced by `closing` (a tail-corrected block).
ComplexMatrix corner_inverse(const BlockTridiagonalOperator& op, std::size_t blocks,
                             const ComplexMatrix& closing);

struct RootBracket {
    double lo, hi;
    double f_lo, f_hi;

    RootBracket(double lo_, double hi_, double flo, double fhi);
};

/// Bisection-safeguarded secant search. Returns the abscissa of smallest |f|
/// once the bracket width has shrunk below tol.
double find_real_root(const std::function<double(double)>& f, RootBracket bracket, double tol);

/// Muller's method (three-point quadratic interpolation) for a complex zero
/// near `guess`. Deterministic: the two auxiliary starting points are derived
/// from the guess alone. Invariant under rescaling f by a nonzero constant.
Complex find_complex_root(const std::function<Complex(Complex)>& f, Complex guess, double tol,
                          int max_iter);

/// Wynn epsilon extrapolation of a scalar sequence. Returns the best even-column
/// estimate together with an error measure (change across the final step).
std::pair<Complex, double> wynn_epsilon(const std::vector<Complex>& seq);

/// Entrywise Wynn extrapolation of a matrix sequence; the error is the largest
/// per-entry estimate.
std::pair<ComplexMatrix, double> wynn_matrix(const std::vector<ComplexMatrix>& iterates);

/// Convergence engine shared by the corner and closing-block computations:
/// evaluates eval(K) on a doubling schedule, extrapolating the iterates with
/// Wynn epsilon when plain convergence is slow (marginal modes fall off like
/// 1/K, which is geometric in the doubling index), and falling back to an
/// arithmetic-schedule extrapolation when the doubling budget is exhausted
/// (oscillatory tails against a continuum).
CornerResult converge_tail_iterates(const std::function<ComplexMatrix(std::size_t)>& eval,
                                    std::size_t start_depth, double tol, std::size_t max_depth);

}  // namespace fv::linalg
