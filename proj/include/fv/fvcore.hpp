#pragma once

#include <utility>

#include "fv/common.hpp"
#include "fv/csbasis.hpp"
#include "fv/linalg.hpp"
#include "fv/potentials.hpp"

namespace fv::fvcore {

enum class Kind { schrodinger, fv0, fv12 };

/// (l_plus, l_minus) = (j - 1/2, j + 1/2) for half-integer j = two_j/2.
std::pair<int, int> project_channels(int two_j);

/// Angular matrix element of e_r.sigma between spin-orbit partners at fixed j:
/// 1 for a channel flip, 0 within a channel (parity). Composing two flips is
/// the identity, (e_r.sigma)^2 = 1.
double angular_flip_element(bool same_channel);

/// Angular content of a problem: a single l for Schrodinger/FV0, the coupled
/// (l_plus, l_minus) pair at fixed j for FV1/2. component_dim counts
/// (Feshbach-Villars components) x (spin-orbit channels).
struct ChannelSpace {
    Kind kind = Kind::schrodinger;
    int l = 0;      ///< schrodinger / fv0
    int two_j = 1;  ///< fv12 (odd, >= 1)

    static ChannelSpace schrodinger(int l);
    static ChannelSpace fv0(int l);
    static ChannelSpace fv12(int two_j);

    int n_channels() const { return kind == Kind::fv12 ? 2 : 1; }
    int fv_components() const { return kind == Kind::schrodinger ? 1 : 2; }
    int component_dim() const { return n_channels() * fv_components(); }
    /// orbital momentum of channel c (c = 0 is l_plus for fv12)
    int channel_l(int c) const;
    std::string label() const;
};

struct Numerics {
    double cf_tol = 1e-12;
    std::size_t cf_max_depth = 200000;
    int quadrature_factor = 3;
};

/// Immutable problem bundle: system, channels, potential split, basis, and the
/// assembled short-range matrix. All evaluation entry points are pure in
/// (problem, E) and safe to call concurrently at different energies.
struct FVProblem {
    PhysicalSystem system;
    ChannelSpace channel;
    potentials::PotentialModel model;
    potentials::SplitModel split;
    double b = 1.0;
    int n_max = 0;  ///< rounded up so the radial count fills whole blocks
    Numerics numerics;
    bool coupling_enabled = true;

    linalg::ComplexMatrix short_range;  ///< dense, dim() x dim()
    int radial_halfwidth = 1;           ///< long-range band reach in radial index

    int radial_count() const { return n_max + 1; }
    int component_dim() const { return channel.component_dim(); }
    int dim() const { return radial_count() * component_dim(); }
    std::size_t corner_blocks() const { return radial_count() / radial_halfwidth; }
    int block_size() const { return radial_halfwidth * component_dim(); }
    /// reported energies are E_total minus this (rest mass for the FV kinds)
    double energy_offset() const {
        return channel.kind == Kind::schrodinger ? 0.0 : system.mc2();
    }
};

FVProblem make_problem(const PhysicalSystem& system, const ChannelSpace& channel,
                       const potentials::PotentialModel& model, double b, int n_max,
                       const Numerics& numerics = {}, bool coupling_enabled = true);

/// E-parameterized builder of the long-range operator J(E) = E*S - H_LR,
/// grouped into blocks of `radial_halfwidth` radial indices so the banded
/// structure becomes block-tridiagonal. Blocks at arbitrary depth come from
/// the closed forms, so the tail recursion can run as deep as it needs.
class LongRangeAssembler {
  public:
    explicit LongRangeAssembler(const FVProblem& problem) : p_(&problem) {}
    linalg::BlockTridiagonalOperator operator()(Complex e_total) const;
    /// dense cd x cd block of J(E) at radial indices (n, np)
    linalg::ComplexMatrix radial_block(Complex e_total, long n, long np) const;

  private:
    const FVProblem* p_;
};

inline LongRangeAssembler assemble_long_range(const FVProblem& p) {
    return LongRangeAssembler(p);
}

/// Dense short-range matrix: on-channel P (x) U_s + I2 (x) V_s blocks, and for
/// fv12 the purely imaginary -(i/2mc) P (x) <dV/dr> coupling between the
/// channels. Identical to the copy cached in FVProblem.
linalg::ComplexMatrix assemble_short_range(const FVProblem& problem);

struct TailResult {
    linalg::ComplexMatrix closing;  ///< tail-corrected last diagonal block
    std::size_t depth = 0;
    bool accelerated = false;
};

/// Backward continued-fraction recursion with a doubling schedule (and Wynn
/// extrapolation of the closing-block iterates if the schedule stalls near the
/// continuum, where the recursion turns oscillatory).
TailResult tail_closing(const linalg::BlockTridiagonalOperator& op, std::size_t prefix_blocks,
                        double tol, std::size_t max_depth);

struct JhatResult {
    linalg::ComplexMatrix jhat;  ///< truncated J(E) with tail-corrected last block
    std::size_t cf_depth = 0;
};

/// J(E) restricted to the kept basis, with the last diagonal block replaced by
/// the continued-fraction closing; its inverse is the Green's corner.
/// tail_depth = 0 converges the closing adaptively; a positive depth evaluates
/// the tail at exactly that depth (pairs with greens_corner at equal depth).
JhatResult j_hat(const FVProblem& problem, Complex e_reported, std::size_t tail_depth = 0);

/// Corner of J(E)^{-1} over the kept basis (block-diagonal over the two
/// channels for fv12, since the coupling is short-range). tail_depth as above.
linalg::ComplexMatrix greens_corner(const FVProblem& problem, Complex e_reported,
                                    std::size_t tail_depth = 0);

/// det(I - G(E) V_short). Equals one identically when the model is purely
/// long-range.
Complex fredholm_determinant(const FVProblem& problem, Complex e_reported);

struct SpectralDet {
    linalg::ScaledComplex det;
    std::size_t cf_depth = 0;
};

/// det(Jhat(E) - V_short): the spectral condition used by the solvers. Shares
/// its zeros with the Fredholm determinant where V_short is nonzero, and also
/// vanishes at the reference spectrum when V_short is zero (pure long-range
/// problems), with no poles along the scan.
///
/// tail_depth = 0 runs the adaptive continued-fraction convergence (corner
/// metric, Wynn-accelerated doubling). A positive tail_depth evaluates at that
/// fixed recursion depth: the determinant's zeros stabilize orders of
/// magnitude earlier than the corner itself (slow tail modes enter the
/// determinant only multiplicatively), so the solvers fix the depth per scan
/// and verify root stability by re-refining at twice the depth.
SpectralDet spectral_determinant(const FVProblem& problem, Complex e_reported,
                                 std::size_t tail_depth = 0);

/// Scan-level default for the fixed-depth evaluation.
std::size_t default_tail_depth(const FVProblem& problem);

/// Jhat(E) - V_short at a fixed tail depth; the matrix whose determinant the
/// solvers drive to zero (used there for null-vector extraction as well).
linalg::ComplexMatrix spectral_matrix(const FVProblem& problem, Complex e_reported,
                                      std::size_t tail_depth);

}  // namespace fv::fvcore
