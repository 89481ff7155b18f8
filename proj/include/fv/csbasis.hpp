#pragma once

#include <Eigen/Dense>
#include <functional>

#include "fv/common.hpp"
#include "fv/quadrature.hpp"

namespace fv::csbasis {

/// One radial Coulomb-Sturmian channel: <r|n l b> = N_{nl} (2br)^{l+1}
/// e^{-br} L_n^{(2l+1)}(2br), normalized so that <n|1/r|n'> = delta_{nn'}.
struct BasisSpec {
    int l = 0;
    double b = 1.0;
    int n_max = 0;

    BasisSpec() = default;
    BasisSpec(int l_, double b_, int n_max_);
    int size() const { return n_max + 1; }
};

enum class RadialOp { overlap, inverse_r, kinetic, r_power, screened, general, cross_power };

/// Matrix of a radial operator between Coulomb-Sturmian channels, tagged with
/// the operator kind and a declared half-bandwidth (-1 means dense).
struct RadialMatrix {
    Eigen::MatrixXd mat;
    RadialOp kind = RadialOp::general;
    BasisSpec bra, ket;
    int half_bandwidth = -1;
};

double cs_function(int n, const BasisSpec& spec, double r);

/// Powers of the Laguerre Jacobi matrix X (diag 2n+2l+2, off-diagonal
/// -sqrt((n+1)(n+2l+2))) over a radial index window. In this basis every
/// closed-form operator is a polynomial in X:
///   <n|1/r|n'> = I,  S = X/(2b),  <n|r^p|n'> = X^{p+1}/(2b)^{p+1}.
/// Entries are exact for n, n' in [lo, hi]; the window is padded internally so
/// band truncation never leaks in.
class XPowers {
  public:
    XPowers(int l, int max_power, long lo, long hi);
    double entry(int power, long n, long np) const;
    int max_power() const { return max_power_; }

  private:
    long lo_ = 0, base_ = 0;
    int max_power_ = 0;
    std::vector<Eigen::MatrixXd> pows_;
};

RadialMatrix overlap_matrix(const BasisSpec& spec);
RadialMatrix inverse_r_matrix(const BasisSpec& spec);
RadialMatrix kinetic_matrix(const BasisSpec& spec, double mass);
RadialMatrix power_r_matrix(const BasisSpec& spec, int power);  // power = 1 or 2

/// <n| e^{-ar}/r |n'> by Gauss-Laguerre quadrature with the kernel rate
/// matched to 2b+a (the integrand is then polynomial x kernel, so the rule is
/// exact). A doubled-order evaluation guards against accuracy loss.
RadialMatrix screened_coulomb_matrix(const BasisSpec& spec, double a, int order_hint = 0);

/// General matrix <n,bra| f |n',ket> by quadrature; bra and ket may carry
/// different l (and b). origin_power is the leading exponent of f at r -> 0
/// (e.g. -2 for the Coulomb derivative); integrands with a non-integrable
/// singularity are rejected.
RadialMatrix cross_l_matrix(const BasisSpec& bra, const BasisSpec& ket,
                            const std::function<double(double)>& f, int origin_power = 0,
                            int order_hint = 0);

/// Closed band form of <n, l+1 | r^p | n', l> (same b on both sides), derived
/// from the Laguerre ladder identity L^{(a)}_n = L^{(a+2)}_n - 2 L^{(a+2)}_{n-1}
/// + L^{(a+2)}_{n-2}. Exact at any index; used when a confining vector
/// potential pushes the channel coupling into the long-range band.
double cross_power_entry(int l_ket, double b, const XPowers& xp_bra, int power, long n_bra,
                         long n_ket);

/// Dense version of cross_power_entry over the stored basis range.
RadialMatrix cross_l_power_matrix(const BasisSpec& bra, const BasisSpec& ket, int power);

/// Table of basis function values at the rule's nodes: row n holds
/// cs_function(n, spec, r_i).
Eigen::MatrixXd basis_value_table(const BasisSpec& spec, const QuadratureRule& rule);

}  // namespace fv::csbasis
