#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "fv/common.hpp"

namespace fv::potentials {

/// Natural cubic spline with analytic derivative; zero beyond the last sample,
/// clamped below the first.
class CubicSpline {
  public:
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double value(double r) const;
    double derivative(double r) const;
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }

  private:
    std::vector<double> x_, y_, m_;  // m_: second derivatives at the knots
};

enum class TermKind { coulomb, screened, linear, quadratic, tabulated };

struct PotentialTerm {
    TermKind kind = TermKind::coulomb;
    double strength = 0.0;  ///< Z, A, a1 or a2
    double range = 0.0;     ///< screening rate (screened terms only)
    std::shared_ptr<const CubicSpline> table;
    std::string table_source;  ///< where a tabulated term was loaded from

    static PotentialTerm coulomb(double z);
    static PotentialTerm screened(double amplitude, double rate);
    static PotentialTerm linear(double a1);
    static PotentialTerm quadratic(double a2);
    static PotentialTerm tabulated(std::vector<double> r, std::vector<double> v);

    double value(double r) const;
    double derivative(double r) const;
};

/// Whether the scalar term list specifies S itself or the effective scalar U
/// directly (U = S + S^2/2mc^2 relates the two).
enum class ScalarMeaning { bare_s, effective_u };

enum class Part { vector, scalar };

/// Radial potential model: V from the vector terms, S (or U) from the scalar
/// terms. Construction merges duplicate coulomb/linear/quadratic terms.
struct PotentialModel {
    std::vector<PotentialTerm> vector_terms;
    std::vector<PotentialTerm> scalar_terms;
    ScalarMeaning scalar_meaning = ScalarMeaning::bare_s;

    PotentialModel() = default;
    PotentialModel(std::vector<PotentialTerm> vec, std::vector<PotentialTerm> scal,
                   ScalarMeaning meaning = ScalarMeaning::bare_s);
};

double evaluate(const PotentialModel& model, Part part, double r);
double vector_derivative(const PotentialModel& model, double r);

/// U(r) = S(r) + S(r)^2 / (2 m c^2).
std::function<double(double)> effective_scalar(std::function<double(double)> s, double mass,
                                               double c);

/// The model's effective scalar as a function of r (honors scalar_meaning).
std::function<double(double)> model_effective_scalar(const PotentialModel& model, double mass,
                                                     double c);

/// Long-range/short-range decomposition. The long-range coefficients define
/// the band-structured reference Hamiltonian; everything else is left as
/// radial functions to be represented on the finite basis.
struct SplitModel {
    double v_coulomb = 0.0;
    std::array<double, 5> v_poly{};  ///< V coefficients of r^0..r^4
    double u_coulomb = 0.0;
    std::array<double, 5> u_poly{};  ///< U coefficients of r^0..r^4
    std::array<double, 2> coupling_poly{};  ///< dV/dr coefficients of r^0, r^1

    std::function<double(double)> v_short, u_short, coupling_short;
    bool has_v_short = false, has_u_short = false, has_coupling_short = false;
    int v_short_origin_power = 0, u_short_origin_power = 0, coupling_origin_power = 0;

    double long_range_v(double r) const;
    double long_range_u(double r) const;
};

SplitModel split(const PotentialModel& model, double mass, double c);

}  // namespace fv::potentials
