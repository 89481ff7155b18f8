#pragma once

#include <string>
#include <vector>

#include "fv/fvcore.hpp"

namespace fv::solver {

struct SearchWindow {
    double e_min, e_max;
    int grid_points = 96;
    double refine_tol = 1e-10;

    SearchWindow(double lo, double hi, int grid = 96, double tol = 1e-10);
};

enum class StateKind { bound, resonance };

struct SpectralResult {
    Complex energy{0.0, 0.0};  ///< reported convention (rest mass subtracted)
    StateKind kind = StateKind::bound;
    double determinant_residual = 0.0;  ///< |D| at the root relative to the scan scale
    int basis_n_max = 0;
    double basis_b = 0.0;
    std::size_t cf_depth = 0;
    std::string channel;
    int dominant_l = -1;  ///< fv12 only; -1 otherwise
    int multiplicity = 1;
    std::string warning;
};

/// Determinants on an energy grid at a fixed tail depth. threads <= 0 uses the
/// machine default; threads == 1 is the serial reference path. Results are
/// bitwise independent of the thread count.
std::vector<linalg::ScaledComplex> scan_determinants(const fvcore::FVProblem& problem,
                                                     const std::vector<double>& energies,
                                                     std::size_t tail_depth, int threads = 0);

/// Grid scan for sign changes of Re D, bisection-secant refinement of each
/// bracket, and a |D| local-minimum fallback for even-order touches. Every
/// root is re-refined at doubled tail depth until it stops moving. Results
/// sorted ascending; near-degenerate roots are merged with a multiplicity.
std::vector<SpectralResult> find_bound_states(const fvcore::FVProblem& problem,
                                              const SearchWindow& window, int threads = 0);

/// Muller refinement of D(E) = 0 from a complex guess (Im guess <= 0).
/// Verified at doubled tail depth. A root that lands on the real axis within
/// 1e-14 is reclassified as bound with a warning. Zeros come in conjugate
/// pairs for the real-axis problems treated here; the lower-half member is
/// reported.
SpectralResult find_resonance(const fvcore::FVProblem& problem, Complex guess,
                              double refine_tol = 1e-10);

/// Nonrelativistic reference: the same split/Green's-function/determinant
/// pipeline with a single component, h = p^2/2m + U + V at the configured c.
std::vector<SpectralResult> schrodinger_reference(const potentials::PotentialModel& model, int l,
                                                  const PhysicalSystem& system, double b,
                                                  int n_max, const SearchWindow& window,
                                                  const fvcore::Numerics& numerics = {},
                                                  int threads = 0);

struct ConvergenceEntry {
    int n_max = 0;
    double b = 0.0;
    std::vector<double> energies;  ///< bound energies found in the window
    bool converged = false;        ///< agrees with the previous N at this b
};

struct ConvergenceReport {
    std::vector<ConvergenceEntry> entries;
    bool any_converged = false;
    int recommended_n_max = -1;
    double recommended_b = 0.0;
};

/// Lowest-state table across basis sizes and scales; flags (N, b) pairs whose
/// energies agree with the previous N at the same b to refine_tol, and
/// recommends the cheapest converged pair.
ConvergenceReport converge(const PhysicalSystem& system, const fvcore::ChannelSpace& channel,
                           const potentials::PotentialModel& model,
                           const std::vector<int>& n_list, const std::vector<double>& b_list,
                           const SearchWindow& window, const fvcore::Numerics& numerics = {},
                           int threads = 0);

/// Independent check: dense assembly of the full truncated Hamiltonian and
/// overlap (no split, no continued fraction) and a direct solve of the
/// generalized eigenproblem. Returns rest-mass-subtracted eigenvalues sorted
/// by real part.
std::vector<Complex> oracle_diagonalize(const fvcore::FVProblem& problem, int n_max);

}  // namespace fv::solver
