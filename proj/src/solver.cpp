#include "fv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fv::solver {

using fvcore::FVProblem;
using linalg::ScaledComplex;

SearchWindow::SearchWindow(double lo, double hi, int grid, double tol)
    : e_min(lo), e_max(hi), grid_points(grid), refine_tol(tol) {
    if (!(e_min < e_max)) throw DomainError("SearchWindow: requires e_min < e_max");
    if (grid_points < 8) throw DomainError("SearchWindow: grid_points must be >= 8");
    if (!(refine_tol > 0.0)) throw DomainError("SearchWindow: refine_tol must be positive");
}

std::vector<ScaledComplex> scan_determinants(const FVProblem& problem,
                                             const std::vector<double>& energies,
                                             std::size_t tail_depth, int threads) {
    std::vector<ScaledComplex> out(energies.size());
    std::exception_ptr error;

    if (threads == 1) {
        for (std::size_t i = 0; i < energies.size(); ++i)
            out[i] = fvcore::spectral_determinant(problem, energies[i], tail_depth).det;
        return out;
    }

#ifdef _OPENMP
    if (threads > 1) omp_set_num_threads(threads);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(energies.size()); ++i) {
        try {
            out[i] = fvcore::spectral_determinant(problem, energies[i], tail_depth).det;
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
#else
    for (std::size_t i = 0; i < energies.size(); ++i)
        out[i] = fvcore::spectral_determinant(problem, energies[i], tail_depth).det;
#endif
    return out;
}

namespace {

double log2_abs(const ScaledComplex& d) {
    if (d.is_zero()) return -4000.0;
    return std::log2(std::abs(d.mantissa)) + static_cast<double>(d.exponent2);
}

// Re D rescaled to a fixed binary exponent so the root finder sees ordinary
// doubles; the clamp keeps far-off evaluations finite without changing signs.
double normalized_re(const ScaledComplex& d, long e_ref) {
    long shift = d.exponent2 - e_ref;
    shift = std::clamp(shift, -900L, 900L);
    return std::ldexp(d.mantissa.real(), static_cast<int>(shift));
}

struct RefinedRoot {
    double energy;
    double residual_log2;  // log2 |D(root)|
    std::size_t depth;
};

RefinedRoot refine_bracket(const FVProblem& p, double lo, double hi, std::size_t depth,
                           double tol) {
    ScaledComplex dlo = fvcore::spectral_determinant(p, lo, depth).det;
    ScaledComplex dhi = fvcore::spectral_determinant(p, hi, depth).det;
    long e_ref = std::max(dlo.exponent2, dhi.exponent2);
    double best_log2 = 4000.0;
    auto f = [&](double e) {
        ScaledComplex d = fvcore::spectral_determinant(p, e, depth).det;
        best_log2 = std::min(best_log2, log2_abs(d));
        return normalized_re(d, e_ref);
    };
    linalg::RootBracket bracket(lo, hi, normalized_re(dlo, e_ref), normalized_re(dhi, e_ref));
    double root = linalg::find_real_root(f, bracket, tol);
    return {root, best_log2, depth};
}

// Re-locate the root at a deeper tail by bracketing around the previous
// estimate with a growing window.
bool rebracket(const FVProblem& p, double center, double max_half_width, std::size_t depth,
               double tol, RefinedRoot& out) {
    double w = std::max(200.0 * tol, 1e-9 * std::max(1.0, std::abs(center)));
    while (w <= max_half_width) {
        double lo = center - w, hi = center + w;
        ScaledComplex dlo = fvcore::spectral_determinant(p, lo, depth).det;
        ScaledComplex dhi = fvcore::spectral_determinant(p, hi, depth).det;
        if ((dlo.mantissa.real() > 0) != (dhi.mantissa.real() > 0)) {
            out = refine_bracket(p, lo, hi, depth, tol);
            return true;
        }
        w *= 8.0;
    }
    return false;
}

int dominant_channel_l(const FVProblem& p, double root, std::size_t depth) {
    if (p.channel.kind != fvcore::Kind::fv12) return -1;
    linalg::ComplexMatrix m = fvcore::spectral_matrix(p, root, depth);
    const int dim = p.dim();
    Eigen::PartialPivLU<linalg::ComplexMatrix> lu(m);
    Eigen::VectorXcd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = Complex(std::cos(0.7 * i) + 1.1, std::sin(0.3 * i));
    for (int it = 0; it < 2; ++it) {
        x = lu.solve(x);
        double nrm = x.norm();
        if (!(nrm > 0.0) || !x.allFinite()) return -1;
        x /= nrm;
    }
    const int cd = p.component_dim();
    double norms[2] = {0.0, 0.0};
    for (int n = 0; n <= p.n_max; ++n)
        for (int c = 0; c < 2; ++c)
            for (int t = 0; t < 2; ++t) norms[c] += std::norm(x(n * cd + 2 * c + t));
    auto [lp, lm] = fvcore::project_channels(p.channel.two_j);
    return norms[0] >= norms[1] ? lp : lm;
}

SpectralResult make_result(const FVProblem& p, double energy, StateKind kind, double residual,
                           std::size_t depth) {
    SpectralResult r;
    r.energy = Complex(energy, 0.0);
    r.kind = kind;
    r.determinant_residual = residual;
    r.basis_n_max = p.n_max;
    r.basis_b = p.b;
    r.cf_depth = depth;
    r.channel = p.channel.label();
    r.dominant_l = p.channel.kind == fvcore::Kind::fv12 ? dominant_channel_l(p, energy, depth)
                                                        : p.channel.l;
    return r;
}

}  // namespace

std::vector<SpectralResult> find_bound_states(const FVProblem& p, const SearchWindow& window,
                                              int threads) {
    const std::size_t depth0 = fvcore::default_tail_depth(p);
    const int n = window.grid_points;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i)
        grid[i] = window.e_min + (window.e_max - window.e_min) * i / (n - 1.0);

    std::vector<ScaledComplex> dets = scan_determinants(p, grid, depth0, threads);
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].is_zero()) continue;
        if (std::abs(dets[i].mantissa.imag()) > 1e-6 * std::abs(dets[i].mantissa)) {
            std::ostringstream os;
            os << "find_bound_states: determinant has a non-negligible imaginary part at E = "
               << grid[i];
            throw ConvergenceError(os.str());
        }
    }

    std::vector<double> logs(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) logs[i] = log2_abs(dets[i]);
    std::vector<double> sorted_logs = logs;
    std::nth_element(sorted_logs.begin(), sorted_logs.begin() + sorted_logs.size() / 2,
                     sorted_logs.end());
    const double med_log2 = sorted_logs[sorted_logs.size() / 2];
    const double spacing = grid[1] - grid[0];

    std::vector<SpectralResult> results;
    auto verified_root = [&](double lo, double hi) -> RefinedRoot {
        RefinedRoot r = refine_bracket(p, lo, hi, depth0, window.refine_tol);
        std::size_t depth = depth0;
        for (int esc = 0; esc < 6; ++esc) {
            std::size_t d2 = 2 * depth;
            if (d2 > p.numerics.cf_max_depth) break;
            RefinedRoot r2;
            if (!rebracket(p, r.energy, spacing, d2, window.refine_tol, r2)) break;
            double moved = std::abs(r2.energy - r.energy);
            r = r2;
            depth = d2;
            if (moved <= std::max(10.0 * window.refine_tol, 1e-12)) break;
        }
        return r;
    };

    std::vector<int> bracket_at;
    for (int i = 0; i + 1 < n; ++i) {
        bool s0 = dets[i].mantissa.real() > 0.0;
        bool s1 = dets[i + 1].mantissa.real() > 0.0;
        if (s0 != s1) bracket_at.push_back(i);
    }
    {
        std::vector<SpectralResult> refined(bracket_at.size());
        std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (threads != 1)
#endif
        for (long bi = 0; bi < static_cast<long>(bracket_at.size()); ++bi) {
            try {
                int i = bracket_at[bi];
                RefinedRoot r = verified_root(grid[i], grid[i + 1]);
                refined[bi] = make_result(p, r.energy, StateKind::bound,
                                          std::exp2(r.residual_log2 - med_log2), r.depth);
            } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
        for (auto& r : refined) results.push_back(std::move(r));
    }

    // even-order touches: pronounced |D| dips without a sign change
    for (int i = 1; i + 1 < n; ++i) {
        if (logs[i] > logs[i - 1] - 10.0 || logs[i] > logs[i + 1] - 10.0) continue;
        bool near_existing = false;
        for (const auto& r : results)
            if (std::abs(r.energy.real() - grid[i]) < 1.5 * spacing) near_existing = true;
        if (near_existing) continue;
        ScaledComplex ref = dets[i];
        auto f = [&](Complex z) {
            return fvcore::spectral_determinant(p, z, depth0).det.ratio(ref);
        };
        try {
            Complex z = linalg::find_complex_root(f, Complex(grid[i], 0.0), window.refine_tol,
                                                  60);
            if (std::abs(z.imag()) < 10.0 * window.refine_tol &&
                z.real() > window.e_min && z.real() < window.e_max) {
                SpectralResult res =
                    make_result(p, z.real(), StateKind::bound,
                                std::exp2(log2_abs(fvcore::spectral_determinant(p, z.real(),
                                                                                depth0)
                                                       .det) -
                                          med_log2),
                                depth0);
                res.multiplicity = 2;
                results.push_back(std::move(res));
            }
        } catch (const ConvergenceError&) {
            // a dip that refuses to refine is not a root
        }
    }

    std::sort(results.begin(), results.end(), [](const SpectralResult& a, const SpectralResult& b) {
        return a.energy.real() < b.energy.real();
    });
    std::vector<SpectralResult> merged;
    for (auto& r : results) {
        if (!merged.empty() && std::abs(merged.back().energy.real() - r.energy.real()) <=
                                   std::max(2.0 * window.refine_tol, 1e-13)) {
            merged.back().multiplicity += r.multiplicity;
        } else {
            merged.push_back(std::move(r));
        }
    }
    return merged;
}

SpectralResult find_resonance(const FVProblem& p, Complex guess, double refine_tol) {
    if (guess.imag() > 0.0)
        throw DomainError("find_resonance: guess must lie in the lower half plane");
    std::size_t depth = fvcore::default_tail_depth(p);

    auto refine_at = [&](Complex z0, std::size_t d) {
        ScaledComplex ref = fvcore::spectral_determinant(p, z0, d).det;
        if (ref.is_zero()) return z0;
        auto f = [&](Complex z) { return fvcore::spectral_determinant(p, z, d).det.ratio(ref); };
        return linalg::find_complex_root(f, z0, refine_tol, 200);
    };

    Complex z = refine_at(guess, depth);
    for (int esc = 0; esc < 6; ++esc) {
        std::size_t d2 = 2 * depth;
        if (d2 > p.numerics.cf_max_depth) break;
        Complex z2 = refine_at(z, d2);
        double moved = std::abs(z2 - z);
        z = z2;
        depth = d2;
        if (moved <= std::max(100.0 * refine_tol, 1e-7)) break;
    }

    // D is real on the real axis for these problems, so zeros pair off under
    // conjugation; report the Gamow (lower-half) member.
    if (z.imag() > 0.0) z = std::conj(z);

    ScaledComplex d_root = fvcore::spectral_determinant(p, z, depth).det;
    ScaledComplex d_far =
        fvcore::spectral_determinant(p, z + Complex(0.1, 0.0), depth).det;
    double residual = d_far.is_zero() ? 0.0 : std::abs(d_root.ratio(d_far));

    SpectralResult r;
    r.basis_n_max = p.n_max;
    r.basis_b = p.b;
    r.cf_depth = depth;
    r.channel = p.channel.label();
    r.determinant_residual = residual;
    if (std::abs(z.imag()) < 1e-14) {
        r.energy = Complex(z.real(), 0.0);
        r.kind = StateKind::bound;
        r.warning = "resonance refinement converged to the real axis; reclassified as bound";
        r.dominant_l = p.channel.kind == fvcore::Kind::fv12
                           ? dominant_channel_l(p, z.real(), depth)
                           : p.channel.l;
    } else {
        r.energy = z;
        r.kind = StateKind::resonance;
        r.dominant_l = p.channel.kind == fvcore::Kind::fv12 ? -1 : p.channel.l;
    }
    return r;
}

std::vector<SpectralResult> schrodinger_reference(const potentials::PotentialModel& model, int l,
                                                  const PhysicalSystem& system, double b,
                                                  int n_max, const SearchWindow& window,
                                                  const fvcore::Numerics& numerics,
                                                  int threads) {
    FVProblem p = fvcore::make_problem(system, fvcore::ChannelSpace::schrodinger(l), model, b,
                                       n_max, numerics);
    return find_bound_states(p, window, threads);
}

ConvergenceReport converge(const PhysicalSystem& system, const fvcore::ChannelSpace& channel,
                           const potentials::PotentialModel& model,
                           const std::vector<int>& n_list, const std::vector<double>& b_list,
                           const SearchWindow& window, const fvcore::Numerics& numerics,
                           int threads) {
    if (n_list.empty() || b_list.empty())
        throw DomainError("converge: N and b lists must be nonempty");
    ConvergenceReport report;
    for (double b : b_list) {
        const ConvergenceEntry* prev = nullptr;
        for (int n : n_list) {
            ConvergenceEntry entry;
            entry.n_max = n;
            entry.b = b;
            FVProblem p = fvcore::make_problem(system, channel, model, b, n, numerics);
            for (const auto& r : find_bound_states(p, window, threads))
                entry.energies.push_back(r.energy.real());
            if (prev && !prev->energies.empty() && !entry.energies.empty()) {
                std::size_t m = std::min(prev->energies.size(), entry.energies.size());
                double worst = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    worst = std::max(worst, std::abs(prev->energies[i] - entry.energies[i]));
                entry.converged = worst <= window.refine_tol * 10.0 &&
                                  prev->energies.size() == entry.energies.size();
            }
            report.entries.push_back(std::move(entry));
            prev = &report.entries.back();
            if (prev->converged && !report.any_converged) {
                report.any_converged = true;
                report.recommended_n_max = prev->n_max;
                report.recommended_b = prev->b;
            }
        }
    }
    return report;
}

std::vector<Complex> oracle_diagonalize(const FVProblem& problem, int n_max) {
    const int cd = problem.component_dim();
    if ((n_max + 1) * cd > 2000)
        throw ResourceError("oracle_diagonalize: dimension cap of 2000 exceeded");

    FVProblem p = fvcore::make_problem(problem.system, problem.channel, problem.model, problem.b,
                                       n_max, problem.numerics, problem.coupling_enabled);
    const int dim = p.dim();
    const int w = p.radial_halfwidth;

    // Raw truncation: H = -J(0) plus the short-range matrix, no tail closing.
    fvcore::LongRangeAssembler asmb(p);
    linalg::ComplexMatrix h = linalg::ComplexMatrix::Zero(dim, dim);
    for (long nr = 0; nr <= p.n_max; ++nr)
        for (long np = std::max(0L, nr - w); np <= std::min<long>(p.n_max, nr + w); ++np)
            h.block(nr * cd, np * cd, cd, cd) = -asmb.radial_block(Complex(0.0, 0.0), nr, np);
    h += p.short_range;

    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
    for (int c = 0; c < p.channel.n_channels(); ++c) {
        csbasis::BasisSpec spec(p.channel.channel_l(c), p.b, p.n_max);
        Eigen::MatrixXd sc = csbasis::overlap_matrix(spec).mat;
        for (int nr = 0; nr <= p.n_max; ++nr)
            for (int np = 0; np <= p.n_max; ++np)
                for (int t = 0; t < p.channel.fv_components(); ++t) {
                    int o = c * p.channel.fv_components() + t;
                    s(nr * cd + o, np * cd + o) = sc(nr, np);
                }
    }

    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
        throw SingularityError("oracle_diagonalize: overlap not positive definite", 0.0);
    linalg::ComplexMatrix lc = llt.matrixL().toDenseMatrix().cast<Complex>();
    linalg::ComplexMatrix m =
        lc.triangularView<Eigen::Lower>().solve(h.transpose()).transpose();
    m = lc.triangularView<Eigen::Lower>().solve(m);

    Eigen::ComplexEigenSolver<linalg::ComplexMatrix> es(m, false);
    std::vector<Complex> vals(es.eigenvalues().data(), es.eigenvalues().data() + dim);
    const double offset = p.energy_offset();
    for (auto& v : vals) v -= offset;
    std::sort(vals.begin(), vals.end(),
              [](Complex a, Complex b) { return a.real() < b.real(); });
    return vals;
}

}  // namespace fv::solver
