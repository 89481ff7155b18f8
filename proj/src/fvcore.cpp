#include "fv/fvcore.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace fv::fvcore {

using linalg::BlockTridiagonalOperator;
using linalg::ComplexMatrix;

std::pair<int, int> project_channels(int two_j) {
    if (two_j < 1 || two_j % 2 == 0)
        throw DomainError("project_channels: j must be a positive half-integer");
    int l_plus = (two_j - 1) / 2;
    return {l_plus, l_plus + 1};
}

double angular_flip_element(bool same_channel) { return same_channel ? 0.0 : 1.0; }

ChannelSpace ChannelSpace::schrodinger(int l) {
    if (l < 0) throw DomainError("ChannelSpace: l must be non-negative");
    ChannelSpace c;
    c.kind = Kind::schrodinger;
    c.l = l;
    return c;
}

ChannelSpace ChannelSpace::fv0(int l) {
    if (l < 0) throw DomainError("ChannelSpace: l must be non-negative");
    ChannelSpace c;
    c.kind = Kind::fv0;
    c.l = l;
    return c;
}

ChannelSpace ChannelSpace::fv12(int two_j) {
    project_channels(two_j);  // validates
    ChannelSpace c;
    c.kind = Kind::fv12;
    c.two_j = two_j;
    return c;
}

int ChannelSpace::channel_l(int c) const {
    if (kind != Kind::fv12) return l;
    auto [lp, lm] = project_channels(two_j);
    return c == 0 ? lp : lm;
}

std::string ChannelSpace::label() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::schrodinger: os << "schrodinger l=" << l; break;
        case Kind::fv0: os << "fv0 l=" << l; break;
        case Kind::fv12: os << "fv12 j=" << two_j << "/2"; break;
    }
    return os.str();
}

namespace {

// Stack-allocated block type for the hot tail recursion; component_dim *
// radial_halfwidth stays small (at most 4 x 5).
using SmallMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 20, 20>;

constexpr int kMaxPow = 5;  // highest X power needed: r^4 -> X^5
constexpr int kRowLen = 2 * kMaxPow + 1;

// Rows of X^0..X^maxp about radial index n for the given alpha = 2l+1;
// rows[k][d + kMaxPow] = (X^k)_{n, n+d}. The Jacobi matrix has
// diag(m) = 2m+alpha+1 and off(m) = -sqrt((m+1)(m+alpha+1)).
struct RowSet {
    std::array<std::array<double, kRowLen>, kMaxPow + 1> rows;
    long n = 0;

    void compute(double alpha, int maxp, long n_) {
        n = n_;
        for (auto& r : rows) r.fill(0.0);
        rows[0][kMaxPow] = 1.0;
        for (int k = 1; k <= maxp; ++k) {
            for (int d = -k; d <= k; ++d) {
                long col = n + d;
                if (col < 0) continue;
                double acc = rows[k - 1][kMaxPow + d] * (2.0 * col + alpha + 1.0);
                if (col >= 1 && d - 1 >= -(k - 1))
                    acc -= rows[k - 1][kMaxPow + d - 1] * std::sqrt(col * (col + alpha));
                if (d + 1 <= (k - 1))
                    acc -= rows[k - 1][kMaxPow + d + 1] *
                           std::sqrt((col + 1.0) * (col + alpha + 1.0));
                rows[k][kMaxPow + d] = acc;
            }
        }
    }

    double entry(int k, long np) const {
        long d = np - n;
        if (np < 0 || d < -kMaxPow || d > kMaxPow) return 0.0;
        return rows[k][kMaxPow + d];
    }
};

// <n, l+1 | r^p | np, l> from the same-b ladder identity; rows_upper holds the
// X powers of the l+1 channel about n.
double cross_entry(int l_ket, double b, const RowSet& rows_upper, int p, long np) {
    const double alpha = 2.0 * l_ket + 1.0;
    double v = std::sqrt((np + alpha + 1.0) * (np + alpha + 2.0)) * rows_upper.entry(p, np);
    if (np >= 1)
        v -= 2.0 * std::sqrt(np * (np + alpha + 1.0)) * rows_upper.entry(p, np - 1);
    if (np >= 2) v += std::sqrt(np * (np - 1.0)) * rows_upper.entry(p, np - 2);
    return v * std::pow(2.0 * b, -(p + 1.0));
}

int max_lr_power(const potentials::SplitModel& s) {
    int mp = 0;
    for (int p = 0; p < 5; ++p)
        if (s.u_poly[p] != 0.0 || s.v_poly[p] != 0.0) mp = p;
    return mp;
}

int coupling_lr_power(const potentials::SplitModel& s) {
    int mp = -1;  // -1: no long-range coupling
    for (int p = 0; p < 2; ++p)
        if (s.coupling_poly[p] != 0.0) mp = p;
    return mp;
}

// cd x cd block of J(E) at radial indices (n, np), written into out at
// (row0, col0). Workspace rows are computed per call; everything lives on the
// stack.
template <typename Mat>
void fill_radial_block(const FVProblem& p, Complex e_total, long n, long np, Mat& out, int row0,
                       int col0) {
    const auto& sp = p.split;
    const int maxp = std::max(1, max_lr_power(sp) + 1);
    const double mc2 = p.system.mc2();
    const double b = p.b;
    const double delta = n == np ? 1.0 : 0.0;

    RowSet rows;
    for (int c = 0; c < p.channel.n_channels(); ++c) {
        const int l = p.channel.channel_l(c);
        rows.compute(2.0 * l + 1.0, maxp, n);
        const double s = rows.entry(1, np) / (2.0 * b);
        const double t = (2.0 * b * (n + l + 1.0) * delta - b * b * s) / (2.0 * p.system.mass);
        double u = sp.u_coulomb * delta + sp.u_poly[0] * s;
        double v = sp.v_coulomb * delta + sp.v_poly[0] * s;
        double scale = 1.0 / (2.0 * b);
        for (int pw = 1; pw < 5; ++pw) {
            scale /= 2.0 * b;
            if (sp.u_poly[pw] != 0.0) u += sp.u_poly[pw] * rows.entry(pw + 1, np) * scale;
            if (sp.v_poly[pw] != 0.0) v += sp.v_poly[pw] * rows.entry(pw + 1, np) * scale;
        }
        if (p.channel.kind == Kind::schrodinger) {
            out(row0, col0) = e_total * s - (t + u + v);
        } else {
            const Complex es = e_total * s;
            const double k = t + u;
            const int o = 2 * c;
            out(row0 + o, col0 + o) = es - k - mc2 * s - v;
            out(row0 + o, col0 + o + 1) = Complex(-k, 0.0);
            out(row0 + o + 1, col0 + o) = Complex(k, 0.0);
            out(row0 + o + 1, col0 + o + 1) = es + k + mc2 * s - v;
        }
    }

    // Confining vector potentials push the channel coupling into the band.
    const int cp = coupling_lr_power(sp);
    if (p.channel.kind == Kind::fv12) {
        Complex k_pm(0.0, 0.0), k_mp(0.0, 0.0);
        if (p.coupling_enabled && cp >= 0) {
            auto [lp, lm] = project_channels(p.channel.two_j);
            double w_mp = 0.0;  // <n, l_minus | dV/dr | np, l_plus>
            double w_pm = 0.0;  // transpose orientation
            rows.compute(2.0 * lm + 1.0, cp, n);
            for (int pw = 0; pw <= 1; ++pw)
                if (sp.coupling_poly[pw] != 0.0)
                    w_mp += sp.coupling_poly[pw] * cross_entry(lp, b, rows, pw, np);
            rows.compute(2.0 * lm + 1.0, cp, np);
            for (int pw = 0; pw <= 1; ++pw)
                if (sp.coupling_poly[pw] != 0.0)
                    w_pm += sp.coupling_poly[pw] * cross_entry(lp, b, rows, pw, n);
            // J = E S - H and H' = -(i/2mc) W P, so J gains +(i/2mc) W P.
            const double f = 1.0 / (2.0 * p.system.mass * p.system.c);
            k_pm = Complex(0.0, f * w_pm);
            k_mp = Complex(0.0, f * w_mp);
        }
        for (int t1 = 0; t1 < 2; ++t1)
            for (int t2 = 0; t2 < 2; ++t2) {
                double pmat = t1 == 0 ? 1.0 : -1.0;  // P = [[1,1],[-1,-1]]
                out(row0 + t1, col0 + 2 + t2) = k_pm * pmat;
                out(row0 + 2 + t1, col0 + t2) = k_mp * pmat;
            }
    }
}

template <typename Mat>
void fill_grouped_block(const FVProblem& p, Complex e_total, std::size_t bi, std::size_t bj,
                        Mat& out) {
    const int w = p.radial_halfwidth;
    const int cd = p.component_dim();
    for (int a = 0; a < w; ++a)
        for (int b2 = 0; b2 < w; ++b2)
            fill_radial_block(p, e_total, static_cast<long>(bi) * w + a,
                              static_cast<long>(bj) * w + b2, out, a * cd, b2 * cd);
}

// Backward recursion with stack-allocated blocks; identical arithmetic to
// linalg::tail_recursion over the assembled operator, minus the allocations.
SmallMat tail_fast(const FVProblem& p, Complex e_total, std::size_t depth, std::size_t stop) {
    const int bs = p.block_size();
    SmallMat c(bs, bs), d(bs, bs), u(bs, bs), l(bs, bs);
    fill_grouped_block(p, e_total, depth, depth, c);
    Eigen::PartialPivLU<SmallMat> lu;
    for (std::size_t i = depth; i-- > stop;) {
        lu.compute(c);
        double pmin = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        double pmax = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
        if (pmin <= 1e-15 * std::max(pmax, 1e-300)) {
            std::ostringstream os;
            os << "tail recursion: singular block at depth " << (i + 1);
            throw SingularityError(os.str(), pmin, static_cast<long>(i + 1));
        }
        fill_grouped_block(p, e_total, i + 1, i, l);
        fill_grouped_block(p, e_total, i, i + 1, u);
        fill_grouped_block(p, e_total, i, i, d);
        c = d - u * lu.solve(l);
    }
    return c;
}

// Per-(problem, energy) workspace for corner evaluations: the prefix blocks
// and the left-connected sweep do not depend on the tail depth, so they are
// shared across the convergence iterates.
struct PrefixWorkspace {
    int bs = 0;
    std::size_t p = 0;
    std::vector<SmallMat> d, u, l;                     // prefix blocks
    std::vector<Eigen::PartialPivLU<SmallMat>> f_lu;   // F_0..F_{p-2}
    std::vector<SmallMat> corr_f;                      // L_j F_{j-1}^{-1} U_{j-1}

    PrefixWorkspace(const FVProblem& prob, Complex e_total) {
        bs = prob.block_size();
        p = prob.corner_blocks();
        d.resize(p);
        u.resize(p);
        l.resize(p);
        for (std::size_t i = 0; i < p; ++i) {
            d[i].resize(bs, bs);
            fill_grouped_block(prob, e_total, i, i, d[i]);
            u[i].resize(bs, bs);
            l[i].resize(bs, bs);
            if (i + 1 < p) {
                fill_grouped_block(prob, e_total, i, i + 1, u[i]);
                fill_grouped_block(prob, e_total, i + 1, i, l[i]);
            }
        }
        f_lu.resize(p);
        corr_f.assign(p, SmallMat::Zero(bs, bs));
        SmallMat f = d[0];
        f_lu[0].compute(f);
        for (std::size_t i = 1; i < p; ++i) {
            corr_f[i] = l[i - 1] * f_lu[i - 1].solve(u[i - 1]);
            f = d[i] - corr_f[i];
            f_lu[i].compute(f);
        }
    }

    // Inverse of the prefix with its last diagonal block replaced by closing.
    ComplexMatrix corner(const SmallMat& closing) const {
        std::vector<Eigen::PartialPivLU<SmallMat>> r_lu(p);
        std::vector<SmallMat> corr_r(p, SmallMat::Zero(bs, bs));
        SmallMat r = closing;
        r_lu[p - 1].compute(r);
        for (std::size_t i = p - 1; i-- > 0;) {
            corr_r[i] = u[i] * r_lu[i + 1].solve(l[i]);
            r = d[i] - corr_r[i];
            r_lu[i].compute(r);
        }
        ComplexMatrix g = ComplexMatrix::Zero(p * bs, p * bs);
        SmallMat tmp(bs, bs);
        for (std::size_t j = 0; j < p; ++j) {
            SmallMat dj = j == p - 1 ? closing : d[j];
            SmallMat m = dj - corr_f[j] - corr_r[j];
            tmp = m.partialPivLu().solve(SmallMat::Identity(bs, bs));
            g.block(j * bs, j * bs, bs, bs) = tmp;
            for (std::size_t i = j + 1; i < p; ++i) {
                tmp = -r_lu[i].solve(l[i - 1] * tmp);
                g.block(i * bs, j * bs, bs, bs) = tmp;
            }
            tmp = g.block(j * bs, j * bs, bs, bs);
            for (std::size_t i = j; i-- > 0;) {
                tmp = -f_lu[i].solve(u[i] * tmp);
                g.block(i * bs, j * bs, bs, bs) = tmp;
            }
        }
        return g;
    }
};

}  // namespace

ComplexMatrix LongRangeAssembler::radial_block(Complex e_total, long n, long np) const {
    const int cd = p_->component_dim();
    ComplexMatrix block = ComplexMatrix::Zero(cd, cd);
    fill_radial_block(*p_, e_total, n, np, block, 0, 0);
    return block;
}

BlockTridiagonalOperator LongRangeAssembler::operator()(Complex e_total) const {
    const FVProblem* prob = p_;
    const int bs = prob->block_size();
    auto grouped = [prob, e_total, bs](std::size_t bi, std::size_t bj) {
        ComplexMatrix blk = ComplexMatrix::Zero(bs, bs);
        fill_grouped_block(*prob, e_total, bi, bj, blk);
        return blk;
    };
    return BlockTridiagonalOperator(
        bs, [grouped](std::size_t i) { return grouped(i, i); },
        [grouped](std::size_t i) { return grouped(i, i + 1); },
        [grouped](std::size_t i) { return grouped(i + 1, i); });
}

namespace {

Eigen::MatrixXd sum_short_range_terms(const csbasis::BasisSpec& spec,
                                      const std::vector<potentials::PotentialTerm>& terms,
                                      int order) {
    using potentials::TermKind;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(spec.size(), spec.size());
    for (const auto& t : terms) {
        switch (t.kind) {
            case TermKind::screened:
                m += t.strength * csbasis::screened_coulomb_matrix(spec, t.range, order).mat;
                break;
            case TermKind::tabulated: {
                auto f = [&t](double r) { return t.value(r); };
                m += csbasis::cross_l_matrix(spec, spec, f, 0, order).mat;
                break;
            }
            default: break;  // long-range kinds live in the band reference
        }
    }
    return m;
}

}  // namespace

ComplexMatrix assemble_short_range(const FVProblem& p) {
    const int cd = p.component_dim();
    const int nr = p.radial_count();
    const int order = p.numerics.quadrature_factor * (p.n_max + 20);
    ComplexMatrix v = ComplexMatrix::Zero(nr * cd, nr * cd);
    const double pmat[2][2] = {{1.0, 1.0}, {-1.0, -1.0}};

    for (int c = 0; c < p.channel.n_channels(); ++c) {
        csbasis::BasisSpec spec(p.channel.channel_l(c), p.b, p.n_max);
        Eigen::MatrixXd v_s = sum_short_range_terms(spec, p.model.vector_terms, order);
        Eigen::MatrixXd u_s;
        if (p.model.scalar_meaning == potentials::ScalarMeaning::effective_u) {
            u_s = sum_short_range_terms(spec, p.model.scalar_terms, order);
        } else if (p.split.has_u_short) {
            u_s = csbasis::cross_l_matrix(spec, spec, p.split.u_short,
                                          p.split.u_short_origin_power, order)
                      .mat;
        } else {
            u_s = Eigen::MatrixXd::Zero(nr, nr);
        }
        for (int n = 0; n < nr; ++n)
            for (int np = 0; np < nr; ++np) {
                if (p.channel.kind == Kind::schrodinger) {
                    v(n, np) = v_s(n, np) + u_s(n, np);
                    continue;
                }
                const int o = c * 2;
                for (int t1 = 0; t1 < 2; ++t1)
                    for (int t2 = 0; t2 < 2; ++t2) {
                        double val = pmat[t1][t2] * u_s(n, np);
                        if (t1 == t2) val += v_s(n, np);
                        v(n * cd + o + t1, np * cd + o + t2) = val;
                    }
            }
    }

    if (p.channel.kind == Kind::fv12 && p.coupling_enabled && p.split.has_coupling_short) {
        auto [lp, lm] = project_channels(p.channel.two_j);
        csbasis::BasisSpec spec_p(lp, p.b, p.n_max), spec_m(lm, p.b, p.n_max);
        Eigen::MatrixXd w_pm = csbasis::cross_l_matrix(spec_p, spec_m, p.split.coupling_short,
                                                       p.split.coupling_origin_power, order)
                                   .mat;
        Eigen::MatrixXd w_mp = csbasis::cross_l_matrix(spec_m, spec_p, p.split.coupling_short,
                                                       p.split.coupling_origin_power, order)
                                   .mat;
        // H' = -(i hbar / 2mc) P (x) <dV/dr>; the angular flip element is 1.
        const Complex f = Complex(0.0, -1.0 / (2.0 * p.system.mass * p.system.c));
        for (int n = 0; n < nr; ++n)
            for (int np = 0; np < nr; ++np)
                for (int t1 = 0; t1 < 2; ++t1)
                    for (int t2 = 0; t2 < 2; ++t2) {
                        v(n * cd + t1, np * cd + 2 + t2) = f * pmat[t1][t2] * w_pm(n, np);
                        v(n * cd + 2 + t1, np * cd + t2) = f * pmat[t1][t2] * w_mp(n, np);
                    }
    }
    return v;
}

FVProblem make_problem(const PhysicalSystem& system, const ChannelSpace& channel,
                       const potentials::PotentialModel& model, double b, int n_max,
                       const Numerics& numerics, bool coupling_enabled) {
    if (!(system.mass > 0.0) || !(system.c > 0.0))
        throw DomainError("make_problem: mass and c must be positive");
    if (!(b > 0.0)) throw DomainError("make_problem: basis scale b must be positive");
    if (n_max < 0) throw DomainError("make_problem: n_max must be non-negative");

    FVProblem p;
    p.system = system;
    p.channel = channel;
    p.model = model;
    p.split = potentials::split(model, system.mass, system.c);
    p.b = b;
    p.numerics = numerics;
    p.coupling_enabled = coupling_enabled;

    int w = 1;
    for (int pw = 1; pw < 5; ++pw)
        if (p.split.u_poly[pw] != 0.0 || p.split.v_poly[pw] != 0.0) w = std::max(w, pw + 1);
    if (channel.kind == Kind::fv12 && coupling_enabled) {
        int cp = coupling_lr_power(p.split);
        if (cp >= 0) w = std::max(w, cp + 2);
    }
    p.radial_halfwidth = w;
    int count = n_max + 1;
    count = w * ((count + w - 1) / w);
    p.n_max = count - 1;

    if (p.numerics.cf_max_depth < 2 * p.corner_blocks()) {
        std::ostringstream os;
        os << "make_problem: cf_max_depth " << p.numerics.cf_max_depth
           << " cannot clear the " << p.corner_blocks() << "-block corner prefix";
        throw ConvergenceError(os.str());
    }

    p.short_range = assemble_short_range(p);
    return p;
}

TailResult tail_closing(const BlockTridiagonalOperator& op, std::size_t prefix_blocks,
                        double tol, std::size_t max_depth) {
    const std::size_t stop = prefix_blocks - 1;
    auto eval = [&](std::size_t k) { return linalg::tail_recursion(op, k, stop); };
    linalg::CornerResult res = linalg::converge_tail_iterates(
        eval, std::max<std::size_t>(2 * prefix_blocks, 16), tol, max_depth);
    return {std::move(res.corner), res.depth_used, res.accelerated};
}

JhatResult j_hat(const FVProblem& p, Complex e_reported, std::size_t tail_depth) {
    const Complex e_total = e_reported + p.energy_offset();
    const std::size_t nb = p.corner_blocks();
    ComplexMatrix closing;
    std::size_t depth = tail_depth;
    if (tail_depth == 0) {
        auto eval = [&](std::size_t k) -> ComplexMatrix {
            return tail_fast(p, e_total, k, nb - 1);
        };
        linalg::CornerResult tail = linalg::converge_tail_iterates(
            eval, std::max<std::size_t>(2 * nb, 16), p.numerics.cf_tol, p.numerics.cf_max_depth);
        closing = std::move(tail.corner);
        depth = tail.depth_used;
    } else {
        closing = tail_fast(p, e_total, tail_depth, nb - 1);
    }

    const int bs = p.block_size();
    const int dim = p.dim();
    ComplexMatrix jh = ComplexMatrix::Zero(dim, dim);
    SmallMat blk(bs, bs);
    for (std::size_t i = 0; i < nb; ++i) {
        fill_grouped_block(p, e_total, i, i, blk);
        jh.block(i * bs, i * bs, bs, bs) = blk;
        if (i + 1 < nb) {
            fill_grouped_block(p, e_total, i, i + 1, blk);
            jh.block(i * bs, (i + 1) * bs, bs, bs) = blk;
            fill_grouped_block(p, e_total, i + 1, i, blk);
            jh.block((i + 1) * bs, i * bs, bs, bs) = blk;
        }
    }
    jh.block((nb - 1) * bs, (nb - 1) * bs, bs, bs) = closing;
    return {std::move(jh), depth};
}

namespace {

// The left/right sweeps of the corner inversion can be exactly singular at
// isolated energies (truncation artifacts); a sub-tolerance energy nudge
// steps off such points without moving any root.
double energy_nudge(Complex e) { return 1e-12 * std::max(1.0, std::abs(e)); }

linalg::CornerResult corner_result(const FVProblem& p, Complex e_reported) {
    const std::size_t nb = p.corner_blocks();
    for (int attempt = 0;; ++attempt) {
        const Complex e_shift = e_reported + static_cast<double>(attempt) * energy_nudge(e_reported);
        const Complex e_total = e_shift + p.energy_offset();
        PrefixWorkspace ws(p, e_total);
        auto eval = [&](std::size_t k) {
            ComplexMatrix g = ws.corner(tail_fast(p, e_total, k, nb - 1));
            if (!g.allFinite())
                throw SingularityError("greens corner: singular intermediate block", 0.0);
            return g;
        };
        try {
            return linalg::converge_tail_iterates(eval, std::max<std::size_t>(2 * nb, 16),
                                                  p.numerics.cf_tol, p.numerics.cf_max_depth);
        } catch (const SingularityError&) {
            if (attempt >= 3) throw;
        }
    }
}

}  // namespace

linalg::ComplexMatrix greens_corner(const FVProblem& p, Complex e_reported,
                                    std::size_t tail_depth) {
    if (tail_depth == 0) return corner_result(p, e_reported).corner;
    const Complex e_total = e_reported + p.energy_offset();
    const std::size_t nb = p.corner_blocks();
    PrefixWorkspace ws(p, e_total);
    return ws.corner(tail_fast(p, e_total, tail_depth, nb - 1));
}

Complex fredholm_determinant(const FVProblem& p, Complex e_reported) {
    ComplexMatrix g = greens_corner(p, e_reported);
    ComplexMatrix m = ComplexMatrix::Identity(p.dim(), p.dim()) - g * p.short_range;
    return linalg::lu_determinant_scaled(m).value();
}

std::size_t default_tail_depth(const FVProblem& p) {
    return std::max<std::size_t>(8 * p.corner_blocks(), 512);
}

linalg::ComplexMatrix spectral_matrix(const FVProblem& p, Complex e_reported,
                                      std::size_t tail_depth) {
    const Complex e_total = e_reported + p.energy_offset();
    const std::size_t nb = p.corner_blocks();
    const int bs = p.block_size();
    SmallMat closing = tail_fast(p, e_total, tail_depth, nb - 1);
    ComplexMatrix jh = ComplexMatrix::Zero(p.dim(), p.dim());
    SmallMat blk(bs, bs);
    for (std::size_t i = 0; i < nb; ++i) {
        fill_grouped_block(p, e_total, i, i, blk);
        jh.block(i * bs, i * bs, bs, bs) = blk;
        if (i + 1 < nb) {
            fill_grouped_block(p, e_total, i, i + 1, blk);
            jh.block(i * bs, (i + 1) * bs, bs, bs) = blk;
            fill_grouped_block(p, e_total, i + 1, i, blk);
            jh.block((i + 1) * bs, i * bs, bs, bs) = blk;
        }
    }
    jh.block((nb - 1) * bs, (nb - 1) * bs, bs, bs) = closing;
    return jh - p.short_range;
}

SpectralDet spectral_determinant(const FVProblem& p, Complex e_reported,
                                 std::size_t tail_depth) {
    if (tail_depth == 0) {
        // Adaptive: det(Jhat - V) = det(I - G V) / det(G), everything from
        // the converged corner. Slow or non-decaying tail modes shift
        // det(G) and det(I - G V) by the same smooth factor, so the zeros
        // are insensitive to them.
        linalg::CornerResult res = corner_result(p, e_reported);
        linalg::ScaledComplex num = linalg::lu_determinant_scaled(
            ComplexMatrix::Identity(p.dim(), p.dim()) - res.corner * p.short_range);
        linalg::ScaledComplex den = linalg::lu_determinant_scaled(res.corner);
        if (den.is_zero()) throw SingularityError("spectral_determinant: singular corner", 0.0);
        linalg::ScaledComplex out;
        out.mantissa = num.mantissa / den.mantissa;
        out.exponent2 = num.exponent2 - den.exponent2;
        return {linalg::ScaledComplex::normalized(out.mantissa, out.exponent2),
                res.depth_used};
    }
    // Fixed depth: one factorization of Jhat - V directly.
    for (int attempt = 0;; ++attempt) {
        const Complex e_shift =
            e_reported + static_cast<double>(attempt) * energy_nudge(e_reported);
        try {
            ComplexMatrix m = spectral_matrix(p, e_shift, tail_depth);
            if (!m.allFinite())
                throw SingularityError("spectral_determinant: singular block", 0.0);
            return {linalg::lu_determinant_scaled(m), tail_depth};
        } catch (const SingularityError&) {
            if (attempt >= 3) throw;
        }
    }
}

}  // namespace fv::fvcore
