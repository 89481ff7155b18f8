#include "fv/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace fv::potentials {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw DomainError("CubicSpline: need at least two samples of equal length");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw DomainError("CubicSpline: sample abscissae must be strictly increasing");
    // natural boundary: second derivative zero at both ends
    m_.assign(n, 0.0);
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    b[0] = 1.0;
    b[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
        a[i] = h0 / 6.0;
        b[i] = (h0 + h1) / 3.0;
        c[i] = h1 / 6.0;
        d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
    for (std::size_t i = 1; i < n; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
}

double CubicSpline::value(double r) const {
    if (r <= x_.front()) return y_.front();
    if (r >= x_.back()) return 0.0;
    auto it = std::upper_bound(x_.begin(), x_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    double h = x_[i + 1] - x_[i];
    double t0 = (x_[i + 1] - r) / h, t1 = (r - x_[i]) / h;
    return t0 * y_[i] + t1 * y_[i + 1] +
           ((t0 * t0 * t0 - t0) * m_[i] + (t1 * t1 * t1 - t1) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double r) const {
    if (r <= x_.front() || r >= x_.back()) return 0.0;
    auto it = std::upper_bound(x_.begin(), x_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    double h = x_[i + 1] - x_[i];
    double t0 = (x_[i + 1] - r) / h, t1 = (r - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           ((3.0 * t1 * t1 - 1.0) * m_[i + 1] - (3.0 * t0 * t0 - 1.0) * m_[i]) * h / 6.0;
}

PotentialTerm PotentialTerm::coulomb(double z) { return {TermKind::coulomb, z, 0.0, nullptr, {}}; }

PotentialTerm PotentialTerm::screened(double amplitude, double rate) {
    if (!(rate > 0.0)) throw DomainError("screened term: rate must be positive");
    return {TermKind::screened, amplitude, rate, nullptr, {}};
}

PotentialTerm PotentialTerm::linear(double a1) { return {TermKind::linear, a1, 0.0, nullptr, {}}; }

PotentialTerm PotentialTerm::quadratic(double a2) {
    return {TermKind::quadratic, a2, 0.0, nullptr, {}};
}

PotentialTerm PotentialTerm::tabulated(std::vector<double> r, std::vector<double> v) {
    PotentialTerm t;
    t.kind = TermKind::tabulated;
    t.table = std::make_shared<CubicSpline>(std::move(r), std::move(v));
    return t;
}

double PotentialTerm::value(double r) const {
    switch (kind) {
        case TermKind::coulomb: return strength / r;
        case TermKind::screened: return strength * std::exp(-range * r) / r;
        case TermKind::linear: return strength * r;
        case TermKind::quadratic: return strength * r * r;
        case TermKind::tabulated: return table->value(r);
    }
    return 0.0;
}

double PotentialTerm::derivative(double r) const {
    switch (kind) {
        case TermKind::coulomb: return -strength / (r * r);
        case TermKind::screened:
            return -strength * std::exp(-range * r) * (1.0 + range * r) / (r * r);
        case TermKind::linear: return strength;
        case TermKind::quadratic: return 2.0 * strength * r;
        case TermKind::tabulated: return table->derivative(r);
    }
    return 0.0;
}

namespace {

std::vector<PotentialTerm> merge_terms(std::vector<PotentialTerm> terms) {
    double z = 0.0, a1 = 0.0, a2 = 0.0;
    bool has_z = false, has_a1 = false, has_a2 = false;
    std::vector<PotentialTerm> out;
    for (auto& t : terms) {
        switch (t.kind) {
            case TermKind::coulomb:
                z += t.strength;
                has_z = true;
                break;
            case TermKind::linear:
                a1 += t.strength;
                has_a1 = true;
                break;
            case TermKind::quadratic:
                a2 += t.strength;
                has_a2 = true;
                break;
            default: out.push_back(std::move(t));
        }
    }
    if (has_z) out.push_back(PotentialTerm::coulomb(z));
    if (has_a1) out.push_back(PotentialTerm::linear(a1));
    if (has_a2) out.push_back(PotentialTerm::quadratic(a2));
    return out;
}

}  // namespace

PotentialModel::PotentialModel(std::vector<PotentialTerm> vec, std::vector<PotentialTerm> scal,
                               ScalarMeaning meaning)
    : vector_terms(merge_terms(std::move(vec))),
      scalar_terms(merge_terms(std::move(scal))),
      scalar_meaning(meaning) {}

double evaluate(const PotentialModel& model, Part part, double r) {
    if (!(r > 0.0)) throw DomainError("evaluate: r must be positive");
    const auto& terms = part == Part::vector ? model.vector_terms : model.scalar_terms;
    double v = 0.0;
    for (const auto& t : terms) v += t.value(r);
    return v;
}

double vector_derivative(const PotentialModel& model, double r) {
    if (!(r > 0.0)) throw DomainError("vector_derivative: r must be positive");
    double v = 0.0;
    for (const auto& t : model.vector_terms) v += t.derivative(r);
    return v;
}

std::function<double(double)> effective_scalar(std::function<double(double)> s, double mass,
                                               double c) {
    if (!(mass > 0.0) || !(c > 0.0))
        throw DomainError("effective_scalar: mass and c must be positive");
    const double two_mc2 = 2.0 * mass * c * c;
    return [s = std::move(s), two_mc2](double r) {
        double sv = s(r);
        return sv + sv * sv / two_mc2;
    };
}

std::function<double(double)> model_effective_scalar(const PotentialModel& model, double mass,
                                                     double c) {
    auto raw = [model](double r) { return evaluate(model, Part::scalar, r); };
    if (model.scalar_meaning == ScalarMeaning::effective_u) return raw;
    return effective_scalar(raw, mass, c);
}

double SplitModel::long_range_v(double r) const {
    double v = v_coulomb / r;
    double rp = 1.0;
    for (double cp : v_poly) {
        v += cp * rp;
        rp *= r;
    }
    return v;
}

double SplitModel::long_range_u(double r) const {
    double u = u_coulomb / r;
    double rp = 1.0;
    for (double cp : u_poly) {
        u += cp * rp;
        rp *= r;
    }
    return u;
}

SplitModel split(const PotentialModel& model, double mass, double c) {
    if (!(mass > 0.0) || !(c > 0.0)) throw DomainError("split: mass and c must be positive");
    SplitModel out;

    std::vector<PotentialTerm> v_short_terms;
    for (const auto& t : model.vector_terms) {
        switch (t.kind) {
            case TermKind::coulomb: out.v_coulomb += t.strength; break;
            case TermKind::linear:
                out.v_poly[1] += t.strength;
                out.coupling_poly[0] += t.strength;
                break;
            case TermKind::quadratic:
                out.v_poly[2] += t.strength;
                out.coupling_poly[1] += 2.0 * t.strength;
                break;
            default: v_short_terms.push_back(t);
        }
    }
    // dV/dr of the coulomb and short-range vector terms; decays at least like
    // 1/r^2 relative to the reference, so it always belongs to the residual.
    double zv = out.v_coulomb;
    bool coupling_singular = zv != 0.0 || !v_short_terms.empty();
    out.has_coupling_short = coupling_singular;
    out.coupling_origin_power = 0;
    for (const auto& t : v_short_terms)
        if (t.kind == TermKind::screened) out.coupling_origin_power = -2;
    if (zv != 0.0) out.coupling_origin_power = -2;
    out.coupling_short = [zv, v_short_terms](double r) {
        double d = -zv / (r * r);
        for (const auto& t : v_short_terms) d += t.derivative(r);
        return d;
    };

    out.has_v_short = !v_short_terms.empty();
    out.v_short_origin_power = 0;
    for (const auto& t : v_short_terms)
        if (t.kind == TermKind::screened) out.v_short_origin_power = -1;
    out.v_short = [v_short_terms](double r) {
        double v = 0.0;
        for (const auto& t : v_short_terms) v += t.value(r);
        return v;
    };

    // Scalar side. In effective_u mode the terms are U itself; in bare_s mode
    // expand U = S + S^2/2mc^2 exactly, keeping every polynomial piece in the
    // long-range block and the rest as a residual function.
    double sc = 0.0, s1 = 0.0, s2 = 0.0;
    std::vector<PotentialTerm> s_short_terms;
    for (const auto& t : model.scalar_terms) {
        switch (t.kind) {
            case TermKind::coulomb: sc += t.strength; break;
            case TermKind::linear: s1 += t.strength; break;
            case TermKind::quadratic: s2 += t.strength; break;
            default: s_short_terms.push_back(t);
        }
    }
    bool scalar_screened = false;
    for (const auto& t : s_short_terms)
        if (t.kind == TermKind::screened) scalar_screened = true;

    if (model.scalar_meaning == ScalarMeaning::effective_u) {
        out.u_coulomb = sc;
        out.u_poly[1] = s1;
        out.u_poly[2] = s2;
        out.has_u_short = !s_short_terms.empty();
        out.u_short_origin_power = scalar_screened ? -1 : 0;
        out.u_short = [s_short_terms](double r) {
            double u = 0.0;
            for (const auto& t : s_short_terms) u += t.value(r);
            return u;
        };
    } else {
        const double two_mc2 = 2.0 * mass * c * c;
        out.u_coulomb = sc;
        out.u_poly[0] = 2.0 * sc * s1 / two_mc2;
        out.u_poly[1] = s1 + 2.0 * sc * s2 / two_mc2;
        out.u_poly[2] = s2 + s1 * s1 / two_mc2;
        out.u_poly[3] = 2.0 * s1 * s2 / two_mc2;
        out.u_poly[4] = s2 * s2 / two_mc2;
        out.has_u_short = !s_short_terms.empty() || sc != 0.0;
        out.u_short_origin_power =
            (sc != 0.0 || scalar_screened) ? -2 : 0;
        out.u_short = [sc, s1, s2, s_short_terms, two_mc2](double r) {
            double ss = 0.0;
            for (const auto& t : s_short_terms) ss += t.value(r);
            double s_long = sc / r + s1 * r + s2 * r * r;
            return ss + (sc * sc / (r * r) + 2.0 * s_long * ss + ss * ss) / two_mc2;
        };
    }
    return out;
}

}  // namespace fv::potentials
