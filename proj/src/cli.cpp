#include "fv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fv::cli {

using fvcore::ChannelSpace;
using fvcore::FVProblem;
using fvcore::Kind;
using potentials::PotentialModel;
using potentials::PotentialTerm;
using potentials::ScalarMeaning;
using solver::SearchWindow;
using solver::SpectralResult;
using solver::StateKind;

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, delim)) out.push_back(trim(item));
    return out;
}

double parse_number(const std::string& s, int line) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + s + "'", line);
    }
    if (pos != s.size()) throw ConfigError("trailing characters after number '" + s + "'", line);
    return v;
}

long parse_integer(const std::string& s, int line) {
    std::size_t pos = 0;
    long v;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + s + "'", line);
    }
    if (pos != s.size()) throw ConfigError("trailing characters after integer '" + s + "'", line);
    return v;
}

int parse_half_integer_two_j(const std::string& s, int line) {
    auto slash = s.find('/');
    long two_j;
    if (slash != std::string::npos) {
        long num = parse_integer(trim(s.substr(0, slash)), line);
        long den = parse_integer(trim(s.substr(slash + 1)), line);
        if (den != 2) throw ConfigError("half-integer j must have denominator 2", line);
        two_j = num;
    } else {
        double v = parse_number(s, line);
        two_j = std::lround(2.0 * v);
        if (std::abs(2.0 * v - two_j) > 1e-9)
            throw ConfigError("j must be a half integer", line);
    }
    if (two_j < 1 || two_j % 2 == 0)
        throw ConfigError("j must be one of 1/2, 3/2, 5/2, ...", line);
    return static_cast<int>(two_j);
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

PotentialTerm parse_term_inner(const std::string& text, int line);

PotentialTerm parse_term(const std::string& text, int line) {
    try {
        return parse_term_inner(text, line);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid potential term: ") + e.what(), line);
    }
}

PotentialTerm parse_term_inner(const std::string& text, int line) {
    std::vector<std::string> tok;
    std::stringstream ss(text);
    std::string t;
    while (ss >> t) tok.push_back(t);
    if (tok.empty()) throw ConfigError("empty potential term", line);
    const std::string& kind = tok[0];
    auto need = [&](std::size_t n) {
        if (tok.size() != n + 1)
            throw ConfigError("term '" + kind + "' takes " + std::to_string(n) + " argument(s)",
                              line);
    };
    if (kind == "coulomb") {
        need(1);
        return PotentialTerm::coulomb(parse_number(tok[1], line));
    }
    if (kind == "screened") {
        need(2);
        return PotentialTerm::screened(parse_number(tok[1], line), parse_number(tok[2], line));
    }
    if (kind == "linear") {
        need(1);
        return PotentialTerm::linear(parse_number(tok[1], line));
    }
    if (kind == "quadratic") {
        need(1);
        return PotentialTerm::quadratic(parse_number(tok[1], line));
    }
    if (kind == "table") {
        need(1);
        std::ifstream in(tok[1]);
        if (!in) throw ConfigError("cannot open table file '" + tok[1] + "'", line);
        std::vector<double> r, v;
        double a, b2;
        while (in >> a >> b2) {
            r.push_back(a);
            v.push_back(b2);
        }
        if (r.size() < 2) throw ConfigError("table file '" + tok[1] + "' needs two columns", line);
        PotentialTerm term = PotentialTerm::tabulated(std::move(r), std::move(v));
        term.table_source = tok[1];
        return term;
    }
    throw ConfigError("unknown potential term kind '" + kind + "'", line);
}

std::string render_term(const PotentialTerm& term, const std::string& original) {
    using potentials::TermKind;
    switch (term.kind) {
        case TermKind::coulomb: return "coulomb " + fmt_g(term.strength);
        case TermKind::screened:
            return "screened " + fmt_g(term.strength) + " " + fmt_g(term.range);
        case TermKind::linear: return "linear " + fmt_g(term.strength);
        case TermKind::quadratic: return "quadratic " + fmt_g(term.strength);
        case TermKind::tabulated:
            return term.table_source.empty() ? original : "table " + term.table_source;
    }
    return original;
}

// term list text -> (terms, canonical text)
std::pair<std::vector<PotentialTerm>, std::string> parse_term_list(const std::string& text,
                                                                   int line) {
    std::vector<PotentialTerm> terms;
    std::vector<std::string> rendered;
    if (!trim(text).empty()) {
        for (const auto& part : split(text, ',')) {
            if (part.empty()) continue;
            PotentialTerm term = parse_term(part, line);
            rendered.push_back(render_term(term, part));
            terms.push_back(std::move(term));
        }
    }
    std::string canon;
    for (std::size_t i = 0; i < rendered.size(); ++i) {
        if (i) canon += ", ";
        canon += rendered[i];
    }
    return {std::move(terms), std::move(canon)};
}

}  // namespace

ChannelSpace RunConfig::channel() const {
    switch (kind) {
        case Kind::schrodinger: return ChannelSpace::schrodinger(l);
        case Kind::fv0: return ChannelSpace::fv0(l);
        case Kind::fv12: return ChannelSpace::fv12(two_j);
    }
    throw ConfigError("invalid problem kind");
}

fvcore::Numerics RunConfig::numerics() const {
    fvcore::Numerics n;
    n.cf_tol = cf_tol;
    n.cf_max_depth = cf_max_depth;
    n.quadrature_factor = quadrature_factor;
    return n;
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    os << "system.mass = " << fmt_g(mass) << "\n";
    os << "system.c = " << fmt_g(c) << "\n";
    os << "problem.kind = "
       << (kind == Kind::schrodinger ? "schrodinger" : kind == Kind::fv0 ? "fv0" : "fv12")
       << "\n";
    if (kind == Kind::fv12)
        os << "problem.j = " << two_j << "/2\n";
    else
        os << "problem.l = " << l << "\n";
    auto render_list = [](const std::vector<PotentialTerm>& terms) {
        std::string out;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (i) out += ", ";
            out += render_term(terms[i], "table " + terms[i].table_source);
        }
        return out;
    };
    if (!potential.vector_terms.empty())
        os << "potential.vector = " << render_list(potential.vector_terms) << "\n";
    if (!potential.scalar_terms.empty()) {
        os << "potential.scalar = " << render_list(potential.scalar_terms) << "\n";
        os << "potential.scalar_as = "
           << (potential.scalar_meaning == ScalarMeaning::effective_u ? "U" : "S") << "\n";
    }
    os << "basis.n = " << n_max << "\n";
    os << "basis.b = " << fmt_g(b) << "\n";
    if (!n_list.empty()) {
        os << "basis.n_list =";
        for (int n : n_list) os << " " << n;
        os << "\n";
    }
    if (!b_list.empty()) {
        os << "basis.b_list =";
        for (double v : b_list) os << " " << fmt_g(v);
        os << "\n";
    }
    if (window)
        os << "search.window = " << fmt_g(window->first) << " " << fmt_g(window->second) << "\n";
    if (resonance_guess)
        os << "search.resonance_guess = " << fmt_g(resonance_guess->real()) << " "
           << fmt_g(resonance_guess->imag()) << "\n";
    os << "search.grid_points = " << grid_points << "\n";
    os << "search.refine_tol = " << fmt_g(refine_tol) << "\n";
    os << "numerics.cf_tol = " << fmt_g(cf_tol) << "\n";
    os << "numerics.cf_max_depth = " << cf_max_depth << "\n";
    os << "numerics.quadrature_factor = " << quadrature_factor << "\n";
    os << "output.format = "
       << (format == OutputFormat::table ? "table" : format == OutputFormat::json ? "json" : "csv")
       << "\n";
    if (!out_path.empty()) os << "output.path = " << out_path << "\n";
    return os.str();
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    bool l_set = false, j_set = false;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'section.key = value' on line " + std::to_string(line_no),
                              line_no);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (key == "system.mass") {
            cfg.mass = parse_number(value, line_no);
        } else if (key == "system.c") {
            cfg.c = parse_number(value, line_no);
        } else if (key == "problem.kind") {
            if (value == "schrodinger")
                cfg.kind = Kind::schrodinger;
            else if (value == "fv0")
                cfg.kind = Kind::fv0;
            else if (value == "fv12")
                cfg.kind = Kind::fv12;
            else
                throw ConfigError("problem.kind must be schrodinger, fv0 or fv12", line_no);
        } else if (key == "problem.l") {
            long v = parse_integer(value, line_no);
            if (v < 0) throw ConfigError("problem.l must be non-negative", line_no);
            cfg.l = static_cast<int>(v);
            l_set = true;
        } else if (key == "problem.j") {
            cfg.two_j = parse_half_integer_two_j(value, line_no);
            j_set = true;
        } else if (key == "potential.vector" || key == "potential.scalar") {
            auto [terms, canon] = parse_term_list(value, line_no);
            if (key == "potential.vector")
                cfg.potential.vector_terms = std::move(terms);
            else
                cfg.potential.scalar_terms = std::move(terms);
            cfg.potential = PotentialModel(std::move(cfg.potential.vector_terms),
                                           std::move(cfg.potential.scalar_terms),
                                           cfg.potential.scalar_meaning);
        } else if (key == "potential.scalar_as") {
            if (value == "S" || value == "s")
                cfg.potential.scalar_meaning = ScalarMeaning::bare_s;
            else if (value == "U" || value == "u")
                cfg.potential.scalar_meaning = ScalarMeaning::effective_u;
            else
                throw ConfigError("potential.scalar_as must be S or U", line_no);
        } else if (key == "basis.n") {
            long v = parse_integer(value, line_no);
            if (v < 0) throw ConfigError("basis.n must be non-negative", line_no);
            cfg.n_max = static_cast<int>(v);
        } else if (key == "basis.b") {
            cfg.b = parse_number(value, line_no);
            if (!(cfg.b > 0.0)) throw ConfigError("basis.b must be positive", line_no);
        } else if (key == "basis.n_list") {
            cfg.n_list.clear();
            std::stringstream ss(value);
            std::string tok;
            while (ss >> tok) cfg.n_list.push_back(static_cast<int>(parse_integer(tok, line_no)));
        } else if (key == "basis.b_list") {
            cfg.b_list.clear();
            std::stringstream ss(value);
            std::string tok;
            while (ss >> tok) cfg.b_list.push_back(parse_number(tok, line_no));
        } else if (key == "search.window") {
            std::stringstream ss(value);
            std::string a, b2;
            if (!(ss >> a >> b2)) throw ConfigError("search.window needs two numbers", line_no);
            std::string extra;
            if (ss >> extra) throw ConfigError("search.window takes exactly two numbers", line_no);
            cfg.window = {parse_number(a, line_no), parse_number(b2, line_no)};
        } else if (key == "search.grid_points") {
            long v = parse_integer(value, line_no);
            if (v < 8) throw ConfigError("search.grid_points must be >= 8", line_no);
            cfg.grid_points = static_cast<int>(v);
        } else if (key == "search.resonance_guess") {
            std::stringstream ss(value);
            std::string a, b2;
            if (!(ss >> a >> b2))
                throw ConfigError("search.resonance_guess needs re and im", line_no);
            cfg.resonance_guess = Complex(parse_number(a, line_no), parse_number(b2, line_no));
        } else if (key == "search.refine_tol") {
            cfg.refine_tol = parse_number(value, line_no);
            if (!(cfg.refine_tol > 0.0))
                throw ConfigError("search.refine_tol must be positive", line_no);
        } else if (key == "numerics.cf_tol") {
            cfg.cf_tol = parse_number(value, line_no);
            if (!(cfg.cf_tol > 0.0)) throw ConfigError("numerics.cf_tol must be positive", line_no);
        } else if (key == "numerics.cf_max_depth") {
            long v = parse_integer(value, line_no);
            if (v < 16) throw ConfigError("numerics.cf_max_depth too small", line_no);
            cfg.cf_max_depth = static_cast<std::size_t>(v);
        } else if (key == "numerics.quadrature_factor") {
            long v = parse_integer(value, line_no);
            if (v < 1) throw ConfigError("numerics.quadrature_factor must be >= 1", line_no);
            cfg.quadrature_factor = static_cast<int>(v);
        } else if (key == "output.format") {
            if (value == "table")
                cfg.format = OutputFormat::table;
            else if (value == "json")
                cfg.format = OutputFormat::json;
            else if (value == "csv")
                cfg.format = OutputFormat::csv;
            else
                throw ConfigError("output.format must be table, json or csv", line_no);
        } else if (key == "output.path") {
            cfg.out_path = value;
        } else {
            throw ConfigError("unknown key '" + key + "'", line_no);
        }
    }
    if (cfg.window && cfg.resonance_guess)
        throw ConfigError("config must set exactly one of search.window / search.resonance_guess");
    if (cfg.kind == Kind::fv12 && l_set && !j_set)
        throw ConfigError("fv12 problems take problem.j, not problem.l");
    if (cfg.kind != Kind::fv12 && j_set)
        throw ConfigError("problem.j is only valid for fv12 problems");
    cfg.angular_set = l_set || j_set;
    return cfg;
}

namespace {

std::string state_name(StateKind k) { return k == StateKind::bound ? "bound" : "resonance"; }

std::string render_records_table(const std::vector<ResultRecord>& records) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-18s %-10s %14s %14s %6s %5s %5s %8s %9s %10s\n", "channel",
                  "state", "energy_re", "energy_im", "dom_l", "mult", "N", "b", "cf_depth",
                  "residual");
    os << buf;
    for (const auto& r : records) {
        const auto& s = r.state;
        std::snprintf(buf, sizeof buf, "%-18s %-10s %14.7g %14.7g %6d %5d %5d %8.4g %9zu %10.3g\n",
                      s.channel.c_str(), state_name(s.kind).c_str(), s.energy.real(),
                      s.energy.imag(), s.dominant_l, s.multiplicity, s.basis_n_max, s.basis_b,
                      s.cf_depth, s.determinant_residual);
        os << buf;
        if (!s.warning.empty()) os << "  warning: " << s.warning << "\n";
    }
    return os.str();
}

std::string render_records_csv(const std::vector<ResultRecord>& records) {
    std::ostringstream os;
    os << "energy_re,energy_im,kind,N,b,cf_depth,residual\n";
    for (const auto& r : records) {
        const auto& s = r.state;
        os << fmt_g(s.energy.real()) << "," << fmt_g(s.energy.imag()) << "," << state_name(s.kind)
           << "," << s.basis_n_max << "," << fmt_g(s.basis_b) << "," << s.cf_depth << ","
           << fmt_g(s.determinant_residual) << "\n";
    }
    return os.str();
}

std::string render_records_json(const std::vector<ResultRecord>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        const auto& s = r.state;
        nlohmann::ordered_json o;
        o["command"] = r.command;
        o["channel"] = s.channel;
        o["state"] = state_name(s.kind);
        o["energy"] = {{"re", s.energy.real()}, {"im", s.energy.imag()}};
        o["dominant_l"] = s.dominant_l;
        o["multiplicity"] = s.multiplicity;
        o["determinant_residual"] = s.determinant_residual;
        o["cf_depth"] = s.cf_depth;
        o["basis"] = {{"n_max", s.basis_n_max}, {"b", s.basis_b}};
        o["warning"] = s.warning;
        o["config"] = r.config_echo;
        o["version"] = r.version;
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

}  // namespace

std::string write_output(const std::vector<ResultRecord>& records, OutputFormat format) {
    switch (format) {
        case OutputFormat::table: return render_records_table(records);
        case OutputFormat::csv: return render_records_csv(records);
        case OutputFormat::json: return render_records_json(records);
    }
    return {};
}

RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    if (name == "table1") {
        cfg.potential = PotentialModel({PotentialTerm::coulomb(92.0),
                                        PotentialTerm::screened(-240.0, 1.0),
                                        PotentialTerm::screened(320.0, 4.0)},
                                       {});
        cfg.b = 4.0;
        cfg.n_max = 100;
        cfg.window = {-10.0, -1.0};
        cfg.grid_points = 48;
        cfg.resonance_guess = Complex(15.6, -1e-5);
    } else if (name == "table2") {
        cfg.potential = PotentialModel({PotentialTerm::coulomb(-1.0)},
                                       {PotentialTerm::linear(1.0)}, ScalarMeaning::effective_u);
        cfg.b = 0.5;
        cfg.n_max = 60;
        cfg.window = {0.05, 7.6};
        cfg.grid_points = 72;
    } else if (name == "table3") {
        cfg.potential = PotentialModel({PotentialTerm::coulomb(-1.0)},
                                       {PotentialTerm::quadratic(0.5)},
                                       ScalarMeaning::effective_u);
        cfg.b = 0.5;
        cfg.n_max = 60;
        cfg.window = {0.05, 12.2};
        cfg.grid_points = 110;
    } else {
        throw ConfigError("unknown preset '" + name + "' (table1, table2, table3)");
    }
    return cfg;
}

namespace {

FVProblem build_problem(const RunConfig& cfg, const ChannelSpace& channel) {
    PhysicalSystem sys{cfg.mass, cfg.c};
    return fvcore::make_problem(sys, channel, cfg.potential, cfg.b, cfg.n_max, cfg.numerics());
}

std::vector<ResultRecord> to_records(const std::vector<SpectralResult>& states,
                                     const std::string& command, const std::string& echo) {
    std::vector<ResultRecord> out;
    for (const auto& s : states) out.push_back({s, command, echo});
    return out;
}

SearchWindow window_from(const RunConfig& cfg) {
    if (!cfg.window) throw ConfigError("this command needs search.window");
    return SearchWindow(cfg.window->first, cfg.window->second, cfg.grid_points, cfg.refine_tol);
}

// preset/compare helper: bound columns for the three kinds at a common l;
// fv12 rows are filtered to the dominant-l channel.
struct KindColumns {
    std::vector<SpectralResult> schr, fv0, fv12;
};

KindColumns solve_column_set(const RunConfig& cfg, int l, int fv12_two_j, int threads) {
    KindColumns cols;
    SearchWindow win = window_from(cfg);
    RunConfig c1 = cfg;
    c1.kind = Kind::schrodinger;
    c1.l = l;
    cols.schr = solver::find_bound_states(build_problem(c1, ChannelSpace::schrodinger(l)), win,
                                          threads);
    c1.kind = Kind::fv0;
    cols.fv0 = solver::find_bound_states(build_problem(c1, ChannelSpace::fv0(l)), win, threads);
    c1.kind = Kind::fv12;
    c1.two_j = fv12_two_j;
    auto fv12_all =
        solver::find_bound_states(build_problem(c1, ChannelSpace::fv12(fv12_two_j)), win, threads);
    for (auto& r : fv12_all)
        if (r.dominant_l == l) cols.fv12.push_back(r);
    return cols;
}

std::string render_grid(const std::vector<std::string>& headers,
                        const std::vector<const std::vector<SpectralResult>*>& columns,
                        std::size_t max_rows) {
    std::size_t rows = 0;
    for (auto* c : columns) rows = std::max(rows, c->size());
    rows = std::min(rows, max_rows);
    std::ostringstream os;
    char buf[64];
    for (const auto& h : headers) {
        std::snprintf(buf, sizeof buf, "%14s", h.c_str());
        os << buf;
    }
    os << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto* c : columns) {
            if (i < c->size())
                std::snprintf(buf, sizeof buf, "%14.7g", (*c)[i].energy.real());
            else
                std::snprintf(buf, sizeof buf, "%14s", "-");
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

RunOutcome run_preset_table1(const RunConfig& cfg, OutputFormat format, int threads) {
    RunOutcome out;
    const std::string echo = cfg.echo();
    SearchWindow win = window_from(cfg);

    std::vector<SpectralResult> bound[3];
    SpectralResult reso[3];
    const char* names[3] = {"schrodinger", "fv0", "fv12"};
    ChannelSpace chans[3] = {ChannelSpace::schrodinger(0), ChannelSpace::fv0(0),
                             ChannelSpace::fv12(1)};
    Complex guess = *cfg.resonance_guess;
    for (int k = 0; k < 3; ++k) {
        RunConfig ck = cfg;
        ck.kind = k == 0 ? Kind::schrodinger : k == 1 ? Kind::fv0 : Kind::fv12;
        FVProblem p = build_problem(ck, chans[k]);
        bound[k] = solver::find_bound_states(p, win, threads);
        reso[k] = solver::find_resonance(p, guess, cfg.refine_tol);
        if (k == 0 && std::abs(reso[0].energy.real() - guess.real()) < 0.5)
            guess = Complex(reso[0].energy.real(), -1e-5);  // seed the FV kinds
        out.records.push_back({reso[k], "preset table1", echo});
        for (const auto& s : bound[k]) out.records.push_back({s, "preset table1", echo});
    }
    if (format == OutputFormat::table) {
        std::ostringstream os;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%14s %14s %14s %14s\n", "", names[0], names[1], names[2]);
        os << buf;
        std::snprintf(buf, sizeof buf, "%14s %14.7g %14.7g %14.7g\n", "bound",
                      bound[0].empty() ? 0.0 : bound[0][0].energy.real(),
                      bound[1].empty() ? 0.0 : bound[1][0].energy.real(),
                      bound[2].empty() ? 0.0 : bound[2][0].energy.real());
        os << buf;
        std::snprintf(buf, sizeof buf, "%14s %14.7g %14.7g %14.7g\n", "resonance_re",
                      reso[0].energy.real(), reso[1].energy.real(), reso[2].energy.real());
        os << buf;
        std::snprintf(buf, sizeof buf, "%14s %14.3e %14.3e %14.3e\n", "resonance_im",
                      reso[0].energy.imag(), reso[1].energy.imag(), reso[2].energy.imag());
        os << buf;
        out.rendered = os.str();
    } else {
        out.rendered = write_output(out.records, format);
    }
    return out;
}

RunOutcome run_preset_grid(const RunConfig& cfg, OutputFormat format, int threads,
                           const std::string& preset_name) {
    RunOutcome out;
    const std::string echo = cfg.echo();
    KindColumns l0 = solve_column_set(cfg, 0, 1, threads);
    KindColumns l1 = solve_column_set(cfg, 1, 3, threads);
    const std::string cmd = "preset " + preset_name;
    for (auto* column : {&l0.schr, &l0.fv0, &l0.fv12, &l1.schr, &l1.fv0, &l1.fv12})
        for (const auto& s : *column) out.records.push_back({s, cmd, echo});
    if (format == OutputFormat::table) {
        out.rendered = render_grid({"schr(l=0)", "fv0(l=0)", "fv12", "schr(l=1)", "fv0(l=1)",
                                    "fv12"},
                                   {&l0.schr, &l0.fv0, &l0.fv12, &l1.schr, &l1.fv0, &l1.fv12}, 6);
    } else {
        out.rendered = write_output(out.records, format);
    }
    return out;
}

}  // namespace

RunOutcome run(const std::string& command, const std::string& preset_name,
               const RunConfig& config, const RunOptions& options) {
    RunConfig cfg = config;
    OutputFormat format = options.format_set ? options.format : cfg.format;
    const int threads = options.threads;
    RunOutcome out;

    if (command == "preset") {
        RunConfig pc = preset_config(preset_name);
        pc.format = format;
        out = preset_name == "table1" ? run_preset_table1(pc, format, threads)
                                      : run_preset_grid(pc, format, threads, preset_name);
    } else if (command == "solve") {
        FVProblem p = build_problem(cfg, cfg.channel());
        auto states = solver::find_bound_states(p, window_from(cfg), threads);
        out.records = to_records(states, "solve", cfg.echo());
        out.rendered = write_output(out.records, format);
        if (states.empty() && options.require_roots) out.exit_code = 1;
    } else if (command == "resonance") {
        if (!cfg.resonance_guess)
            throw ConfigError("resonance command needs search.resonance_guess");
        FVProblem p = build_problem(cfg, cfg.channel());
        auto state = solver::find_resonance(p, *cfg.resonance_guess, cfg.refine_tol);
        out.records = to_records({state}, "resonance", cfg.echo());
        out.rendered = write_output(out.records, format);
    } else if (command == "converge") {
        if (cfg.n_list.empty() || cfg.b_list.empty())
            throw ConfigError("converge command needs basis.n_list and basis.b_list");
        auto report = solver::converge(PhysicalSystem{cfg.mass, cfg.c}, cfg.channel(),
                                       cfg.potential, cfg.n_list, cfg.b_list, window_from(cfg),
                                       cfg.numerics(), threads);
        if (format == OutputFormat::json) {
            nlohmann::ordered_json o;
            o["command"] = "converge";
            o["entries"] = nlohmann::ordered_json::array();
            for (const auto& e : report.entries) {
                nlohmann::ordered_json je;
                je["n"] = e.n_max;
                je["b"] = e.b;
                je["energies"] = e.energies;
                je["converged"] = e.converged;
                o["entries"].push_back(std::move(je));
            }
            o["any_converged"] = report.any_converged;
            o["recommended_n"] = report.recommended_n_max;
            o["recommended_b"] = report.recommended_b;
            o["config"] = cfg.echo();
            o["version"] = fv::version;
            out.rendered = o.dump(2) + "\n";
        } else {
            std::ostringstream os;
            os << "    N       b   converged   lowest energies\n";
            for (const auto& e : report.entries) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%5d %7.4g %11s  ", e.n_max, e.b,
                              e.converged ? "yes" : "no");
                os << buf;
                for (std::size_t i = 0; i < std::min<std::size_t>(e.energies.size(), 6); ++i) {
                    char eb[32];
                    std::snprintf(eb, sizeof eb, " %.7g", e.energies[i]);
                    os << eb;
                }
                os << "\n";
            }
            if (report.any_converged)
                os << "recommended: N = " << report.recommended_n_max
                   << ", b = " << report.recommended_b << "\n";
            else
                os << "no converged (N, b) pair in the scanned lists\n";
            out.rendered = os.str();
        }
    } else if (command == "compare") {
        if (!cfg.angular_set && cfg.kind == Kind::fv12)
            throw ConfigError("compare needs problem.l");
        int l = cfg.kind == Kind::fv12 ? (cfg.two_j - 1) / 2 : cfg.l;
        KindColumns cols = solve_column_set(cfg, l, 2 * l + 1, threads);
        const std::string echo = cfg.echo();
        for (auto* column : {&cols.schr, &cols.fv0, &cols.fv12})
            for (const auto& s : *column) out.records.push_back({s, "compare", echo});
        if (format == OutputFormat::table) {
            out.rendered = render_grid({"schr", "fv0", "fv12"},
                                       {&cols.schr, &cols.fv0, &cols.fv12}, 12);
        } else {
            out.rendered = write_output(out.records, format);
        }
    } else {
        throw ConfigError("unknown command '" + command +
                          "' (solve, resonance, converge, compare, preset)");
    }
    return out;
}

}  // namespace fv::cli
