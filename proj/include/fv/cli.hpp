#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fv/solver.hpp"

namespace fv::cli {

enum class OutputFormat { table, json, csv };

/// Complete description of one computation, as parsed from a config file.
struct RunConfig {
    double mass = 1.0;
    double c = 137.036;

    fvcore::Kind kind = fvcore::Kind::schrodinger;
    int l = 0;
    int two_j = 1;
    bool angular_set = false;

    potentials::PotentialModel potential;

    int n_max = 60;
    double b = 1.0;
    std::vector<int> n_list;     // converge command
    std::vector<double> b_list;  // converge command

    std::optional<std::pair<double, double>> window;
    int grid_points = 96;
    std::optional<Complex> resonance_guess;

    double cf_tol = 1e-12;
    std::size_t cf_max_depth = 200000;
    double refine_tol = 1e-10;
    int quadrature_factor = 3;

    OutputFormat format = OutputFormat::table;
    std::string out_path;

    fvcore::ChannelSpace channel() const;
    fvcore::Numerics numerics() const;
    /// canonical config text; parsing it again yields an equivalent RunConfig
    std::string echo() const;
};

/// Line-oriented `section.key = value` parser; `#` starts a comment; unknown
/// keys are rejected with their line number.
RunConfig parse_config(const std::string& text);

/// One reported state plus provenance: the config echo and software version.
struct ResultRecord {
    solver::SpectralResult state;
    std::string command;
    std::string config_echo;
    std::string version = fv::version;
};

std::string write_output(const std::vector<ResultRecord>& records, OutputFormat format);

struct RunOptions {
    OutputFormat format = OutputFormat::table;
    bool format_set = false;
    std::string out_path;
    int threads = 0;
    bool require_roots = false;
    bool verbose = false;
};

struct RunOutcome {
    std::string rendered;
    int exit_code = 0;
    std::vector<ResultRecord> records;
};

/// Execute one of: solve, resonance, converge, compare, preset table1|table2|table3.
/// Exit codes: 0 success, 1 no roots under --require-roots, 2 numerical
/// failure, 3 configuration error.
RunOutcome run(const std::string& command, const std::string& preset_name,
               const RunConfig& config, const RunOptions& options);

/// Built-in configurations of the bundled benchmark problems.
RunConfig preset_config(const std::string& name);

}  // namespace fv::cli
