// Command-line front end: bound-state scans, resonance refinement,
// convergence tables and side-by-side comparisons for the radial
// Feshbach-Villars solver.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fv/cli.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace fv;

int main(int argc, char** argv) {
    CLI::App app{"fvsolve - relativistic radial bound-state and resonance solver"};
    app.require_subcommand(0, 0);

    std::string command, preset_name, config_path, format_str, out_path;
    int threads = 0;
    bool require_roots = false, verbose = false;

    app.add_option("command", command, "solve | resonance | converge | compare | preset")
        ->required();
    app.add_option("preset", preset_name, "preset name (table1, table2, table3)");
    app.add_option("--config", config_path, "configuration file path");
    app.add_option("--format", format_str, "table | json | csv");
    app.add_option("--out", out_path, "write output to this file instead of stdout");
    app.add_option("--threads", threads, "cap the energy-scan fan-out (default: machine)");
    app.add_flag("--require-roots", require_roots, "exit 1 when solve finds no states");
    app.add_flag("--verbose", verbose, "timing and progress notes on stderr");

    CLI11_PARSE(app, argc, argv);

    auto t0 = std::chrono::steady_clock::now();
    try {
        cli::RunConfig config;
        if (command == "preset") {
            if (preset_name.empty()) {
                std::cerr << "error: preset command needs a name (table1, table2, table3)\n";
                return 3;
            }
        } else {
            if (config_path.empty()) {
                std::cerr << "error: --config is required for '" << command << "'\n";
                return 3;
            }
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: cannot open config file '" << config_path << "'\n";
                return 3;
            }
            std::stringstream ss;
            ss << in.rdbuf();
            config = cli::parse_config(ss.str());
        }

        cli::RunOptions options;
        options.threads = threads;
        options.require_roots = require_roots;
        options.verbose = verbose;
        if (!format_str.empty()) {
            options.format_set = true;
            if (format_str == "table")
                options.format = cli::OutputFormat::table;
            else if (format_str == "json")
                options.format = cli::OutputFormat::json;
            else if (format_str == "csv")
                options.format = cli::OutputFormat::csv;
            else {
                std::cerr << "error: --format must be table, json or csv\n";
                return 3;
            }
        }
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#endif

        cli::RunOutcome outcome = cli::run(command, preset_name, config, options);

        std::string target = !out_path.empty()        ? out_path
                             : !config.out_path.empty() ? config.out_path
                                                        : std::string();
        if (!target.empty()) {
            std::ofstream out(target);
            if (!out) {
                std::cerr << "error: cannot write to '" << target << "'\n";
                return 3;
            }
            out << outcome.rendered;
        } else {
            std::cout << outcome.rendered;
        }
        if (verbose) {
            double ms = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count() *
                        1e3;
            std::cerr << "wall time: " << ms << " ms\n";
        }
        return outcome.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error";
        if (e.line > 0) std::cerr << " (line " << e.line << ")";
        std::cerr << ": " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
