// zeno: command-line front end for jump probabilities between Zeno subspaces.
//
//   zeno run       --config scenario.ini [--out table.csv] [--jobs N] [--strict] [--emit-plot]
//   zeno compare   --config scenario.ini [--out table.csv] [--jobs N] [--strict] [--emit-plot]
//   zeno decompose --config scenario.ini [--at t]
//   zeno info
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 validity diagnostics present under --strict.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "zeno/harness/csv.hpp"
#include "zeno/zeno.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_strict = 4;

const char* const column_help = R"(CSV schema (the first column is the swept parameter, or K / h without a sweep):
  run:     <param>,W,est_error,adiabaticity_ratio,adiabatic,method,status,diagnostics
  compare: <param>,W_perturbative,W_exact,abs_gap,rel_gap,adiabaticity_ratio,adiabatic,status
  decompose: level,eigenvalue,rank
Every CSV starts with the resolved configuration as '# ' lines.
Environment: ZENO_NUM_POLICY="key=value;..." overrides the default tolerances.)";

struct Options {
    std::string config_path;
    std::string out_path;
    std::size_t jobs = 0;
    bool strict = false;
    bool emit_plot = false;
    double at = 0.0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw zeno::harness::ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw zeno::harness::ConfigError("cannot write '" + path + "'");
    out << text;
}

zeno::harness::ScenarioConfig load(const Options& opt) {
    zeno::NumericPolicy base;
    try {
        base = zeno::NumericPolicy::from_env();
    } catch (const zeno::ValidationError& e) {
        throw zeno::harness::ConfigError(std::string("ZENO_NUM_POLICY: ") + e.what());
    }
    auto config = zeno::harness::parse_config(read_file(opt.config_path), base);
    if (!opt.out_path.empty()) config.output = opt.out_path;
    return config;
}

int emit(const zeno::harness::ResultTable& table, const Options& opt) {
    const std::string csv = zeno::harness::to_csv(table);
    const std::string& path = table.config.output;
    if (path.empty() || path == "-") {
        if (opt.emit_plot) throw zeno::harness::ConfigError("--emit-plot needs an output file (--out or output = ...)");
        std::cout << csv;
    } else {
        write_file(path, csv);
        if (opt.emit_plot) write_file(path + ".gp", zeno::harness::plot_script(table, path));
    }
    return opt.strict && table.any_invalid ? exit_strict : exit_ok;
}

int run_decompose(const Options& opt) {
    const auto config = load(opt);
    const auto built = zeno::harness::build_scenario(config);
    const double horizon = built.model.t_final();
    if (opt.at < 0.0 || opt.at > horizon)
        throw zeno::harness::ConfigError("--at must lie in [0, " + zeno::detail::format_double(horizon) + "]");
    const auto levels = zeno::decompose(built.model.hmeas()(opt.at, zeno::Side::right, config.policy), std::nullopt,
                                        config.policy);
    std::ostringstream out;
    std::istringstream echo(zeno::harness::to_text(config));
    for (std::string line; std::getline(echo, line);) out << "# " << line << '\n';
    out << "level,eigenvalue,rank\n";
    for (std::size_t n = 0; n < levels.size(); ++n)
        out << n << ',' << zeno::detail::format_double(levels.level(n).eigenvalue) << ','
            << levels.level(n).projector.rank() << '\n';
    for (const auto& w : levels.warnings()) std::cerr << "warning: " << w << '\n';
    if (config.output.empty() || config.output == "-") std::cout << out.str();
    else write_file(config.output, out.str());
    return opt.strict && !levels.warnings().empty() ? exit_strict : exit_ok;
}

int run_info() {
    std::cout << "zeno 1.0.0\n";
    std::cout << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
    std::cout << "hardware threads " << zeno::harness::default_jobs() << '\n';
    std::cout << "policy " << zeno::NumericPolicy::from_env().to_string() << '\n';
    std::cout << column_help << '\n';
    std::cout << "default spinchain configuration:\n" << zeno::harness::to_text(zeno::harness::parse_config("")) << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jump probabilities between quantum Zeno subspaces", "zeno"};
    app.footer(column_help);
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub, bool table) {
        sub->add_option("--config", opt.config_path, "scenario configuration file")->required();
        sub->add_option("--out", opt.out_path, "output CSV path (overrides the config's output key)");
        sub->add_flag("--strict", opt.strict, "exit with 4 when validity diagnostics are present");
        if (table) {
            sub->add_option("--jobs", opt.jobs, "worker threads (default: hardware concurrency)");
            sub->add_flag("--emit-plot", opt.emit_plot, "also write <out>.gp, a gnuplot script");
        }
    };
    auto* run = app.add_subcommand("run", "evaluate the perturbative jump probability over the sweep");
    add_common(run, true);
    auto* compare = app.add_subcommand("compare", "perturbative result against the exact propagator");
    add_common(compare, true);
    auto* decomp = app.add_subcommand("decompose", "Zeno levels of the measurement Hamiltonian");
    add_common(decomp, false);
    decomp->add_option("--at", opt.at, "time at which H_meas is decomposed (default 0)");
    auto* info = app.add_subcommand("info", "build information, tolerances and the CSV schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    const std::size_t jobs = opt.jobs == 0 ? zeno::harness::default_jobs() : opt.jobs;
    try {
        if (*info) return run_info();
        if (*decomp) return run_decompose(opt);
        const auto config = load(opt);
        if (*run) return emit(zeno::harness::run_scenario(config, jobs), opt);
        return emit(zeno::harness::oracle_compare(config, jobs), opt);
    } catch (const zeno::harness::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const zeno::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const zeno::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}
