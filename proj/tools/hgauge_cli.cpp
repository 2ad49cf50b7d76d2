#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hgauge/acceptance.hpp"
#include "hgauge/driver.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;

struct Flags {
    std::string config;
    std::string out;
    std::optional<int> threads;
    std::optional<int> grid_n;
    std::optional<double> dt;
    std::optional<double> delta_p;
    std::optional<double> delta_s;
};

void add_flags(CLI::App* cmd, Flags& f, bool with_config) {
    if (with_config) {
        cmd->add_option("--config", f.config, "run configuration file (key = value with [section] headers)");
        cmd->add_option("--out", f.out, "output directory (overrides HGAUGE_OUT_DIR and the config)");
    }
    cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--grid-n", f.grid_n, "nodes per side of the chart grid")->check(CLI::PositiveNumber);
    cmd->add_option("--dt", f.dt, "propagation time step (au)")->check(CLI::PositiveNumber);
}

hgauge::RunConfig resolve(const Flags& f) {
    hgauge::RunConfig cfg = f.config.empty() ? hgauge::RunConfig{} : hgauge::load_config(f.config);
    if (const char* env = std::getenv("HGAUGE_OUT_DIR"); env && *env) cfg.output_dir = env;
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (f.threads) cfg.threads = *f.threads;
    if (f.grid_n) cfg.grid_n = *f.grid_n;
    if (f.dt) cfg.dt = *f.dt;
    cfg.validate();
    return cfg;
}

void print_files(const std::vector<std::string>& files) {
    for (const std::string& f : files) std::cout << f << "\n";
}

int verify(const Flags& f) {
    hgauge::AcceptanceOptions opts;
    if (f.threads) opts.threads = *f.threads;
    if (f.grid_n) opts.grid_n = *f.grid_n;
    if (f.dt) opts.dt = *f.dt;
    if (f.delta_p) opts.delta_p = *f.delta_p;
    if (f.delta_s) opts.delta_s = *f.delta_s;
    int failed = 0;
    hgauge::run_acceptance(opts, [&](const hgauge::CriterionResult& r) {
        if (!r.passed) ++failed;
        std::printf("[%s] %2d %s: %s (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(),
                    r.detail.c_str(), r.seconds);
        std::fflush(stdout);
    });
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed == 0 ? kOk : kNumericalFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adiabatic gauge-field charts and STIRAP propagation for a system entangled with an environment"};
    app.require_subcommand(1);
    Flags flags;
    CLI::App* charts = app.add_subcommand("charts", "write chart CSV, PGM and overlay files");
    CLI::App* propagate = app.add_subcommand("propagate", "propagate the configured trajectories");
    CLI::App* events = app.add_subcommand("events", "list crossing events along the pulse path");
    CLI::App* check = app.add_subcommand("verify", "run the acceptance suites 1-10");
    for (CLI::App* cmd : {charts, propagate, events}) add_flags(cmd, flags, true);
    add_flags(check, flags, false);
    check->add_option("--delta-p", flags.delta_p, "pump detuning for every acceptance run (au)");
    check->add_option("--delta-s", flags.delta_s, "Stokes detuning for every acceptance run (au)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (check->parsed()) return verify(flags);
        const hgauge::RunConfig cfg = resolve(flags);
        if (charts->parsed()) {
            if (cfg.charts.empty()) throw hgauge::ConfigError("no chart jobs requested ([charts] jobs)");
            print_files(hgauge::run_charts(cfg));
        } else if (propagate->parsed()) {
            if (cfg.trajectories.empty())
                throw hgauge::ConfigError("no trajectories requested ([trajectories] initial)");
            print_files(hgauge::run_propagation(cfg));
        } else {
            print_files(hgauge::run_events(cfg));
        }
        return kOk;
    } catch (const hgauge::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const hgauge::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
