#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "doctest.h"
#include "hgauge/driver.hpp"

using namespace hgauge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hgauge_unit_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int count_lines(const fs::path& p) {
    const std::string s = slurp(p);
    return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" + HGAUGE_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
}

RunConfig chart_config(CouplingKind k, int n) {
    RunConfig cfg;
    cfg.model.coupling = k;
    cfg.model.g = k == CouplingKind::none ? 0.0 : 0.1;
    cfg.grid_n = n;
    return cfg;
}

}  // namespace

TEST_SUITE("driver") {
    TEST_CASE("config files parse into the run settings") {
        const RunConfig cfg = parse_config(
            "# comment\n[model]\ncoupling = static\n; another comment\ng = 0.1\ndelta_p = 0.25\n"
            "[grid]\nn = 32\nomega_max = 5\n[charts]\njobs = berry:all, eigenentropy:6\n"
            "[trajectories]\ninitial = 1; 1:0.6+7:0.8\n[run]\ndt = 0.0005\nthreads = 2\n");
        CHECK(cfg.model.coupling == CouplingKind::static_);
        CHECK(cfg.model.g == 0.1);
        CHECK(cfg.model.delta_p == 0.25);
        CHECK(cfg.grid_n == 32);
        CHECK(cfg.omega_max == 5.0);
        REQUIRE(cfg.charts.size() == 4);
        CHECK(cfg.charts[3].kind == ChartKind::eigenentropy);
        CHECK(cfg.charts[3].label == 6);
        REQUIRE(cfg.trajectories.size() == 2);
        CHECK(cfg.trajectories[1].weights.size() == 2);
        CHECK(cfg.dt == 0.0005);
        CHECK(cfg.threads == 2);
        CHECK_NOTHROW(cfg.validate());
    }

    TEST_CASE("config errors are reported as such") {
        CHECK_THROWS_AS(parse_config("[model]\nbogus = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("[model]\ng = abc\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("[model]\ncoupling = strong\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("[charts]\njobs = berry\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("[charts]\njobs = pretty:1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("[charts]\njobs = berry:4\n").validate(), ConfigError);
        CHECK_THROWS_AS(parse_config("[grid]\nn = 8\n").validate(), ConfigError);
        CHECK_THROWS_AS(parse_config("[grid]\nomega_max = 3\n").validate(), ConfigError);
        CHECK_THROWS_AS(parse_config("[trajectories]\ninitial = 12\n").validate(), ConfigError);
        CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
    }

    TEST_CASE("trajectory specifications") {
        const TrajectoryRequest a = parse_trajectory("4");
        CHECK(a.name == "phi4");
        REQUIRE(a.weights.size() == 1);
        CHECK(a.weights[0].first == 4);
        const TrajectoryRequest b = parse_trajectory("1:0.6+7:0.8");
        CHECK(b.name == "phi1+phi7");
        CHECK(b.weights[1].second == cplx(0.8));
        const TrajectoryRequest c = parse_trajectory("1+7");
        CHECK(c.weights[0].second == c.weights[1].second);
        CHECK_THROWS_AS(parse_trajectory("x"), ConfigError);
    }

    TEST_CASE("numbers are written with 17 significant digits") {
        CHECK(format_real(0.1) == "0.10000000000000001");
        CHECK(std::stod(format_real(M_PI)) == M_PI);
    }

    TEST_CASE("Berry chart of the isolated system has one row per node") {
        RunConfig cfg = chart_config(CouplingKind::none, 50);
        cfg.output_dir = scratch("berry").string();
        cfg.charts = {{ChartKind::berry, 1}};
        const std::vector<std::string> files = run_charts(cfg);
        const fs::path csv = fs::path(cfg.output_dir) / "berry_1.csv";
        REQUIRE(fs::exists(csv));
        CHECK(count_lines(csv) == 2501);
        const std::string pgm = slurp(fs::path(cfg.output_dir) / "berry_1.pgm");
        CHECK(pgm.rfind("P5\n50 50\n255\n", 0) == 0);
        CHECK(pgm.size() == std::string("P5\n50 50\n255\n").size() + 2500);
        CHECK(fs::exists(fs::path(cfg.output_dir) / "berry_1.overlay.csv"));
        CHECK(files.back().find("manifest") != std::string::npos);
    }

    TEST_CASE("uncoupled eigenentropy charts vanish") {
        const RunConfig cfg = chart_config(CouplingKind::none, 20);
        const SpectralField uni = universe_field(cfg);
        for (int a = 1; a <= 9; ++a) {
            const ReducedGeometry geo(uni, a);
            const FieldChart c = chart_from_universe(uni, &geo, ChartKind::eigenentropy, a);
            for (size_t k = 0; k < c.values.size(); ++k)
                if (!c.masked[k]) CHECK(c.values[k] < 1e-8);
        }
    }

    TEST_CASE("dynamical coupling entangles only labels 6 and 8") {
        const RunConfig cfg = chart_config(CouplingKind::dynamical, 20);
        const SpectralField uni = universe_field(cfg);
        std::vector<FieldChart> charts;
        for (int a = 1; a <= 9; ++a) {
            const ReducedGeometry geo(uni, a);
            charts.push_back(chart_from_universe(uni, &geo, ChartKind::eigenentropy, a));
        }
        for (int a = 1; a <= 9; ++a) {
            double top = 0.0;
            for (double v : charts[a - 1].values) top = std::max(top, v);
            CAPTURE(a);
            if (a == 6 || a == 8)
                CHECK(top > 1e-8);
            else
                CHECK(top < 1e-8);
        }
        for (size_t k = 0; k < charts[5].values.size(); ++k)
            CHECK(std::abs(charts[5].values[k] - charts[7].values[k]) < 1e-10);
    }

    TEST_CASE("reruns are byte-identical") {
        auto run = [](const std::string& dir, int threads) {
            RunConfig cfg = chart_config(CouplingKind::static_, 20);
            cfg.output_dir = dir;
            cfg.threads = threads;
            cfg.charts = {{ChartKind::curving_avg, 4}, {ChartKind::berry, 3}};
            cfg.trajectories = {parse_trajectory("4")};
            run_charts(cfg);
            run_propagation(cfg);
            run_events(cfg);
        };
        const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
        run(a.string(), 1);
        run(b.string(), 3);
        int compared = 0;
        for (const auto& e : fs::directory_iterator(a)) {
            const fs::path other = b / e.path().filename();
            REQUIRE(fs::exists(other));
            CHECK(slurp(e.path()) == slurp(other));
            ++compared;
        }
        CHECK(compared >= 10);
    }

    TEST_CASE("event detection on the detuned path") {
        const PulseParams pp;
        const ModelParams p;
        CHECK(detect_events(pp, p, EventScope::system, 0.0).empty());
        CHECK(detect_events(pp, p, EventScope::universe, 0.0).empty());
        const std::vector<PathEvent> sys = detect_events(pp, p, EventScope::system, 0.05);
        REQUIRE(sys.size() == 2);
        CHECK(sys[0].label_a == 1);
        CHECK(sys[0].label_b == 2);
        CHECK(sys[1].label_a == 2);
        CHECK(sys[1].label_b == 3);
        CHECK(sys[0].t < sys[1].t);
        const std::vector<PathEvent> uni = detect_events(pp, p, EventScope::universe, 0.05);
        auto has = [&](int a, int b) {
            for (const PathEvent& e : uni)
                if (e.label_a == a && e.label_b == b) return true;
            return false;
        };
        CHECK(has(1, 2));
        CHECK(has(2, 3));
        CHECK(has(2, 5));
        CHECK(has(5, 8));
        for (const PathEvent& e : uni) CHECK(e.min_gap < 0.05);
    }

    TEST_CASE("command line exit codes and output directory precedence") {
        const fs::path dir = scratch("cli");
        const fs::path good = dir / "good.ini", bad = dir / "bad.ini";
        std::ofstream(good) << "[model]\ncoupling = none\n[grid]\nn = 16\n[run]\noutput_dir = " << (dir / "cfg").string()
                            << "\n";
        std::ofstream(bad) << "[model]\nnonsense = 1\n";
        CHECK(run_cli("events --config \"" + good.string() + "\"") == 0);
        CHECK(fs::exists(dir / "cfg" / "events_system.csv"));
        CHECK(run_cli("events --config \"" + good.string() + "\"", "HGAUGE_OUT_DIR=\"" + (dir / "env").string() + "\"") == 0);
        CHECK(fs::exists(dir / "env" / "events_system.csv"));
        CHECK(run_cli("events --config \"" + good.string() + "\" --out \"" + (dir / "flag").string() + "\"",
                      "HGAUGE_OUT_DIR=\"" + (dir / "env2").string() + "\"") == 0);
        CHECK(fs::exists(dir / "flag" / "events_system.csv"));
        CHECK_FALSE(fs::exists(dir / "env2"));
        CHECK(run_cli("events --config \"" + bad.string() + "\"") == 1);
        CHECK(run_cli("events --config /nonexistent.ini") == 1);
        CHECK(run_cli("charts --config \"" + good.string() + "\"") == 1);
        CHECK(run_cli("frobnicate") == 1);
        CHECK(run_cli("propagate --config \"" + good.string() + "\" --grid-n 8") == 1);
        // a step far beyond the stability bound is a numerical failure
        std::ofstream(dir / "unstable.ini") << "[trajectories]\ninitial = 1\n[run]\noutput_dir = "
                                            << (dir / "u").string() << "\n";
        CHECK(run_cli("propagate --config \"" + (dir / "unstable.ini").string() + "\" --dt 0.5") == 2);
    }
}

// Worked examples that the implementation does not reproduce; kept as
// written so the discrepancy stays visible (see README).
TEST_SUITE("contested") {
    TEST_CASE("resonant isolated path shows exactly two system events") {
        ModelParams p;
        p.delta_p = p.delta_s = 0.0;
        const std::vector<PathEvent> sys = detect_events(PulseParams{}, p, EventScope::system, 0.05);
        REQUIRE(sys.size() == 2);
        CHECK(sys[0].label_a == 1);
        CHECK(sys[0].label_b == 2);
        CHECK(sys[1].label_a == 2);
        CHECK(sys[1].label_b == 3);
    }

    TEST_CASE("resonant uncoupled universe adds the environment-driven events") {
        ModelParams p;
        p.delta_p = p.delta_s = 0.0;
        const std::vector<PathEvent> uni = detect_events(PulseParams{}, p, EventScope::universe, 0.05);
        auto has = [&](int a, int b) {
            for (const PathEvent& e : uni)
                if (e.label_a == a && e.label_b == b) return true;
            return false;
        };
        CHECK(has(2, 5));
        CHECK(has(5, 8));
    }

    TEST_CASE("superposition of phi_1 and phi_7 acquires a small nonzero entropy") {
        const PulseParams pp;
        const ModelParams free;
        const double s = std::sqrt(0.5);
        const TrajectoryRecord rec = sod_propagate(initial_state({{1, s}, {7, s}}, free, pp), free, pp, {});
        const std::vector<double> ent = entropy_series(rec);
        double late = 0.0;
        for (size_t k = 0; k < ent.size(); ++k)
            if (rec.times[k] > 100.0) late = std::max(late, ent[k]);
        MESSAGE("late-time entropy " << late);
        // above the 1e-8 clamping window that separates mixedness from roundoff
        CHECK(late > 1e-8);
    }
}

TEST_SUITE("contested") {
    TEST_CASE("lasers are off at both ends of the pulse window") {
        const PulseParams pp;
        const ControlPoint start = pulse_path(pp.t0, pp), stop = pulse_path(pp.t_end, pp);
        CHECK(start.omega_p() < 1e-7);
        CHECK(start.omega_s() < 1e-7);
        CHECK(std::hypot(start.x1, start.x2) < 1e-6);
        CHECK(std::hypot(stop.x1, stop.x2) < 1e-6);
    }

    TEST_CASE("occupation series sum to one within 1e-6 at the default step") {
        ModelParams p;
        p.coupling = CouplingKind::static_;
        p.g = 0.1;
        const PulseParams pp;
        const TrajectoryRecord rec = sod_propagate(initial_state({{1, 1.0}}, p, pp), p, pp, {});
        double worst = 0.0;
        for (const auto& row : occupations(rec, OccupationBasis::universe_instantaneous, p, pp).values) {
            double sum = 0.0;
            for (double v : row) sum += v;
            worst = std::max(worst, std::abs(sum - 1.0));
        }
        MESSAGE("largest |sum - 1| " << worst);
        CHECK(worst < 1e-6);
    }

    TEST_CASE("uncoupled product states keep entropy below 1e-6 at the default step") {
        const ModelParams p;
        const PulseParams pp;
        for (int label = 1; label <= 9; ++label) {
            const TrajectoryRecord rec = sod_propagate(initial_state({{label, 1.0}}, p, pp), p, pp, {});
            double worst = 0.0;
            for (double s : entropy_series(rec)) worst = std::max(worst, s);
            CAPTURE(label);
            CHECK(worst < 1e-6);
        }
    }

    TEST_CASE("halving the default step moves final occupations by less than 1e-6") {
        ModelParams p;
        p.coupling = CouplingKind::static_;
        p.g = 0.1;
        const PulseParams pp;
        const Vec9 psi = initial_state({{1, 1.0}}, p, pp);
        PropagationOptions fine;
        fine.dt = 5e-4;
        fine.stride = 200;
        const auto oc = occupations(sod_propagate(psi, p, pp, {}), OccupationBasis::universe_instantaneous, p, pp);
        const auto of = occupations(sod_propagate(psi, p, pp, fine), OccupationBasis::universe_instantaneous, p, pp);
        double worst = 0.0;
        for (int k = 0; k < 9; ++k) worst = std::max(worst, std::abs(oc.values.back()[k] - of.values.back()[k]));
        MESSAGE("largest change " << worst);
        CHECK(worst < 1e-6);
    }
}
